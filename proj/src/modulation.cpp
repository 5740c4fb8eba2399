#include "struggle/modulation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "struggle/stats.hpp"

namespace struggle::modulation {

ModulationParams fit(const std::vector<features::FeatureRow>& rows,
                     const std::set<FeatureGroup>& selected_groups) {
  std::vector<const features::FeatureRow*> telic, paratelic;
  for (const auto& r : rows) {
    if (r.state == State::Telic) telic.push_back(&r);
    if (r.state == State::Paratelic) paratelic.push_back(&r);
  }
  if (telic.size() < 2 || paratelic.size() < 2) {
    throw DataError("modulation fit needs at least 2 telic and 2 paratelic sessions (got " +
                    std::to_string(telic.size()) + " and " + std::to_string(paratelic.size()) +
                    ")");
  }
  ModulationParams p;
  p.selected_groups = selected_groups;
  std::vector<double> t(telic.size()), q(paratelic.size());
  for (auto g : selected_groups) {
    for (auto f : features_in_group(g)) {
      for (std::size_t i = 0; i < telic.size(); ++i) t[i] = telic[i]->fv.values[f];
      for (std::size_t i = 0; i < paratelic.size(); ++i) q[i] = paratelic[i]->fv.values[f];
      p.moments[f] = {stats::sample_mean(t), stats::sample_std(t), stats::sample_mean(q),
                      stats::sample_std(q)};
    }
  }
  return p;
}

double transform_value(double x, const FeatureMoments& m) {
  if (m.sigma_paratelic == 0) return x - m.mu_paratelic + m.mu_telic;
  const double scale = m.sigma_telic / m.sigma_paratelic;
  return scale * x + m.mu_telic - scale * m.mu_paratelic;
}

FeatureVector apply(const FeatureVector& fv, State state, const ModulationParams& params) {
  if (state != State::Paratelic) return fv;
  FeatureVector out = fv;
  for (const auto& [f, m] : params.moments) out.values.at(f) = transform_value(fv.values.at(f), m);
  return out;
}

void apply_all(std::vector<features::FeatureRow>& rows, const ModulationParams& params) {
  for (auto& r : rows) r.fv = apply(r.fv, r.state, params);
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw FormatError("bad number '" + s + "'");
  return v;
}

}  // namespace

void write_params(std::ostream& out, const ModulationParams& params) {
  out << "groups";
  for (auto g : params.selected_groups) out << '\t' << to_string(g);
  out << '\n';
  for (const auto& [f, m] : params.moments) {
    out << feature_dictionary()[f].name << '\t' << g17(m.mu_telic) << '\t' << g17(m.sigma_telic)
        << '\t' << g17(m.mu_paratelic) << '\t' << g17(m.sigma_paratelic) << '\n';
  }
}

ModulationParams read_params(std::istream& in) {
  if (!in) throw DataError("params stream is not readable");
  ModulationParams p;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("params file is empty");
  {
    std::istringstream hs(line);
    std::string tok;
    std::getline(hs, tok, '\t');
    if (tok != "groups") throw FormatError("params file must start with a groups line");
    while (std::getline(hs, tok, '\t')) {
      if (!tok.empty()) p.selected_groups.insert(parse_group(tok));
    }
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<std::string> cells;
    std::string tok;
    while (std::getline(ls, tok, '\t')) cells.push_back(tok);
    if (cells.size() != 5) throw FormatError("params line needs 5 tab-separated fields");
    std::size_t f = 0;
    try {
      f = feature_index(cells[0]);
    } catch (const std::out_of_range& e) {
      throw FormatError(e.what());
    }
    if (!p.selected_groups.count(feature_dictionary()[f].group)) {
      throw FormatError("feature " + cells[0] + " is not in a selected group");
    }
    FeatureMoments m{parse_real(cells[1]), parse_real(cells[2]), parse_real(cells[3]),
                     parse_real(cells[4])};
    if (m.sigma_telic < 0 || m.sigma_paratelic < 0) throw FormatError("negative sigma");
    p.moments[f] = m;
  }
  return p;
}

}  // namespace struggle::modulation
