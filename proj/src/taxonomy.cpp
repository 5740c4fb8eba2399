#include "struggle/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace struggle {

namespace {

// Non-normative default mapping. Health, Job and Finance are the canonical
// telic examples; Entertainment, Art and Beauty the canonical paratelic ones.
constexpr std::string_view kBuiltin = R"(# state	category	keywords
telic	Health	health,medical,doctor,symptoms,disease,treatment,clinic,medicine,hospital,pain
telic	Job	job,jobs,career,resume,hiring,salary,interview,vacancy,employment,recruiter
telic	Finance	finance,loan,tax,bank,mortgage,credit,insurance,invest,stock,budget
telic	Education	education,school,university,course,degree,exam,college,tuition,study,scholarship
telic	Legal	legal,law,lawyer,court,visa,contract,attorney,license,permit,lawsuit
telic	Housing	housing,rent,apartment,landlord,lease,realtor,property,home,moving,repair
paratelic	Entertainment	entertainment,movie,movies,tv,show,celebrity,trailer,series,netflix,comedy
paratelic	Art	art,painting,gallery,museum,drawing,sculpture,artist,design,craft,photography
paratelic	Beauty	beauty,makeup,hair,skincare,nails,cosmetics,dye,fashion,style,salon
paratelic	Games	games,game,gaming,puzzle,console,esports,minecraft,arcade,play,cheats
paratelic	Music	music,song,songs,lyrics,album,band,concert,playlist,guitar,singer
paratelic	Sports	sports,football,soccer,basketball,score,team,league,match,highlights,nba
)";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto p = s.find(sep, start);
    out.push_back(trim(s.substr(start, p == std::string_view::npos ? s.npos : p - start)));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

// Most frequent label, ties to the smallest name.
std::optional<std::string> majority(const std::vector<std::string>& labels) {
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  std::optional<std::string> best;
  std::size_t best_n = 0;
  for (const auto& [name, n] : counts) {
    if (n > best_n) {
      best = name;
      best_n = n;
    }
  }
  return best;
}

}  // namespace

Taxonomy::Taxonomy(std::vector<TaxonomyCategory> categories) : categories_(std::move(categories)) {
  if (categories_.empty()) throw ConfigError("taxonomy has no categories");
  std::set<std::string> seen;
  for (const auto& c : categories_) {
    if (c.name.empty()) throw ConfigError("taxonomy category with empty name");
    if (!seen.insert(c.name).second) throw ConfigError("duplicate taxonomy category " + c.name);
    if (c.keywords.empty()) throw ConfigError("taxonomy category " + c.name + " has no keywords");
    if (c.state == State::Unassigned) throw ConfigError("category " + c.name + " has no state");
  }

  std::vector<text::TermCounts> tfs;
  for (const auto& c : categories_) {
    std::vector<std::string> tokens = text::alnum_tokens(c.name);
    for (const auto& k : c.keywords) {
      auto kt = text::alnum_tokens(k);
      tokens.insert(tokens.end(), kt.begin(), kt.end());
    }
    tfs.push_back(text::term_counts(tokens));
    for (const auto& [term, _] : tfs.back()) doc_freq_[term] += 1.0;
  }
  for (const auto& tf : tfs) docs_.push_back(weigh(tf));
}

Taxonomy Taxonomy::parse(std::istream& in) {
  std::vector<TaxonomyCategory> cats;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw ConfigError("taxonomy line " + std::to_string(lineno) + ": expected 3 tab fields");
    }
    TaxonomyCategory c;
    try {
      c.state = parse_state(fields[0]);
    } catch (const FormatError& e) {
      throw ConfigError("taxonomy line " + std::to_string(lineno) + ": " + e.what());
    }
    c.name = fields[1];
    for (auto& k : split(fields[2], ',')) {
      if (!k.empty()) c.keywords.push_back(std::move(k));
    }
    cats.push_back(std::move(c));
  }
  return Taxonomy(std::move(cats));
}

Taxonomy Taxonomy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open taxonomy file " + path);
  return parse(in);
}

Taxonomy Taxonomy::builtin() {
  std::istringstream in{std::string(kBuiltin)};
  return parse(in);
}

std::vector<std::string> Taxonomy::names() const {
  std::vector<std::string> out;
  for (const auto& c : categories_) out.push_back(c.name);
  std::sort(out.begin(), out.end());
  return out;
}

double Taxonomy::idf(const std::string& term) const {
  const double n = static_cast<double>(categories_.size());
  auto it = doc_freq_.find(term);
  const double df = it == doc_freq_.end() ? 0.0 : it->second;
  return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

text::TermCounts Taxonomy::weigh(const text::TermCounts& tf) const {
  text::TermCounts out;
  for (const auto& [t, w] : tf) out[t] = w * idf(t);
  return out;
}

double Taxonomy::score_url(std::string_view url_text, std::size_t category) const {
  const auto tokens = text::alnum_tokens(url_text);
  if (tokens.empty()) return 0.0;
  return text::cosine(weigh(text::term_counts(tokens)), docs_.at(category));
}

double Taxonomy::score_url(std::string_view url_text, std::string_view category_name) const {
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (categories_[i].name == category_name) return score_url(url_text, i);
  }
  throw ConfigError("unknown category " + std::string(category_name));
}

std::optional<std::string> Taxonomy::label_url(std::string_view url_text) const {
  const auto tokens = text::alnum_tokens(url_text);
  if (tokens.empty()) return std::nullopt;
  const auto query = weigh(text::term_counts(tokens));
  std::optional<std::string> best;
  double best_score = 0.0;
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    const double s = text::cosine(query, docs_[i]);
    if (s <= 0.0) continue;
    if (!best || s > best_score || (s == best_score && categories_[i].name < *best)) {
      best = categories_[i].name;
      best_score = s;
    }
  }
  return best;
}

std::vector<std::string> Taxonomy::click_labels(const Session& s) const {
  std::vector<std::string> out;
  for (const auto& e : s.events) {
    if (!e.is_click() || !e.clicked_url) continue;
    if (auto l = label_url(*e.clicked_url)) out.push_back(std::move(*l));
  }
  return out;
}

std::optional<std::string> Taxonomy::assign_topic(const Session& s) const {
  return majority(click_labels(s));
}

State Taxonomy::assign_state(const std::optional<std::string>& topic) const {
  if (!topic) return State::Unassigned;
  for (const auto& c : categories_) {
    if (c.name == *topic) return c.state;
  }
  return State::Unassigned;
}

void assign_topics_and_states(std::vector<Session>& sessions, const Taxonomy& tax) {
  for (auto& s : sessions) {
    s.topic = tax.assign_topic(s);
    s.state = tax.assign_state(s.topic);
  }
}

void write_taxonomy(std::ostream& out, const Taxonomy& tax) {
  for (const auto& c : tax.categories()) {
    out << to_string(c.state) << '\t' << c.name << '\t';
    for (std::size_t i = 0; i < c.keywords.size(); ++i) out << (i ? "," : "") << c.keywords[i];
    out << '\n';
  }
}

}  // namespace struggle
