#include "cli_app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "struggle/modulation.hpp"
#include "struggle/stats.hpp"

namespace struggle::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using features::FeatureRow;

std::vector<FeatureRow> rows_from_log(std::istream& log,
                                      const std::map<std::string, synth::Truth>& truth,
                                      const PopularityTable& pop, const Taxonomy& tax,
                                      const PipelineConfig& cfg) {
  auto parsed = ingest::parse_log(log);
  auto sessions = ingest::segment_sessions(std::move(parsed.events), cfg.segment);
  assign_topics_and_states(sessions, tax);
  for (auto& s : sessions) {
    auto it = truth.find(s.session_id);
    s.label = it == truth.end() ? Label::Unlabeled : it->second.label;
  }
  return features::extract_all(sessions, pop, tax, cfg.extract, cfg.jobs);
}

std::vector<FeatureRow> simulate_rows(const synth::SimConfig& sim, const Taxonomy& tax,
                                      const PipelineConfig& cfg) {
  const auto out = synth::generate_sessions(sim, tax);
  std::stringstream log;
  synth::write_log(log, out.sessions);
  std::map<std::string, synth::Truth> truth;
  for (const auto& t : out.truth) truth[t.session_id] = t;
  synth::PopularityConfig pc;
  pc.seed = sim.seed;
  const auto pop = synth::generate_popularity(pc, tax, out.sessions, cfg.extract);
  return rows_from_log(log, truth, pop, tax, cfg);
}

Comparison compare(const std::vector<FeatureRow>& rows, learn::EvalConfig cfg) {
  Comparison c;
  cfg.mode = learn::FmMode::Off;
  c.baseline = learn::kfold_eval(rows, cfg);
  cfg.mode = learn::FmMode::Fmns;
  c.fmns = learn::kfold_eval(rows, cfg);
  cfg.mode = learn::FmMode::Fm;
  c.fm = learn::kfold_eval(rows, cfg);
  return c;
}

namespace {

using MetricField = std::optional<double> learn::Metrics::*;

struct MetricColumn {
  const char* title;
  const char* key;
  MetricField field;  // null for accuracy
};

const MetricColumn kColumns[] = {
    {"accu.", "accuracy", nullptr},
    {"pos. p", "pos_precision", &learn::Metrics::pos_precision},
    {"pos. r", "pos_recall", &learn::Metrics::pos_recall},
    {"neg. p", "neg_precision", &learn::Metrics::neg_precision},
    {"neg. r", "neg_recall", &learn::Metrics::neg_recall},
};

std::optional<double> metric_value(const learn::Metrics& m, const MetricColumn& c) {
  if (!c.field) return m.accuracy;
  return m.*(c.field);
}

// Per-fold pairs where both runs define the metric.
std::pair<std::vector<double>, std::vector<double>> fold_pairs(const learn::EvalReport& a,
                                                               const learn::EvalReport& b,
                                                               const MetricColumn& c) {
  std::vector<double> xa, xb;
  for (std::size_t i = 0; i < std::min(a.folds.size(), b.folds.size()); ++i) {
    auto va = metric_value(a.folds[i].metrics, c), vb = metric_value(b.folds[i].metrics, c);
    if (va && vb) {
      xa.push_back(*va);
      xb.push_back(*vb);
    }
  }
  return {xa, xb};
}

struct Improvement {
  std::optional<double> pct;
  std::optional<stats::TTestResult> test;
};

Improvement improvement(const learn::EvalReport& run, const learn::EvalReport& base,
                        const MetricColumn& c) {
  Improvement out;
  auto v = metric_value(run.aggregate, c), b = metric_value(base.aggregate, c);
  if (v && b && *b != 0) out.pct = (*v - *b) / *b * 100.0;
  auto [xa, xb] = fold_pairs(run, base, c);
  if (xa.size() >= 2) out.test = stats::paired_t_one_tailed(xa, xb);
  return out;
}

std::string fixed(std::optional<double> v, int digits = 4) {
  if (!v) return "-";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
  return buf;
}

json opt_json(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

json metrics_json(const learn::Metrics& m) {
  json j;
  for (const auto& c : kColumns) j[c.key] = opt_json(metric_value(m, c));
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  return j;
}

const std::pair<const char*, const learn::EvalReport Comparison::*> kRuns[] = {
    {"baseline", &Comparison::baseline},
    {"+FMNS", &Comparison::fmns},
    {"+FM", &Comparison::fm},
};

}  // namespace

void print_table(std::ostream& out, const Comparison& c, double alpha) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s", "run");
  out << buf;
  for (const auto& col : kColumns) {
    std::snprintf(buf, sizeof buf, "  %-8s %-10s", col.title, "impr.");
    out << buf;
  }
  out << '\n';
  for (const auto& [name, member] : kRuns) {
    const auto& run = c.*member;
    std::snprintf(buf, sizeof buf, "%-10s", name);
    out << buf;
    for (const auto& col : kColumns) {
      std::string impr = "-";
      if (member != &Comparison::baseline) {
        const auto im = improvement(run, c.baseline, col);
        if (im.pct) {
          std::snprintf(buf, sizeof buf, "%+.2f%%", *im.pct);
          impr = buf;
          if (im.test && im.test->p < alpha) impr += "†";
        }
      }
      // pad by characters, the dagger is three bytes
      std::size_t width = 0;
      for (unsigned char ch : impr) width += (ch & 0xC0) != 0x80;
      impr.append(width < 10 ? 10 - width : 0, ' ');
      std::snprintf(buf, sizeof buf, "  %-8s %s", fixed(metric_value(run.aggregate, col)).c_str(),
                    impr.c_str());
      out << buf;
    }
    out << '\n';
  }
  out << "impr.: relative to baseline; † paired one-tailed t-test over folds, p < " << alpha
      << '\n';
}

void write_records(std::ostream& out, const Comparison& c, const learn::EvalConfig& cfg) {
  json head;
  head["type"] = "config";
  head["k"] = cfg.k;
  head["seed"] = cfg.seed;
  head["alpha"] = cfg.alpha;
  head["fit_scope"] = cfg.fit_scope == learn::FitScope::Fold ? "fold" : "global";
  out << head.dump() << '\n';
  for (const auto& [name, member] : kRuns) {
    const auto& run = c.*member;
    for (std::size_t i = 0; i < run.folds.size(); ++i) {
      const auto& f = run.folds[i];
      json j;
      j["type"] = "fold";
      j["run"] = name;
      j["fold"] = i;
      j["train"] = f.train_size;
      j["test"] = f.test_size;
      json groups = json::array();
      for (auto g : f.modulated_groups) groups.push_back(std::string(to_string(g)));
      j["groups"] = groups;
      j["metrics"] = metrics_json(f.metrics);
      out << j.dump() << '\n';
    }
    json agg;
    agg["type"] = "aggregate";
    agg["run"] = name;
    agg["metrics"] = metrics_json(run.aggregate);
    out << agg.dump() << '\n';
  }
  for (const auto& [name, member] : kRuns) {
    if (member == &Comparison::baseline) continue;
    for (const auto& col : kColumns) {
      const auto im = improvement(c.*member, c.baseline, col);
      json j;
      j["type"] = "ttest";
      j["run"] = name;
      j["against"] = "baseline";
      j["metric"] = col.key;
      j["improvement_pct"] = opt_json(im.pct);
      j["t"] = im.test ? json(im.test->t) : json(nullptr);
      j["df"] = im.test ? json(im.test->df) : json(nullptr);
      j["p"] = im.test ? json(im.test->p) : json(nullptr);
      out << j.dump() << '\n';
    }
  }
}

namespace {

struct Options {
  std::string in, out, taxonomy, popularity, truth, params, fm = "fm", fit_scope = "fold";
  std::uint64_t seed = 1;
  std::size_t n = 2000;
  int k = 10, bins = 20, epochs = 2000;
  double alpha = 0.05, gap_minutes = 30, sat_threshold = 30, lr = 0.1, l2 = 1e-4;
  double paratelic_prior = -1, topic_fidelity = -1;
  unsigned jobs = 1;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open '" + path + "' for reading");
  return f;
}

std::ofstream open_out(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "' for writing");
  return f;
}

Taxonomy taxonomy_from(const Options& o) {
  return o.taxonomy.empty() ? Taxonomy::builtin() : Taxonomy::load(o.taxonomy);
}

PipelineConfig pipeline_from(const Options& o) {
  if (!(o.gap_minutes > 0)) throw UsageError("--gap-minutes must be positive");
  if (!(o.sat_threshold >= 0)) throw UsageError("--sat-threshold must be non-negative");
  PipelineConfig p;
  p.segment.gap_minutes = o.gap_minutes;
  p.extract.sat_threshold_s = o.sat_threshold;
  p.jobs = std::max(1u, o.jobs);
  return p;
}

std::vector<FeatureRow> read_rows(const std::string& path) {
  auto f = open_in(path);
  return features::read_csv(f);
}

learn::FmMode fm_from(const Options& o) {
  try {
    return learn::parse_fm_mode(o.fm);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

std::set<FeatureGroup> groups_for(learn::FmMode mode, const std::vector<FeatureRow>& rows,
                                  double alpha) {
  if (mode == learn::FmMode::Off) return {};
  if (mode == learn::FmMode::Fmns) return {kAllGroups.begin(), kAllGroups.end()};
  return stats::select_means_ends_groups(rows, alpha).selected;
}

void print_group_report(std::ostream& out, const stats::GroupTestReport& r, const char* first,
                        const char* second) {
  out << first << " n=" << r.n_first << ", " << second << " n=" << r.n_second << '\n';
  if (r.manova) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", r.manova->wilks_lambda);
    out << "MANOVA: Wilks lambda=" << buf << ", " << stats::format(*r.manova) << '\n';
  } else if (r.anovas.size() > 1) {
    out << "MANOVA: singular within-group scatter, not computed\n";
  }
  for (const auto& [g, a] : r.anovas) out << to_string(g) << ": " << stats::format(a) << '\n';
}

json group_report_json(const stats::GroupTestReport& r) {
  json j;
  j["n_first"] = r.n_first;
  j["n_second"] = r.n_second;
  if (r.manova) {
    j["manova"] = {{"wilks_lambda", r.manova->wilks_lambda},
                   {"f", r.manova->f},
                   {"df1", r.manova->df1},
                   {"df2", r.manova->df2},
                   {"p", r.manova->p}};
  } else {
    j["manova"] = nullptr;
  }
  json an = json::object();
  for (const auto& [g, a] : r.anovas) {
    an[std::string(to_string(g))] = {{"f", a.f}, {"df1", a.df1}, {"df2", a.df2}, {"p", a.p}};
  }
  j["anovas"] = an;
  return j;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw UsageError("simulate needs --out <dir>");
  auto tax = taxonomy_from(o);
  auto cfg = synth::SimConfig::defaults();
  cfg.n_sessions = o.n;
  cfg.seed = o.seed;
  if (o.paratelic_prior >= 0) cfg.paratelic_prior = o.paratelic_prior;
  if (o.topic_fidelity >= 0) cfg.topic_fidelity = o.topic_fidelity;
  const auto sim = synth::generate_sessions(cfg, tax);
  synth::PopularityConfig pc;
  pc.seed = o.seed;
  features::ExtractConfig ec;
  ec.sat_threshold_s = o.sat_threshold;
  const auto pop = synth::generate_popularity(pc, tax, sim.sessions, ec);
  const fs::path dir(o.out);
  {
    auto f = open_out((dir / "log.jsonl").string());
    synth::write_log(f, sim.sessions);
  }
  {
    auto f = open_out((dir / "truth.tsv").string());
    synth::write_truth(f, sim.truth);
  }
  {
    auto f = open_out((dir / "popularity.tsv").string());
    synth::write_popularity(f, pop);
  }
  std::size_t struggles = 0, para = 0;
  for (const auto& t : sim.truth) {
    struggles += t.label == Label::Struggle;
    para += t.state == State::Paratelic;
  }
  out << "sessions " << sim.truth.size() << ", struggle " << struggles << ", paratelic " << para
      << '\n';
  return 0;
}

int cmd_ingest(const Options& o, std::ostream& out) {
  if (o.in.empty() || o.out.empty()) throw UsageError("ingest needs --in and --out");
  auto tax = taxonomy_from(o);
  const auto pc = pipeline_from(o);
  auto f = open_in(o.in);
  auto parsed = ingest::parse_log(f);
  auto sessions = ingest::segment_sessions(std::move(parsed.events), pc.segment);
  assign_topics_and_states(sessions, tax);
  if (!o.truth.empty()) {
    auto tf = open_in(o.truth);
    const auto truth = synth::read_truth(tf);
    for (auto& s : sessions) {
      auto it = truth.find(s.session_id);
      if (it != truth.end()) s.label = it->second.label;
    }
  }
  auto of = open_out(o.out);
  ingest::write_sessions(of, sessions);
  out << "sessions " << sessions.size() << ", skipped lines " << parsed.skipped << '\n';
  return 0;
}

int cmd_extract(const Options& o, std::ostream& out) {
  if (o.in.empty() || o.out.empty()) throw UsageError("extract needs --in and --out");
  auto tax = taxonomy_from(o);
  const auto pc = pipeline_from(o);
  PopularityTable pop;
  if (!o.popularity.empty()) {
    auto pf = open_in(o.popularity);
    pop = synth::read_popularity(pf);
  }
  auto f = open_in(o.in);
  const auto sessions = ingest::read_sessions(f);
  const auto rows = features::extract_all(sessions, pop, tax, pc.extract, pc.jobs);
  auto of = open_out(o.out);
  features::write_csv(of, rows);
  out << "rows " << rows.size() << '\n';
  return 0;
}

int cmd_rules_test(const Options& o, std::ostream& out) {
  if (o.in.empty()) throw UsageError("rules-test needs --in");
  auto rows = read_rows(o.in);
  stats::normalize_rows(rows);
  const auto r = stats::rules_relevance_test(rows);
  print_group_report(out, r, "conformist", "negativistic");
  if (!o.out.empty()) {
    auto of = open_out(o.out);
    json j = group_report_json(r);
    j["type"] = "rules-test";
    of << j.dump() << '\n';
  }
  return 0;
}

int cmd_select(const Options& o, std::ostream& out) {
  if (o.in.empty()) throw UsageError("select needs --in");
  auto rows = read_rows(o.in);
  stats::normalize_rows(rows);
  const auto r = stats::select_means_ends_groups(rows, o.alpha);
  print_group_report(out, r.tests, "telic", "paratelic");
  out << "selected:";
  for (auto g : r.selected) out << ' ' << to_string(g);
  out << '\n';
  if (!o.out.empty()) {
    auto of = open_out(o.out);
    json j = group_report_json(r.tests);
    j["type"] = "select";
    json sel = json::array();
    for (auto g : r.selected) sel.push_back(std::string(to_string(g)));
    j["selected"] = sel;
    of << j.dump() << '\n';
  }
  return 0;
}

int cmd_modulate(const Options& o, std::ostream& out) {
  if (o.in.empty() || o.out.empty()) throw UsageError("modulate needs --in and --out");
  const auto mode = fm_from(o);
  auto rows = read_rows(o.in);
  stats::normalize_rows(rows);
  const auto params = modulation::fit(rows, groups_for(mode, rows, o.alpha));
  modulation::apply_all(rows, params);
  auto of = open_out(o.out);
  features::write_csv(of, rows);
  if (!o.params.empty()) {
    auto pf = open_out(o.params);
    modulation::write_params(pf, params);
  }
  out << "modulated groups:";
  for (auto g : params.selected_groups) out << ' ' << to_string(g);
  out << '\n';
  return 0;
}

learn::LogisticHyper hyper_from(const Options& o) {
  learn::LogisticHyper h;
  h.lr = o.lr;
  h.epochs = o.epochs;
  h.l2 = o.l2;
  h.seed = o.seed;
  if (!(h.lr > 0) || h.epochs < 0 || !(h.l2 >= 0)) throw UsageError("invalid --lr/--epochs/--l2");
  return h;
}

int cmd_train(const Options& o, std::ostream& out) {
  if (o.in.empty() || o.out.empty()) throw UsageError("train needs --in and --out");
  const auto mode = fm_from(o);
  auto rows = read_rows(o.in);
  std::erase_if(rows, [](const FeatureRow& r) { return r.label == Label::Unlabeled; });
  if (rows.empty()) throw DataError("no labeled rows to train on");
  stats::normalize_rows(rows);
  if (mode != learn::FmMode::Off) {
    const auto params = modulation::fit(rows, groups_for(mode, rows, o.alpha));
    modulation::apply_all(rows, params);
    if (!o.params.empty()) {
      auto pf = open_out(o.params);
      modulation::write_params(pf, params);
    }
  }
  std::set<std::string> topics;
  for (const auto& r : rows) {
    if (!r.fv.topic.empty()) topics.insert(r.fv.topic);
  }
  const learn::Encoder enc({topics.begin(), topics.end()});
  std::vector<Label> labels;
  for (const auto& r : rows) labels.push_back(r.label);
  auto model = learn::train_logistic(enc.encode(rows), labels, hyper_from(o));
  model.topics = enc.topics();
  auto of = open_out(o.out);
  learn::write_model(of, model);
  out << "trained on " << rows.size() << " rows\n";
  return 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
  if (o.in.empty()) throw UsageError("eval needs --in <simulate dir | features.csv>");
  std::vector<FeatureRow> rows;
  std::string records = o.out;
  if (fs::is_directory(o.in)) {
    const fs::path dir(o.in);
    auto tax = taxonomy_from(o);
    const auto pc = pipeline_from(o);
    auto tf = open_in((dir / "truth.tsv").string());
    const auto truth = synth::read_truth(tf);
    auto pf = open_in(o.popularity.empty() ? (dir / "popularity.tsv").string() : o.popularity);
    const auto pop = synth::read_popularity(pf);
    auto lf = open_in((dir / "log.jsonl").string());
    rows = rows_from_log(lf, truth, pop, tax, pc);
    if (records.empty()) records = (dir / "eval.jsonl").string();
  } else {
    rows = read_rows(o.in);
  }
  const auto before = rows.size();
  std::erase_if(rows, [](const FeatureRow& r) { return r.label == Label::Unlabeled; });
  if (rows.size() != before) {
    out << "dropped " << before - rows.size() << " unlabeled sessions\n";
  }
  learn::EvalConfig cfg;
  cfg.k = o.k;
  cfg.seed = o.seed;
  cfg.alpha = o.alpha;
  try {
    cfg.fit_scope = learn::parse_fit_scope(o.fit_scope);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  cfg.hyper = hyper_from(o);
  cfg.jobs = std::max(1u, o.jobs);
  if (cfg.k < 2) throw UsageError("--k must be at least 2");
  const auto c = compare(rows, cfg);
  out << "sessions " << rows.size() << ", " << cfg.k << "-fold\n";
  print_table(out, c, cfg.alpha);
  if (!records.empty()) {
    auto of = open_out(records);
    write_records(of, c, cfg);
  }
  return 0;
}

int cmd_report(const Options& o, std::ostream& out) {
  if (o.in.empty() || o.out.empty()) throw UsageError("report needs --in and --out");
  if (o.bins < 1) throw UsageError("--bins must be positive");
  const auto mode = fm_from(o);
  auto rows = read_rows(o.in);
  stats::normalize_rows(rows);
  const auto params = modulation::fit(rows, groups_for(mode, rows, o.alpha));
  auto after = rows;
  modulation::apply_all(after, params);
  auto of = open_out(o.out);
  of << "feature\tphase\tstate\tbin_lo\tbin_hi\tcount\n";
  for (const auto& [f, m] : params.moments) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto* set : {&rows, &after}) {
      for (const auto& r : *set) {
        lo = std::min(lo, r.fv.values[f]);
        hi = std::max(hi, r.fv.values[f]);
      }
    }
    if (!(hi > lo)) hi = lo + 1;
    const double w = (hi - lo) / o.bins;
    for (const auto& [phase, set] : {std::pair{"before", &rows}, std::pair{"after", &after}}) {
      for (State st : {State::Telic, State::Paratelic}) {
        std::vector<std::size_t> counts(static_cast<std::size_t>(o.bins));
        for (const auto& r : *set) {
          if (r.state != st) continue;
          auto b = static_cast<long>(std::floor((r.fv.values[f] - lo) / w));
          b = std::clamp<long>(b, 0, o.bins - 1);
          ++counts[static_cast<std::size_t>(b)];
        }
        for (int b = 0; b < o.bins; ++b) {
          char buf[96];
          std::snprintf(buf, sizeof buf, "%.6g\t%.6g", lo + b * w, lo + (b + 1) * w);
          of << feature_dictionary()[f].name << '\t' << phase << '\t' << to_string(st) << '\t'
             << buf << '\t' << counts[static_cast<std::size_t>(b)] << '\n';
        }
      }
    }
  }
  out << "histograms for " << params.moments.size() << " features\n";
  return 0;
}

// Turns key=value lines of a config file into "--key=value" arguments placed
// before the command line ones so later flags win.
std::vector<std::string> config_args(const std::string& path, const CLI::App& sub) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config file '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const auto key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "config") throw UsageError("config files cannot include other config files");
    if (!sub.get_option_no_throw("--" + key)) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "' for " +
                       sub.get_name());
    }
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Struggle detection pipeline for search sessions.", "struggle"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1, 1);
  std::string config;

  auto add_common = [&](CLI::App* s) {
    s->add_option("--seed", o.seed, "random seed");
    s->add_option("--jobs", o.jobs, "worker threads");
    s->add_option("--config", config, "key=value file; flags override it");
  };
  auto add_pipeline = [&](CLI::App* s) {
    s->add_option("--taxonomy", o.taxonomy, "taxonomy file (default: built-in)");
    s->add_option("--gap-minutes", o.gap_minutes, "session inactivity gap");
    s->add_option("--sat-threshold", o.sat_threshold, "SAT click dwell seconds");
  };
  auto add_fm = [&](CLI::App* s) {
    s->add_option("--fm", o.fm, "off | fmns | fm");
    s->add_option("--alpha", o.alpha, "selection significance level");
  };

  auto* sim = app.add_subcommand("simulate", "generate a labeled synthetic log");
  add_common(sim);
  sim->add_option("--n", o.n, "number of sessions");
  sim->add_option("--out", o.out, "output directory");
  sim->add_option("--taxonomy", o.taxonomy, "taxonomy file (default: built-in)");
  sim->add_option("--sat-threshold", o.sat_threshold, "SAT click dwell seconds");
  sim->add_option("--paratelic-prior", o.paratelic_prior, "share of paratelic sessions");
  sim->add_option("--topic-fidelity", o.topic_fidelity, "P(topic from own state's pool)");

  auto* ing = app.add_subcommand("ingest", "segment a raw log into sessions");
  add_common(ing);
  add_pipeline(ing);
  ing->add_option("--in", o.in, "log file");
  ing->add_option("--out", o.out, "sessions file");
  ing->add_option("--truth", o.truth, "truth file with labels");

  auto* ext = app.add_subcommand("extract", "compute the feature matrix");
  add_common(ext);
  add_pipeline(ext);
  ext->add_option("--in", o.in, "sessions file");
  ext->add_option("--out", o.out, "features CSV");
  ext->add_option("--popularity", o.popularity, "popularity table");

  auto* rt = app.add_subcommand("rules-test", "conformist vs negativistic group tests");
  add_common(rt);
  rt->add_option("--in", o.in, "features CSV");
  rt->add_option("--out", o.out, "JSON record output");

  auto* sel = app.add_subcommand("select", "telic vs paratelic group selection");
  add_common(sel);
  sel->add_option("--in", o.in, "features CSV");
  sel->add_option("--out", o.out, "JSON record output");
  sel->add_option("--alpha", o.alpha, "significance level");

  auto* mod = app.add_subcommand("modulate", "normalize and modulate a feature matrix");
  add_common(mod);
  add_fm(mod);
  mod->add_option("--in", o.in, "features CSV");
  mod->add_option("--out", o.out, "modulated CSV");
  mod->add_option("--params", o.params, "write fitted parameters here");

  auto* tr = app.add_subcommand("train", "fit a logistic model on all rows");
  add_common(tr);
  add_fm(tr);
  tr->add_option("--in", o.in, "features CSV");
  tr->add_option("--out", o.out, "model file");
  tr->add_option("--params", o.params, "write modulation parameters here");
  tr->add_option("--lr", o.lr, "learning rate");
  tr->add_option("--epochs", o.epochs, "gradient steps");
  tr->add_option("--l2", o.l2, "L2 penalty");

  auto* ev = app.add_subcommand("eval", "baseline / +FMNS / +FM cross-validation");
  add_common(ev);
  add_pipeline(ev);
  ev->add_option("--in", o.in, "simulate output directory or features CSV");
  ev->add_option("--out", o.out, "JSON records (default <dir>/eval.jsonl)");
  ev->add_option("--popularity", o.popularity, "popularity table override");
  ev->add_option("--k", o.k, "folds");
  ev->add_option("--alpha", o.alpha, "significance level");
  ev->add_option("--fit-scope", o.fit_scope, "fold | global");
  ev->add_option("--lr", o.lr, "learning rate");
  ev->add_option("--epochs", o.epochs, "gradient steps");
  ev->add_option("--l2", o.l2, "L2 penalty");

  auto* rep = app.add_subcommand("report", "histograms before and after modulation");
  add_common(rep);
  add_fm(rep);
  rep->add_option("--in", o.in, "features CSV");
  rep->add_option("--out", o.out, "histogram TSV");
  rep->add_option("--bins", o.bins, "bins per histogram");

  if (argc <= 1) {
    err << app.help();
    return 1;
  }

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    CLI::App* chosen = nullptr;
    for (auto* s : app.get_subcommands({})) {
      if (s->get_name() == args[0]) chosen = s;
    }
    std::string cfg_path;
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) cfg_path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) cfg_path = args[i].substr(9);
    }
    if (chosen && !cfg_path.empty()) {
      auto extra = config_args(cfg_path, *chosen);
      args.insert(args.begin() + 1, extra.begin(), extra.end());
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(o, out);
    if (ing->parsed()) return cmd_ingest(o, out);
    if (ext->parsed()) return cmd_extract(o, out);
    if (rt->parsed()) return cmd_rules_test(o, out);
    if (sel->parsed()) return cmd_select(o, out);
    if (mod->parsed()) return cmd_modulate(o, out);
    if (tr->parsed()) return cmd_train(o, out);
    if (ev->parsed()) return cmd_eval(o, out);
    if (rep->parsed()) return cmd_report(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace struggle::cli
