#include "struggle/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "struggle/stats.hpp"

namespace struggle::learn {

Encoder::Encoder(std::vector<std::string> topics) : topics_(std::move(topics)) {
  std::sort(topics_.begin(), topics_.end());
  topics_.erase(std::unique(topics_.begin(), topics_.end()), topics_.end());
  topics_.erase(std::remove(topics_.begin(), topics_.end(), std::string{}), topics_.end());
}

std::vector<double> Encoder::encode(const FeatureVector& fv) const {
  std::vector<double> out(dimension(), 0.0);
  std::copy(fv.values.begin(), fv.values.end(), out.begin());
  auto it = std::lower_bound(topics_.begin(), topics_.end(), fv.topic);
  if (!fv.topic.empty() && it != topics_.end() && *it == fv.topic) {
    out[feature_count() + static_cast<std::size_t>(it - topics_.begin())] = 1.0;
  }
  return out;
}

Design Encoder::encode(const std::vector<features::FeatureRow>& rows) const {
  Design d;
  d.reserve(rows.size());
  for (const auto& r : rows) d.push_back(encode(r.fv));
  return d;
}

ClassifierModel train_zero_rule(std::span<const Label> labels) {
  if (labels.empty()) throw DataError("zero-rule needs at least one label");
  const auto pos = std::count(labels.begin(), labels.end(), Label::Struggle);
  const auto neg = std::count(labels.begin(), labels.end(), Label::NonStruggle);
  ClassifierModel m;
  m.kind = ModelKind::ZeroRule;
  m.majority = pos > neg ? Label::Struggle : Label::NonStruggle;
  return m;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

std::vector<double> to_targets(std::span<const Label> labels) {
  std::vector<double> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == Label::Struggle ? 1.0 : 0.0;
  return y;
}

void check_design(const Design& x, std::size_t n) {
  if (x.size() != n) throw DataError("design matrix and labels differ in length");
  for (const auto& row : x) {
    if (row.size() != x.front().size()) throw DataError("ragged design matrix");
    for (double v : row) {
      if (!std::isfinite(v)) throw DataError("non-finite value in design matrix");
    }
  }
}

}  // namespace

double logistic_loss(const Design& x, std::span<const double> y, std::span<const double> w,
                     double b, double l2) {
  double loss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = dot(x[i], w) + b;
    loss += softplus(z) - y[i] * z;
  }
  loss /= static_cast<double>(x.size());
  return loss + 0.5 * l2 * dot(w, w);
}

std::vector<double> logistic_gradient(const Design& x, std::span<const double> y,
                                      std::span<const double> w, double b, double l2) {
  std::vector<double> g(w.size() + 1, 0.0);
  const double inv_n = 1.0 / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = sigmoid(dot(x[i], w) + b) - y[i];
    const auto& row = x[i];
    for (std::size_t j = 0; j < w.size(); ++j) g[j] += r * row[j];
    g.back() += r;
  }
  for (std::size_t j = 0; j < w.size(); ++j) g[j] = g[j] * inv_n + l2 * w[j];
  g.back() *= inv_n;
  return g;
}

ClassifierModel train_logistic(const Design& x, std::span<const Label> labels,
                               const LogisticHyper& hyper, std::vector<double>* loss_trace) {
  check_design(x, labels.size());
  const auto y = to_targets(labels);
  const auto pos = std::count(y.begin(), y.end(), 1.0);
  if (pos == 0 || pos == static_cast<long>(y.size())) {
    throw DataError("logistic regression needs both classes in the training set");
  }
  const std::size_t d = x.front().size();
  ClassifierModel m;
  m.kind = ModelKind::Logistic;
  m.weights.resize(d);
  std::mt19937_64 rng(hyper.seed);
  for (auto& w : m.weights) {
    // Uniform in [-0.005, 0.005) straight from the raw generator output.
    w = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 0.01;
  }
  m.bias = 0;

  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd xm(n, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) xm(i, static_cast<Eigen::Index>(j)) = x[static_cast<std::size_t>(i)][j];
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  Eigen::Map<Eigen::VectorXd> w(m.weights.data(), static_cast<Eigen::Index>(d));
  Eigen::VectorXd z(n), r(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    z.noalias() = xm * w;
    z.array() += m.bias;
    double loss = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      r[i] = sigmoid(z[i]) - yv[i];
      if (loss_trace) loss += softplus(z[i]) - yv[i] * z[i];
    }
    if (loss_trace) loss_trace->push_back(loss * inv_n + 0.5 * hyper.l2 * w.squaredNorm());
    const double gb = r.sum();
    w -= hyper.lr * (inv_n * (xm.transpose() * r) + hyper.l2 * w);
    m.bias -= hyper.lr * gb * inv_n;
  }
  if (loss_trace) loss_trace->push_back(logistic_loss(x, y, m.weights, m.bias, hyper.l2));
  return m;
}

Prediction predict(const ClassifierModel& m, std::span<const double> encoded) {
  if (m.kind == ModelKind::ZeroRule) {
    return {m.majority == Label::Struggle ? 1.0 : 0.0, m.majority};
  }
  if (encoded.size() != m.weights.size()) {
    throw DataError("encoded width " + std::to_string(encoded.size()) + " does not match model width " +
                    std::to_string(m.weights.size()));
  }
  const double p = sigmoid(dot(encoded, m.weights) + m.bias);
  return {p, p > 0.5 ? Label::Struggle : Label::NonStruggle};
}

void write_model(std::ostream& out, const ClassifierModel& m) {
  char buf[40];
  auto g17 = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "kind\t" << (m.kind == ModelKind::ZeroRule ? "zero-rule" : "logistic") << '\n';
  out << "majority\t" << to_string(m.majority) << '\n';
  out << "bias\t" << g17(m.bias) << '\n';
  out << "topics";
  for (const auto& t : m.topics) out << '\t' << t;
  out << '\n';
  for (std::size_t j = 0; j < m.weights.size(); ++j) {
    const std::string name = j < feature_count() ? std::string(feature_dictionary()[j].name)
                                                 : "topic=" + m.topics.at(j - feature_count());
    out << "w\t" << name << '\t' << g17(m.weights[j]) << '\n';
  }
}

ClassifierModel read_model(std::istream& in) {
  if (!in) throw DataError("model stream is not readable");
  ClassifierModel m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, '\t')) cells.push_back(tok);
    const auto& key = cells.front();
    if (key == "kind" && cells.size() == 2) {
      if (cells[1] == "zero-rule") m.kind = ModelKind::ZeroRule;
      else if (cells[1] == "logistic") m.kind = ModelKind::Logistic;
      else throw FormatError("unknown model kind " + cells[1]);
    } else if (key == "majority" && cells.size() == 2) {
      m.majority = parse_label(cells[1]);
    } else if (key == "bias" && cells.size() == 2) {
      m.bias = std::stod(cells[1]);
    } else if (key == "topics") {
      m.topics.assign(cells.begin() + 1, cells.end());
    } else if (key == "w" && cells.size() == 3) {
      m.weights.push_back(std::stod(cells[2]));
    } else {
      throw FormatError("unrecognized model line: " + line);
    }
  }
  if (m.kind == ModelKind::Logistic && m.weights.size() != feature_count() + m.topics.size()) {
    throw FormatError("model weight count does not match its encoding");
  }
  return m;
}

Metrics metrics(std::span<const Label> predicted, std::span<const Label> actual) {
  if (predicted.size() != actual.size() || actual.empty()) {
    throw DataError("metrics need equal-length, non-empty prediction and label lists");
  }
  Metrics m;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const bool p = predicted[i] == Label::Struggle, a = actual[i] == Label::Struggle;
    if (p && a) ++m.tp;
    else if (p && !a) ++m.fp;
    else if (!p && a) ++m.fn;
    else ++m.tn;
  }
  auto frac = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(actual.size());
  m.pos_precision = frac(m.tp, m.tp + m.fp);
  m.pos_recall = frac(m.tp, m.tp + m.fn);
  m.neg_precision = frac(m.tn, m.tn + m.fn);
  m.neg_recall = frac(m.tn, m.tn + m.fp);
  return m;
}

std::string_view to_string(FmMode m) {
  switch (m) {
    case FmMode::Off: return "off";
    case FmMode::Fmns: return "fmns";
    case FmMode::Fm: return "fm";
  }
  return "?";
}

FmMode parse_fm_mode(std::string_view s) {
  if (s == "off") return FmMode::Off;
  if (s == "fmns") return FmMode::Fmns;
  if (s == "fm") return FmMode::Fm;
  throw UsageError("--fm must be off, fmns or fm");
}

FitScope parse_fit_scope(std::string_view s) {
  if (s == "fold") return FitScope::Fold;
  if (s == "global") return FitScope::Global;
  throw UsageError("--fit-scope must be fold or global");
}

std::vector<int> stratified_folds(std::span<const Label> labels, int k, std::uint64_t seed) {
  if (k < 2) throw DataError("k-fold evaluation needs k >= 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::Struggle) pos.push_back(i);
    else if (labels[i] == Label::NonStruggle) neg.push_back(i);
    else throw DataError("k-fold evaluation needs every session labeled");
  }
  if (pos.size() < static_cast<std::size_t>(k) || neg.size() < static_cast<std::size_t>(k)) {
    throw DataError("stratified split: each class needs at least k=" + std::to_string(k) +
                    " sessions (have " + std::to_string(pos.size()) + " struggle, " +
                    std::to_string(neg.size()) + " non-struggle)");
  }
  std::mt19937_64 rng(seed);
  auto shuffle = [&](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
  };
  shuffle(pos);
  shuffle(neg);
  std::vector<int> fold(labels.size(), -1);
  // Negatives continue the deal where positives stopped so fold sizes stay even.
  std::size_t deal = 0;
  for (auto i : pos) fold[i] = static_cast<int>(deal++ % static_cast<std::size_t>(k));
  for (auto i : neg) fold[i] = static_cast<int>(deal++ % static_cast<std::size_t>(k));
  return fold;
}

namespace {

std::set<FeatureGroup> modulated_groups(const std::vector<features::FeatureRow>& train,
                                        const EvalConfig& cfg) {
  switch (cfg.mode) {
    case FmMode::Off: return {};
    case FmMode::Fmns: return {kAllGroups.begin(), kAllGroups.end()};
    case FmMode::Fm: return stats::select_means_ends_groups(train, cfg.alpha).selected;
  }
  return {};
}

FoldResult run_fold(const std::vector<features::FeatureRow>& rows, const std::vector<int>& fold,
                    int f, const EvalConfig& cfg, const Encoder& enc) {
  std::vector<features::FeatureRow> train, test, all;
  for (std::size_t i = 0; i < rows.size(); ++i) (fold[i] == f ? test : train).push_back(rows[i]);

  // Normalization bounds (and, with global scope, every fitted statistic) come
  // from the training fold only unless global fitting was requested.
  const bool global = cfg.fit_scope == FitScope::Global;
  stats::MinMaxScaler scaler;
  {
    stats::Matrix m;
    for (const auto& r : global ? rows : train) m.push_back(r.fv.values);
    scaler.fit(m);
  }
  auto normalize = [&](std::vector<features::FeatureRow>& v) {
    for (auto& r : v) r.fv.values = scaler.transform(r.fv.values);
  };
  normalize(train);
  normalize(test);

  FoldResult res;
  res.train_size = train.size();
  res.test_size = test.size();
  if (cfg.mode != FmMode::Off) {
    std::vector<features::FeatureRow> fit_rows = train;
    if (global) {
      fit_rows.insert(fit_rows.end(), test.begin(), test.end());
    }
    res.modulated_groups = modulated_groups(fit_rows, cfg);
    if (!res.modulated_groups.empty()) {
      const auto params = modulation::fit(fit_rows, res.modulated_groups);
      modulation::apply_all(train, params);
      modulation::apply_all(test, params);
    }
  }

  std::vector<Label> ytrain, ytest, pred;
  for (const auto& r : train) ytrain.push_back(r.label);
  for (const auto& r : test) ytest.push_back(r.label);
  ClassifierModel model;
  if (cfg.model == ModelKind::ZeroRule) {
    model = train_zero_rule(ytrain);
  } else {
    LogisticHyper h = cfg.hyper;
    h.seed = cfg.hyper.seed + static_cast<std::uint64_t>(f);
    model = train_logistic(enc.encode(train), ytrain, h);
    model.topics = enc.topics();
  }
  for (const auto& r : test) pred.push_back(predict(model, enc.encode(r.fv)).label);
  res.metrics = metrics(pred, ytest);
  return res;
}

std::optional<double> mean_defined(const std::vector<FoldResult>& folds,
                                   std::optional<double> Metrics::*field) {
  double s = 0;
  std::size_t n = 0;
  for (const auto& f : folds) {
    if (const auto& v = f.metrics.*field) {
      s += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return s / static_cast<double>(n);
}

}  // namespace

EvalReport kfold_eval(const std::vector<features::FeatureRow>& rows, const EvalConfig& cfg) {
  std::vector<Label> labels;
  for (const auto& r : rows) labels.push_back(r.label);
  const auto fold = stratified_folds(labels, cfg.k, cfg.seed);

  std::vector<std::string> topics = cfg.topics;
  if (topics.empty()) {
    for (const auto& r : rows) topics.push_back(r.fv.topic);
  }
  const Encoder enc(std::move(topics));

  EvalReport rep;
  rep.folds.resize(static_cast<std::size_t>(cfg.k));
  const unsigned jobs = std::clamp(cfg.jobs, 1u, static_cast<unsigned>(cfg.k));
  if (jobs == 1) {
    for (int f = 0; f < cfg.k; ++f) rep.folds[static_cast<std::size_t>(f)] = run_fold(rows, fold, f, cfg, enc);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.k));
    {
      std::vector<std::jthread> pool;
      for (unsigned j = 0; j < jobs; ++j) {
        pool.emplace_back([&, j] {
          for (int f = static_cast<int>(j); f < cfg.k; f += static_cast<int>(jobs)) {
            try {
              rep.folds[static_cast<std::size_t>(f)] = run_fold(rows, fold, f, cfg, enc);
            } catch (...) {
              errors[static_cast<std::size_t>(f)] = std::current_exception();
            }
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  double acc = 0;
  for (const auto& f : rep.folds) acc += f.metrics.accuracy;
  rep.aggregate.accuracy = acc / static_cast<double>(rep.folds.size());
  rep.aggregate.pos_precision = mean_defined(rep.folds, &Metrics::pos_precision);
  rep.aggregate.pos_recall = mean_defined(rep.folds, &Metrics::pos_recall);
  rep.aggregate.neg_precision = mean_defined(rep.folds, &Metrics::neg_precision);
  rep.aggregate.neg_recall = mean_defined(rep.folds, &Metrics::neg_recall);
  for (const auto& f : rep.folds) {
    rep.aggregate.tp += f.metrics.tp;
    rep.aggregate.fp += f.metrics.fp;
    rep.aggregate.tn += f.metrics.tn;
    rep.aggregate.fn += f.metrics.fn;
  }
  return rep;
}

std::vector<double> fold_values(const EvalReport& r, std::optional<double> Metrics::*field) {
  std::vector<double> out;
  for (const auto& f : r.folds) {
    if (const auto& v = f.metrics.*field) out.push_back(*v);
  }
  return out;
}

std::vector<double> fold_accuracy(const EvalReport& r) {
  std::vector<double> out;
  for (const auto& f : r.folds) out.push_back(f.metrics.accuracy);
  return out;
}

}  // namespace struggle::learn
