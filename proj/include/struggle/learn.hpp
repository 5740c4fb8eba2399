#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "struggle/features.hpp"
#include "struggle/model.hpp"
#include "struggle/modulation.hpp"

namespace struggle::learn {

// Dense design matrix, one encoded session per row.
using Design = std::vector<std::vector<double>>;

// Feature values followed by a one-hot topic block. Sessions without a topic
// (or with one outside the list) get an all-zero block.
class Encoder {
 public:
  Encoder() = default;
  explicit Encoder(std::vector<std::string> topics);
  std::size_t dimension() const { return feature_count() + topics_.size(); }
  const std::vector<std::string>& topics() const { return topics_; }
  std::vector<double> encode(const FeatureVector& fv) const;
  Design encode(const std::vector<features::FeatureRow>& rows) const;

 private:
  std::vector<std::string> topics_;
};

enum class ModelKind { ZeroRule, Logistic };

struct ClassifierModel {
  ModelKind kind = ModelKind::Logistic;
  std::vector<double> weights;
  double bias = 0;
  Label majority = Label::NonStruggle;
  std::vector<std::string> topics;  // encoder topic block
};

// Majority label; ties go to NonStruggle. Throws DataError on empty input.
ClassifierModel train_zero_rule(std::span<const Label> labels);

struct LogisticHyper {
  double lr = 0.1;
  int epochs = 2000;
  double l2 = 1e-4;
  std::uint64_t seed = 1;
};

// Mean negative log-likelihood plus (l2 / 2) |w|^2; the bias is not
// penalized. y holds 1 for Struggle.
double logistic_loss(const Design& x, std::span<const double> y, std::span<const double> w,
                     double b, double l2);
// Gradient of logistic_loss: d/dw in the first w.size() slots, d/db last.
std::vector<double> logistic_gradient(const Design& x, std::span<const double> y,
                                      std::span<const double> w, double b, double l2);

// Full-batch gradient descent from a small seeded initialization. Throws
// DataError when only one class is present.
ClassifierModel train_logistic(const Design& x, std::span<const Label> labels,
                               const LogisticHyper& hyper = {},
                               std::vector<double>* loss_trace = nullptr);

struct Prediction {
  double prob = 0.5;
  Label label = Label::NonStruggle;
};

// Struggle iff prob > 0.5. Throws DataError on a dimension mismatch.
Prediction predict(const ClassifierModel& m, std::span<const double> encoded);

double sigmoid(double z);

void write_model(std::ostream& out, const ClassifierModel& m);
ClassifierModel read_model(std::istream& in);

struct Metrics {
  double accuracy = 0;
  std::optional<double> pos_precision, pos_recall, neg_precision, neg_recall;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Struggle is the positive class. Ratios with a zero denominator are absent.
Metrics metrics(std::span<const Label> predicted, std::span<const Label> actual);

enum class FmMode { Off, Fmns, Fm };
enum class FitScope { Fold, Global };

std::string_view to_string(FmMode m);
FmMode parse_fm_mode(std::string_view s);
FitScope parse_fit_scope(std::string_view s);

struct EvalConfig {
  int k = 10;
  std::uint64_t seed = 1;
  FmMode mode = FmMode::Off;
  FitScope fit_scope = FitScope::Fold;
  ModelKind model = ModelKind::Logistic;
  double alpha = 0.05;
  LogisticHyper hyper;
  std::vector<std::string> topics;  // one-hot vocabulary; taken from the rows when empty
  unsigned jobs = 1;
};

struct FoldResult {
  Metrics metrics;
  std::set<FeatureGroup> modulated_groups;
  std::size_t train_size = 0, test_size = 0;
};

struct EvalReport {
  std::vector<FoldResult> folds;
  Metrics aggregate;  // metric-wise mean over folds where the metric is defined
};

// Stratified fold assignment: each class is shuffled with the seed and dealt
// round-robin. Throws DataError when a class has fewer than k members.
std::vector<int> stratified_folds(std::span<const Label> labels, int k, std::uint64_t seed);

// Per fold: fit min-max bounds, optionally select groups and fit the
// modulation, apply to train and test, train, and score the test fold.
EvalReport kfold_eval(const std::vector<features::FeatureRow>& rows, const EvalConfig& cfg);

// Per-fold values of a metric (absent values skipped) for paired tests.
std::vector<double> fold_values(const EvalReport& r, std::optional<double> Metrics::*field);
std::vector<double> fold_accuracy(const EvalReport& r);

}  // namespace struggle::learn
