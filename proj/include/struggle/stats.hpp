#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "struggle/features.hpp"
#include "struggle/model.hpp"

namespace struggle::stats {

using Matrix = std::vector<std::vector<double>>;  // row-major, rows = sessions

// Regularized incomplete beta I_x(a, b), continued fraction to 1e-12.
double incomplete_beta(double a, double b, double x);
// P(F > f) for F(df1, df2).
double f_upper_tail(double f, double df1, double df2);
// P(T > t) for Student t with df degrees of freedom.
double t_upper_tail(double t, double df);

// Per-column (x - min) / (max - min); constant columns map to 0. Bounds are
// kept so held-out rows can be mapped with the training fit.
class MinMaxScaler {
 public:
  void fit(const Matrix& m);
  std::vector<double> transform(std::span<const double> row) const;
  Matrix transform(const Matrix& m) const;
  const std::vector<double>& lower() const { return lo_; }
  const std::vector<double>& upper() const { return hi_; }

 private:
  std::vector<double> lo_, hi_;
};

Matrix minmax_normalize(const Matrix& m);

// Normalizes every row's feature values in place with bounds fitted on the
// same rows.
void normalize_rows(std::vector<features::FeatureRow>& rows);

// Unweighted mean of a group's (normalized) features.
double group_average(const FeatureVector& fv, FeatureGroup g);

// Mean of the diversify features plus mean of the rarity features.
double explore_score(const FeatureVector& fv);

struct AnovaResult {
  double f = 0;
  int df1 = 1;
  int df2 = 1;
  double p = 1;
};

struct ManovaResult {
  double wilks_lambda = 1;
  double f = 0;
  int df1 = 1;
  int df2 = 1;
  double p = 1;
};

// Two-group one-way ANOVA. Needs >= 2 values per group. Identical constant
// groups give f = 0, p = 1; zero within-group but nonzero between-group
// variation gives f = +inf, p = 0.
AnovaResult one_way_anova(std::span<const double> a, std::span<const double> b);

// Two-group MANOVA via Wilks' lambda with the exact F transform. Throws
// DataError when the pooled within-group scatter is singular.
ManovaResult two_group_manova(const Matrix& a, const Matrix& b);

// "F(5, 330)=1.1352, p=0.3414"
std::string format(const AnovaResult& r);
std::string format(const ManovaResult& r);

struct GroupTestReport {
  std::optional<ManovaResult> manova;  // absent when the scatter is singular
  std::map<FeatureGroup, AnovaResult> anovas;
  std::size_t n_first = 0, n_second = 0;
};

// Groups tested by the rules-dimension test: every group except the two
// that define the explore score.
std::vector<FeatureGroup> rules_test_groups();

// Splits rows (already normalized) at the top and bottom 15% of explore
// score, ties broken by session id, tail size floor(0.15 n) with a minimum of
// 2, and compares the group averages of rules_test_groups(). Needs >= 14
// rows. Reported as first = conformist (bottom), second = negativistic (top).
GroupTestReport rules_relevance_test(const std::vector<features::FeatureRow>& rows);

struct SelectionReport {
  std::set<FeatureGroup> selected;
  GroupTestReport tests;  // first = telic, second = paratelic
};

// One ANOVA per group on group averages split by state; groups with
// p < alpha are selected. Unassigned rows are ignored. Throws DataError when a
// state has fewer than 2 rows.
SelectionReport select_means_ends_groups(const std::vector<features::FeatureRow>& rows,
                                         double alpha = 0.05);

struct TTestResult {
  double t = 0;
  int df = 1;
  double p = 0.5;
};

// Paired one-tailed t test of mean(a - b) > 0.
TTestResult paired_t_one_tailed(std::span<const double> a, std::span<const double> b);

double sample_mean(std::span<const double> v);
// n - 1 denominator; 0 for fewer than two values.
double sample_std(std::span<const double> v);

}  // namespace struggle::stats
