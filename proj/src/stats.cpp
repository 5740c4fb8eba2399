#include "struggle/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

namespace struggle::stats {

namespace {

// Lentz continued fraction for the incomplete beta function.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

std::string fmt_p(double p) {
  char buf[32];
  if (p < 0.0001) return "p<0.0001";
  std::snprintf(buf, sizeof buf, "p=%.4f", p);
  return buf;
}

std::string fmt_f(int df1, int df2, double f) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "F(%d, %d)=%.4f", df1, df2, f);
  return buf;
}

Eigen::MatrixXd to_eigen(const Matrix& m, std::size_t cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < m.size(); ++r) {
    if (m[r].size() != cols) throw DataError("ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m[r][c];
    }
  }
  return out;
}

// Compares two row sets on per-group averages.
GroupTestReport compare_groups(const std::vector<const features::FeatureRow*>& first,
                               const std::vector<const features::FeatureRow*>& second,
                               const std::vector<FeatureGroup>& groups) {
  GroupTestReport rep;
  rep.n_first = first.size();
  rep.n_second = second.size();
  Matrix a, b;
  for (const auto* r : first) {
    std::vector<double> row;
    for (auto g : groups) row.push_back(group_average(r->fv, g));
    a.push_back(std::move(row));
  }
  for (const auto* r : second) {
    std::vector<double> row;
    for (auto g : groups) row.push_back(group_average(r->fv, g));
    b.push_back(std::move(row));
  }
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    std::vector<double> ca, cb;
    for (const auto& row : a) ca.push_back(row[gi]);
    for (const auto& row : b) cb.push_back(row[gi]);
    rep.anovas[groups[gi]] = one_way_anova(ca, cb);
  }
  try {
    rep.manova = two_group_manova(a, b);
  } catch (const DataError&) {
    rep.manova.reset();
  }
  return rep;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (a <= 0 || b <= 0) throw std::domain_error("incomplete_beta: shape parameters must be > 0");
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_upper_tail(double f, double df1, double df2) {
  if (std::isnan(f)) return 1.0;
  if (f <= 0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
}

double t_upper_tail(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  if (t == 0) return 0.5;
  const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
  return t > 0 ? tail : 1.0 - tail;
}

void MinMaxScaler::fit(const Matrix& m) {
  lo_.clear();
  hi_.clear();
  if (m.empty()) return;
  lo_ = m.front();
  hi_ = m.front();
  for (const auto& row : m) {
    if (row.size() != lo_.size()) throw DataError("ragged matrix");
    for (std::size_t c = 0; c < row.size(); ++c) {
      lo_[c] = std::min(lo_[c], row[c]);
      hi_[c] = std::max(hi_[c], row[c]);
    }
  }
}

std::vector<double> MinMaxScaler::transform(std::span<const double> row) const {
  if (row.size() != lo_.size()) throw DataError("row width does not match the fitted scaler");
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) {
    const double range = hi_[c] - lo_[c];
    out[c] = range > 0 ? (row[c] - lo_[c]) / range : 0.0;
  }
  return out;
}

Matrix MinMaxScaler::transform(const Matrix& m) const {
  Matrix out;
  out.reserve(m.size());
  for (const auto& row : m) out.push_back(transform(row));
  return out;
}

Matrix minmax_normalize(const Matrix& m) {
  MinMaxScaler s;
  s.fit(m);
  return s.transform(m);
}

void normalize_rows(std::vector<features::FeatureRow>& rows) {
  Matrix m;
  for (const auto& r : rows) m.push_back(r.fv.values);
  const auto n = minmax_normalize(m);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].fv.values = n[i];
}

double group_average(const FeatureVector& fv, FeatureGroup g) {
  const auto idx = features_in_group(g);
  double s = 0;
  for (auto i : idx) s += fv.values[i];
  return idx.empty() ? 0.0 : s / static_cast<double>(idx.size());
}

double explore_score(const FeatureVector& fv) {
  return group_average(fv, FeatureGroup::DiversifyEffort) +
         group_average(fv, FeatureGroup::RarityEffort);
}

double sample_mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = sample_mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

AnovaResult one_way_anova(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DataError("ANOVA needs at least 2 values per group");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = sample_mean(a), mb = sample_mean(b);
  const double grand = (na * ma + nb * mb) / (na + nb);
  double ssw = 0;
  for (double x : a) ssw += (x - ma) * (x - ma);
  for (double x : b) ssw += (x - mb) * (x - mb);
  const double ssb = na * (ma - grand) * (ma - grand) + nb * (mb - grand) * (mb - grand);

  AnovaResult r;
  r.df1 = 1;
  r.df2 = static_cast<int>(a.size() + b.size()) - 2;
  if (ssb <= 0) {
    r.f = 0;
    r.p = 1;
  } else if (ssw <= 0) {
    r.f = std::numeric_limits<double>::infinity();
    r.p = 0;
  } else {
    r.f = (ssb / r.df1) / (ssw / r.df2);
    r.p = f_upper_tail(r.f, r.df1, r.df2);
  }
  return r;
}

ManovaResult two_group_manova(const Matrix& a, const Matrix& b) {
  if (a.empty() || b.empty()) throw DataError("MANOVA needs two non-empty groups");
  const std::size_t p = a.front().size();
  if (p == 0) throw DataError("MANOVA needs at least one column");
  const auto n1 = a.size(), n2 = b.size();
  if (n1 + n2 <= p + 1) throw DataError("MANOVA needs more sessions than columns + 1");

  const Eigen::MatrixXd A = to_eigen(a, p), B = to_eigen(b, p);
  const Eigen::RowVectorXd m1 = A.colwise().mean(), m2 = B.colwise().mean();
  const Eigen::MatrixXd ca = A.rowwise() - m1, cb = B.rowwise() - m2;
  const Eigen::MatrixXd W = ca.transpose() * ca + cb.transpose() * cb;
  const Eigen::VectorXd diff = (m1 - m2).transpose();
  const double k = static_cast<double>(n1) * static_cast<double>(n2) /
                   static_cast<double>(n1 + n2);
  const Eigen::MatrixXd H = k * diff * diff.transpose();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(W, Eigen::EigenvaluesOnly);
  const double max_ev = eig.eigenvalues().maxCoeff();
  if (!(max_ev > 0) || eig.eigenvalues().minCoeff() <= 1e-12 * max_ev) {
    throw DataError("pooled within-group scatter is singular; drop constant or collinear columns");
  }
  const Eigen::LLT<Eigen::MatrixXd> lw(W), lt(W + H);
  const double logdet_w = 2.0 * lw.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdet_t = 2.0 * lt.matrixL().toDenseMatrix().diagonal().array().log().sum();

  ManovaResult r;
  r.wilks_lambda = std::clamp(std::exp(logdet_w - logdet_t), std::numeric_limits<double>::min(), 1.0);
  r.df1 = static_cast<int>(p);
  r.df2 = static_cast<int>(n1 + n2 - p - 1);
  if (diff.isZero(0.0) || r.wilks_lambda >= 1.0) {
    r.wilks_lambda = 1.0;
    r.f = 0;
    r.p = 1;
    return r;
  }
  r.f = (static_cast<double>(r.df2) / static_cast<double>(r.df1)) * (1.0 - r.wilks_lambda) /
        r.wilks_lambda;
  r.p = f_upper_tail(r.f, r.df1, r.df2);
  return r;
}

std::string format(const AnovaResult& r) { return fmt_f(r.df1, r.df2, r.f) + ", " + fmt_p(r.p); }

std::string format(const ManovaResult& r) {
  return fmt_f(r.df1, r.df2, r.f) + ", " + fmt_p(r.p);
}

std::vector<FeatureGroup> rules_test_groups() {
  return {FeatureGroup::QueryEffort, FeatureGroup::ClickEffort, FeatureGroup::ReadEffort,
          FeatureGroup::ScrollEffort, FeatureGroup::ReformEffort};
}

GroupTestReport rules_relevance_test(const std::vector<features::FeatureRow>& rows) {
  if (rows.size() < 14) {
    throw DataError("rules test needs at least 14 sessions, got " + std::to_string(rows.size()));
  }
  std::vector<std::pair<double, const features::FeatureRow*>> scored;
  for (const auto& r : rows) scored.emplace_back(explore_score(r.fv), &r);
  std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    return x.second->session_id < y.second->session_id;
  });
  const std::size_t tail = std::max<std::size_t>(2, rows.size() * 15 / 100);
  std::vector<const features::FeatureRow*> conformist, negativistic;
  for (std::size_t i = 0; i < tail; ++i) {
    conformist.push_back(scored[i].second);
    negativistic.push_back(scored[scored.size() - 1 - i].second);
  }
  return compare_groups(conformist, negativistic, rules_test_groups());
}

SelectionReport select_means_ends_groups(const std::vector<features::FeatureRow>& rows,
                                         double alpha) {
  std::vector<const features::FeatureRow*> telic, paratelic;
  for (const auto& r : rows) {
    if (r.state == State::Telic) telic.push_back(&r);
    if (r.state == State::Paratelic) paratelic.push_back(&r);
  }
  if (telic.size() < 2 || paratelic.size() < 2) {
    throw DataError("group selection needs at least 2 telic and 2 paratelic sessions (got " +
                    std::to_string(telic.size()) + " and " + std::to_string(paratelic.size()) +
                    ")");
  }
  SelectionReport rep;
  rep.tests = compare_groups(telic, paratelic, {kAllGroups.begin(), kAllGroups.end()});
  for (const auto& [g, res] : rep.tests.anovas) {
    if (res.p < alpha) rep.selected.insert(g);
  }
  return rep;
}

TTestResult paired_t_one_tailed(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw DataError("paired t test needs two equal-length samples of size >= 2");
  }
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  TTestResult r;
  r.df = static_cast<int>(d.size()) - 1;
  const double m = sample_mean(d), sd = sample_std(d);
  if (sd == 0) {
    if (m == 0) {
      r.t = 0;
      r.p = 0.5;
    } else {
      r.t = m > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p = m > 0 ? 0.0 : 1.0;
    }
    return r;
  }
  r.t = m / (sd / std::sqrt(static_cast<double>(d.size())));
  r.p = t_upper_tail(r.t, r.df);
  return r;
}

}  // namespace struggle::stats
