#include "oracles.hpp"

#include <cmath>
#include <functional>
#include <limits>

#if HAVE_BOOST_QUADRATURE
#include <boost/math/quadrature/exp_sinh.hpp>
#endif

namespace oracle {

namespace {

double f_pdf(double x, double d1, double d2) {
  double lg = std::lgamma((d1 + d2) / 2) - std::lgamma(d1 / 2) - std::lgamma(d2 / 2);
  return std::exp(lg + (d1 / 2) * std::log(d1 / d2) + (d1 / 2 - 1) * std::log(x) -
                  ((d1 + d2) / 2) * std::log1p(d1 * x / d2));
}

double t_pdf(double x, double n) {
  double lg = std::lgamma((n + 1) / 2) - std::lgamma(n / 2) - 0.5 * std::log(n * M_PI);
  return std::exp(lg - ((n + 1) / 2) * std::log1p(x * x / n));
}

#if HAVE_BOOST_QUADRATURE
double tail(const std::function<double(double)>& pdf, double from) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate([&](double u) { return pdf(from + u); }, 0.0,
                     std::numeric_limits<double>::infinity(), 1e-13);
}
#else
// x = from + u / (1 - u) maps [0, 1) onto [from, inf)
double simpson(const std::function<double(double)>& g, double a, double b, double fa, double fm,
               double fb, double whole, int depth) {
  double m = (a + b) / 2, lm = (a + m) / 2, rm = (m + b) / 2;
  double flm = g(lm), frm = g(rm);
  double left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 1e-14)
    return left + right + (left + right - whole) / 15;
  return simpson(g, a, m, fa, flm, fm, left, depth - 1) +
         simpson(g, m, b, fm, frm, fb, right, depth - 1);
}

double tail(const std::function<double(double)>& pdf, double from) {
  auto g = [&](double u) {
    if (u >= 1) return 0.0;
    double d = 1 - u;
    return pdf(from + u / d) / (d * d);
  };
  double a = 0, b = 1 - 1e-12;
  double fa = g(a), fb = g(b), fm = g((a + b) / 2);
  return simpson(g, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), 40);
}
#endif

}  // namespace

double f_upper_tail(double f, double df1, double df2) {
  if (f <= 0) return 1.0;
  return tail([&](double x) { return f_pdf(x, df1, df2); }, f);
}

double t_upper_tail(double t, double df) {
  if (t < 0) return 1.0 - t_upper_tail(-t, df);
  return tail([&](double x) { return t_pdf(x, df); }, t);
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}

double sd(const std::vector<double>& v) {
  double m = mean(v), s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

Anova anova(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = mean(a), mb = mean(b);
  double n = a.size() + b.size();
  double grand = (ma * a.size() + mb * b.size()) / n;
  double ssb = a.size() * (ma - grand) * (ma - grand) + b.size() * (mb - grand) * (mb - grand);
  double ssw = 0;
  for (double x : a) ssw += (x - ma) * (x - ma);
  for (double x : b) ssw += (x - mb) * (x - mb);
  return {ssb / (ssw / (n - 2)), 1, n - 2};
}

}  // namespace oracle
