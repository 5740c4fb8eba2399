#pragma once

#include <vector>

namespace oracle {

// Upper tails by numerical integration of the densities.
double f_upper_tail(double f, double df1, double df2);
double t_upper_tail(double t, double df);

// Textbook between/within sums of squares.
struct Anova {
  double f, df1, df2;
};
Anova anova(const std::vector<double>& a, const std::vector<double>& b);

double mean(const std::vector<double>& v);
double sd(const std::vector<double>& v);

}  // namespace oracle
