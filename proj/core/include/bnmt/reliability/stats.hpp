#pragma once

#include <span>
#include <vector>

namespace bnmt::reliability {

// I_x(a, b) by Lentz's continued fraction, relative tolerance 1e-12.
double regularized_incomplete_beta(double a, double b, double x);

// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);
// P(F' >= f) for the F distribution.
double f_upper_tail_p(double f, double d1, double d2);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
};
// Each sample needs at least two values.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

struct AnovaResult {
  double f = 0.0;
  double df_between = 0.0;
  double df_within = 0.0;
  double p = 1.0;
};
AnovaResult anova_oneway(std::span<const std::vector<double>> groups);

}  // namespace bnmt::reliability
