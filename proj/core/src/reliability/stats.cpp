#include "bnmt/reliability/stats.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "bnmt/common/error.hpp"
#include "bnmt/reliability/alpha.hpp"

namespace bnmt::reliability {

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-12;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw NumericalError("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw NumericalError("t distribution needs df > 0");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

double f_upper_tail_p(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw NumericalError("F distribution needs positive df");
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DataError("Welch t-test needs two values per sample");
  const auto sa = summarize(a), sb = summarize(b);
  const double va = sa.stdev * sa.stdev / static_cast<double>(sa.n);
  const double vb = sb.stdev * sb.stdev / static_cast<double>(sb.n);
  WelchResult r;
  if (va + vb == 0.0) {
    if (sa.mean == sb.mean) return r;
    throw NumericalError("Welch t-test undefined: both samples constant with different means");
  }
  r.t = (sa.mean - sb.mean) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) /
         (va * va / static_cast<double>(sa.n - 1) + vb * vb / static_cast<double>(sb.n - 1));
  r.p_two_sided = student_t_two_sided_p(r.t, r.df);
  return r;
}

AnovaResult anova_oneway(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw DataError("ANOVA needs at least two groups");
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw DataError("ANOVA needs two values per group");
    total += std::accumulate(g.begin(), g.end(), 0.0);
    n += g.size();
  }
  const double grand = total / static_cast<double>(n);
  double ss_between = 0.0, ss_within = 0.0;
  for (const auto& g : groups) {
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    ss_between += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
    for (double v : g) ss_within += (v - mean) * (v - mean);
  }
  AnovaResult r;
  r.df_between = static_cast<double>(groups.size() - 1);
  r.df_within = static_cast<double>(n - groups.size());
  const double ms_between = ss_between / r.df_between;
  const double ms_within = ss_within / r.df_within;
  if (ms_within == 0.0) {
    if (ms_between == 0.0) return r;
    r.f = std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.f = ms_between / ms_within;
  r.p = f_upper_tail_p(r.f, r.df_between, r.df_within);
  return r;
}

}  // namespace bnmt::reliability
