#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace bnmt::metrics {

// Pearson correlation of average ranks.  Throws NumericalError when either
// side is constant.
double spearman_rho(std::span<const double> xs, std::span<const double> ys);

// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

double pearson(std::span<const double> xs, std::span<const double> ys);

using SentenceStats = std::vector<double>;
// Maps summed sentence statistics onto a corpus score.
using CorpusMetric = std::function<double(std::span<const double>)>;

struct RandomizationResult {
  double p_value = 1.0;
  double observed_delta = 0.0;
  int n_at_least_as_extreme = 0;
};

// Approximate randomization: every permutation swaps each sentence's system
// assignment with probability 1/2; p = (1 + #{|delta| >= |observed|}) / (1 + n_perm).
RandomizationResult approx_randomization_test(std::span<const SentenceStats> stats_a,
                                              std::span<const SentenceStats> stats_b,
                                              const CorpusMetric& metric, int n_perm,
                                              std::uint64_t seed);

}  // namespace bnmt::metrics
