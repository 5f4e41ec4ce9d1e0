#include "bnmt/metrics/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bnmt/common/error.hpp"
#include "bnmt/common/rng.hpp"

namespace bnmt::metrics {

std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DataError("pearson: length mismatch");
  if (xs.size() < 2) throw DataError("pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericalError("correlation undefined for a constant vector");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman_rho(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DataError("spearman_rho: length mismatch");
  if (xs.size() < 2) throw DataError("spearman_rho: need at least two points");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

RandomizationResult approx_randomization_test(std::span<const SentenceStats> stats_a,
                                              std::span<const SentenceStats> stats_b,
                                              const CorpusMetric& metric, int n_perm,
                                              std::uint64_t seed) {
  if (n_perm < 1) throw UsageError("approx_randomization_test: n_perm must be >= 1");
  if (stats_a.size() != stats_b.size()) throw DataError("approx_randomization_test: system sizes differ");
  if (stats_a.empty()) throw DataError("approx_randomization_test: empty corpus");
  const std::size_t width = stats_a.front().size();
  for (std::size_t i = 0; i < stats_a.size(); ++i) {
    if (stats_a[i].size() != width || stats_b[i].size() != width) {
      throw DataError("approx_randomization_test: inconsistent statistics width");
    }
  }

  auto delta = [&](const std::vector<bool>* swap) {
    std::vector<double> sa(width, 0.0), sb(width, 0.0);
    for (std::size_t i = 0; i < stats_a.size(); ++i) {
      const bool s = swap && (*swap)[i];
      const auto& a = s ? stats_b[i] : stats_a[i];
      const auto& b = s ? stats_a[i] : stats_b[i];
      for (std::size_t k = 0; k < width; ++k) {
        sa[k] += a[k];
        sb[k] += b[k];
      }
    }
    return metric(sa) - metric(sb);
  };

  RandomizationResult out;
  out.observed_delta = delta(nullptr);
  const double observed = std::abs(out.observed_delta);
  const double slack = 1e-12 * std::max(1.0, observed);

  Rng rng(seed);
  std::vector<bool> swap(stats_a.size());
  for (int p = 0; p < n_perm; ++p) {
    for (std::size_t i = 0; i < swap.size(); ++i) swap[i] = (rng() >> 63) != 0;
    if (std::abs(delta(&swap)) >= observed - slack) ++out.n_at_least_as_extreme;
  }
  out.p_value = (1.0 + out.n_at_least_as_extreme) / (1.0 + n_perm);
  return out;
}

}  // namespace bnmt::metrics
