#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "bnmt/metrics/metrics.hpp"
#include "bnmt/reliability/matrix.hpp"

namespace oracle {

// Krippendorff's alpha straight from pairable values: observed disagreement
// over ordered pairs within units, expected over ordered pairs of all values.
inline double alpha_direct(std::vector<std::vector<double>> units, bnmt::reliability::Scale scale) {
  std::erase_if(units, [](const auto& u) { return u.size() < 2; });
  std::vector<double> all;
  for (const auto& u : units) all.insert(all.end(), u.begin(), u.end());
  std::map<double, double> count;
  for (double v : all) count[v] += 1.0;

  auto d2 = [&](double a, double b) {
    using bnmt::reliability::Scale;
    if (scale == Scale::nominal) return a == b ? 0.0 : 1.0;
    if (scale == Scale::interval) return (a - b) * (a - b);
    const double lo = std::min(a, b), hi = std::max(a, b);
    double s = 0.0;
    for (const auto& [c, n] : count) {
      if (c >= lo && c <= hi) s += n;
    }
    s -= (count[a] + count[b]) / 2.0;
    return s * s;
  };

  const double n = static_cast<double>(all.size());
  double d_o = 0.0;
  for (const auto& u : units) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (std::size_t j = 0; j < u.size(); ++j) {
        if (i != j) s += d2(u[i], u[j]);
      }
    }
    d_o += s / static_cast<double>(u.size() - 1);
  }
  d_o /= n;
  double d_e = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (i != j) d_e += d2(all[i], all[j]);
    }
  }
  d_e /= n * (n - 1.0);
  return 1.0 - d_o / d_e;
}

inline std::vector<std::vector<double>> units_of(const bnmt::reliability::ReliabilityMatrix& m) {
  return m.values_by_unit();
}

// Fewest (block moves + word edits) over every sequence of block moves,
// breadth-first over hypothesis permutations.  Tiny sentences only.
inline int ter_exhaustive(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  auto ed = [&](const std::vector<std::string>& h) {
    return bnmt::metrics::edit_distance<std::string>(h, ref);
  };
  std::map<std::vector<std::string>, int> seen{{hyp, 0}};
  std::queue<std::vector<std::string>> q;
  q.push(hyp);
  int best = ed(hyp);
  while (!q.empty()) {
    auto h = q.front();
    q.pop();
    const int shifts = seen[h];
    best = std::min(best, shifts + ed(h));
    if (shifts + 1 >= best) continue;
    const std::size_t n = h.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t len = 1; i + len <= n; ++len) {
        std::vector<std::string> block(h.begin() + i, h.begin() + i + len);
        std::vector<std::string> rest(h.begin(), h.begin() + i);
        rest.insert(rest.end(), h.begin() + i + len, h.end());
        for (std::size_t pos = 0; pos <= rest.size(); ++pos) {
          if (pos == i) continue;
          auto moved = rest;
          moved.insert(moved.begin() + pos, block.begin(), block.end());
          if (!seen.count(moved)) {
            seen[moved] = shifts + 1;
            q.push(moved);
          }
        }
      }
    }
  }
  return best;
}

}  // namespace oracle
