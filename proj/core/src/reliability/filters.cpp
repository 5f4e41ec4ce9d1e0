#include "bnmt/reliability/filters.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bnmt/common/error.hpp"
#include "bnmt/reliability/alpha.hpp"

namespace bnmt::reliability {

namespace {

void check_increasing(std::span<const double> thresholds) {
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) {
      throw UsageError("filter thresholds must be strictly increasing");
    }
  }
}

std::optional<double> alpha_or_empty(const ReliabilityMatrix& m) {
  if (m.empty()) return std::nullopt;
  try {
    return krippendorff_alpha(m).alpha;
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<double> threshold_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw UsageError("threshold grid needs step > 0 and hi >= lo");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

FilterCurve consistency_filter_sweep(const ReliabilityMatrix& m,
                                     const std::map<std::string, double>& intra_alphas,
                                     std::span<const double> thresholds) {
  check_increasing(thresholds);
  FilterCurve curve;
  for (double t : thresholds) {
    std::set<std::string> keep;
    for (const auto& r : m.raters()) {
      auto it = intra_alphas.find(r);
      if (it == intra_alphas.end() ? t <= 0.0 : it->second >= t) keep.insert(r);
    }
    FilterPoint p{t, std::nullopt, keep.size()};
    if (keep.size() == m.raters().size()) {
      p.alpha = alpha_or_empty(m);
    } else if (!keep.empty()) {
      p.alpha = alpha_or_empty(m.with_raters(keep));
    }
    curve.points.push_back(p);
  }
  return curve;
}

FilterCurve item_variance_filter_sweep(const ReliabilityMatrix& m,
                                       std::span<const double> thresholds) {
  check_increasing(thresholds);
  const auto by_unit = m.values_by_unit();
  std::vector<std::pair<std::string, double>> variances;
  for (std::size_t u = 0; u < by_unit.size(); ++u) {
    if (by_unit[u].size() < 2) continue;
    variances.emplace_back(m.units()[u], summarize(by_unit[u]).stdev);
  }
  double lo = 0.0, hi = 0.0;
  if (!variances.empty()) {
    for (auto& [id, v] : variances) v = v * v;
    const auto [mn, mx] = std::minmax_element(variances.begin(), variances.end(),
                                              [](auto& a, auto& b) { return a.second < b.second; });
    lo = mn->second;
    hi = mx->second;
  }

  FilterCurve curve;
  for (double t : thresholds) {
    std::set<std::string> keep;
    for (const auto& [id, v] : variances) {
      const double scaled = hi > lo ? (v - lo) / (hi - lo) : 0.0;
      if (1.0 - scaled >= t) keep.insert(id);
    }
    FilterPoint p{t, std::nullopt, keep.size()};
    if (!keep.empty()) p.alpha = alpha_or_empty(m.with_units(keep));
    curve.points.push_back(p);
  }
  return curve;
}

std::optional<FilterPoint> last_point_retaining(const FilterCurve& c, double fraction) {
  if (c.points.empty()) return std::nullopt;
  const double need = fraction * static_cast<double>(c.points.front().retained);
  std::optional<FilterPoint> best;
  for (const auto& p : c.points) {
    if (static_cast<double>(p.retained) >= need) best = p;
  }
  return best;
}

}  // namespace bnmt::reliability
