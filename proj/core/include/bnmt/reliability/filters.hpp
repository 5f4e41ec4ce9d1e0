#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnmt/reliability/matrix.hpp"

namespace bnmt::reliability {

struct FilterPoint {
  double threshold = 0.0;
  std::optional<double> alpha;  // empty when everything was filtered
  std::size_t retained = 0;     // raters or units
};

struct FilterCurve {
  std::vector<FilterPoint> points;
};

// Evenly spaced thresholds lo, lo+step, ..., up to hi inclusive.
std::vector<double> threshold_grid(double lo, double hi, double step);

// Inter-rater alpha restricted to raters with intra-rater alpha >= t.  Raters
// without an intra alpha stay only while t <= 0.  Thresholds must be strictly
// increasing.
FilterCurve consistency_filter_sweep(const ReliabilityMatrix& m,
                                     const std::map<std::string, double>& intra_alphas,
                                     std::span<const double> thresholds);

// Per-unit variance, min-max scaled to [0,1]; at threshold t units with
// 1 - scaled variance >= t survive.  Units with a single value are dropped
// up front.
FilterCurve item_variance_filter_sweep(const ReliabilityMatrix& m,
                                       std::span<const double> thresholds);

// Largest threshold of the curve that still retains at least `fraction` of
// the first point's units.
std::optional<FilterPoint> last_point_retaining(const FilterCurve& c, double fraction);

}  // namespace bnmt::reliability
