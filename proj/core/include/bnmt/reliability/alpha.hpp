#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnmt/ratings/types.hpp"
#include "bnmt/reliability/matrix.hpp"

namespace bnmt::reliability {

struct ReliabilityReport {
  double alpha = 1.0;
  std::size_t n_units_used = 0;
  std::size_t n_values_used = 0;
  // Expected disagreement was zero (all pairable values identical); alpha is
  // reported as 1 by convention.
  bool degenerate = false;
};

// Krippendorff's alpha from the coincidence matrix.  Units with fewer than two
// values are ignored.  Throws NumericalError when no unit is pairable.
ReliabilityReport krippendorff_alpha(const ReliabilityMatrix& m);
ReliabilityReport krippendorff_alpha(std::span<const std::vector<double>> units, Scale scale);

// Same matrix, values replaced by per-rater Z-scores (sample standard
// deviation).  Raters with no spread map to 0 and are named in `warnings`.
struct NormalizedMatrix {
  ReliabilityMatrix matrix;
  std::vector<std::string> warnings;
};
NormalizedMatrix zscore_normalize(const ReliabilityMatrix& m);

// Self-agreement of one rater: first vs second showing of every repeated
// unit the rater answered twice.  Interval scale for cardinal, ordinal for
// pairwise.  Throws NumericalError with fewer than two such units.
ReliabilityReport intra_rater_alpha(std::span<const ratings::RatingRecord> records,
                                    const ratings::SessionPlan& plan);

// Per rater, raters whose alpha is undefined are absent.
std::map<std::string, double> intra_rater_alphas(std::span<const ratings::RatingRecord> records,
                                                 const ratings::SessionPlan& plan);

// Alpha for every pair of raters over the units they share (undefined pairs
// skipped), rater pairs in lexicographic order of their ids.
std::vector<double> pairwise_rater_alphas(const ReliabilityMatrix& m);

struct Summary {
  double mean = 0.0;
  double stdev = 0.0;  // sample
  std::size_t n = 0;
};
Summary summarize(std::span<const double> xs);

}  // namespace bnmt::reliability
