#pragma once

#include <functional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bnmt/ratings/types.hpp"

namespace bnmt::reliability {

enum class Scale { nominal, ordinal, interval };

struct Observation {
  std::size_t rater = 0;
  std::size_t unit = 0;
  double value = 0.0;
};

// Raters x units with missing entries.  A cell may hold more than one value
// (a rater seeing a repeated item twice); every value counts separately.
class ReliabilityMatrix {
 public:
  explicit ReliabilityMatrix(Scale scale = Scale::interval) : scale_(scale) {}

  Scale scale() const { return scale_; }
  void set_scale(Scale s) { scale_ = s; }

  // Throws DataError for non-finite values.
  void add(const std::string& rater, const std::string& unit, double value);

  const std::vector<std::string>& raters() const { return raters_; }
  const std::vector<std::string>& units() const { return units_; }
  const std::vector<Observation>& observations() const { return observations_; }
  bool empty() const { return observations_.empty(); }

  // Values grouped per unit, units in insertion order.
  std::vector<std::vector<double>> values_by_unit() const;
  std::vector<std::vector<double>> values_by_rater() const;

  ReliabilityMatrix with_raters(const std::set<std::string>& keep) const;
  ReliabilityMatrix with_units(const std::set<std::string>& keep) const;
  ReliabilityMatrix transformed(const std::function<double(std::size_t rater, double)>& f) const;

 private:
  std::size_t rater_index(const std::string& id);
  std::size_t unit_index(const std::string& id);

  Scale scale_;
  std::vector<std::string> raters_;
  std::vector<std::string> units_;
  std::unordered_map<std::string, std::size_t> rater_ix_;
  std::unordered_map<std::string, std::size_t> unit_ix_;
  std::vector<Observation> observations_;
};

struct MatrixOptions {
  // Second showings of repeated items become extra values of the same unit.
  bool include_repeats = true;
};

// Cardinal records give an interval-scale matrix over item ids; pairwise
// records an ordinal matrix over pair ids coded -1/0/+1.
ReliabilityMatrix matrix_from_records(std::span<const ratings::RatingRecord> records,
                                      ratings::TaskKind kind, const MatrixOptions& options = {});

}  // namespace bnmt::reliability
