#include "bnmt/reliability/matrix.hpp"

#include <cmath>

#include "bnmt/common/error.hpp"

namespace bnmt::reliability {

std::size_t ReliabilityMatrix::rater_index(const std::string& id) {
  auto [it, inserted] = rater_ix_.emplace(id, raters_.size());
  if (inserted) raters_.push_back(id);
  return it->second;
}

std::size_t ReliabilityMatrix::unit_index(const std::string& id) {
  auto [it, inserted] = unit_ix_.emplace(id, units_.size());
  if (inserted) units_.push_back(id);
  return it->second;
}

void ReliabilityMatrix::add(const std::string& rater, const std::string& unit, double value) {
  if (!std::isfinite(value)) throw DataError("reliability matrix: non-finite value");
  observations_.push_back({rater_index(rater), unit_index(unit), value});
}

std::vector<std::vector<double>> ReliabilityMatrix::values_by_unit() const {
  std::vector<std::vector<double>> out(units_.size());
  for (const auto& o : observations_) out[o.unit].push_back(o.value);
  return out;
}

std::vector<std::vector<double>> ReliabilityMatrix::values_by_rater() const {
  std::vector<std::vector<double>> out(raters_.size());
  for (const auto& o : observations_) out[o.rater].push_back(o.value);
  return out;
}

ReliabilityMatrix ReliabilityMatrix::with_raters(const std::set<std::string>& keep) const {
  ReliabilityMatrix m(scale_);
  for (const auto& o : observations_) {
    if (keep.count(raters_[o.rater])) m.add(raters_[o.rater], units_[o.unit], o.value);
  }
  return m;
}

ReliabilityMatrix ReliabilityMatrix::with_units(const std::set<std::string>& keep) const {
  ReliabilityMatrix m(scale_);
  for (const auto& o : observations_) {
    if (keep.count(units_[o.unit])) m.add(raters_[o.rater], units_[o.unit], o.value);
  }
  return m;
}

ReliabilityMatrix ReliabilityMatrix::transformed(
    const std::function<double(std::size_t, double)>& f) const {
  ReliabilityMatrix m(scale_);
  for (const auto& o : observations_) m.add(raters_[o.rater], units_[o.unit], f(o.rater, o.value));
  return m;
}

ReliabilityMatrix matrix_from_records(std::span<const ratings::RatingRecord> records,
                                      ratings::TaskKind kind, const MatrixOptions& options) {
  ReliabilityMatrix m(kind == ratings::TaskKind::cardinal ? Scale::interval : Scale::ordinal);
  for (const auto& r : records) {
    if (r.task_kind != kind) continue;
    if (!options.include_repeats && r.occurrence > 0) continue;
    m.add(r.rater_id, r.assignment_id, static_cast<double>(r.value));
  }
  return m;
}

}  // namespace bnmt::reliability
