#include "bnmt/reliability/alpha.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "bnmt/common/error.hpp"

namespace bnmt::reliability {

namespace {

// Interval alpha with the coincidence sums in closed form:
// sum_{i != j} (v_i - v_j)^2 = 2 m sum v^2 - 2 (sum v)^2.
ReliabilityReport interval_alpha(std::span<const std::vector<double>> units) {
  ReliabilityReport rep;
  double observed = 0.0, n = 0.0, s1 = 0.0, s2 = 0.0;
  std::vector<double> pooled;
  for (const auto& u : units) {
    if (u.size() < 2) continue;
    const double m = static_cast<double>(u.size());
    // Centering per unit keeps the difference of squares well conditioned.
    const double mean = std::accumulate(u.begin(), u.end(), 0.0) / m;
    double ss = 0.0;
    for (double v : u) ss += (v - mean) * (v - mean);
    observed += 2.0 * m * ss / (m - 1.0);
    n += m;
    ++rep.n_units_used;
    pooled.insert(pooled.end(), u.begin(), u.end());
  }
  rep.n_values_used = pooled.size();
  if (rep.n_units_used == 0) throw NumericalError("alpha undefined: no unit has two or more values");
  const double mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / n;
  for (double v : pooled) {
    s1 += (v - mean) * (v - mean);
  }
  s2 = 2.0 * n * s1;
  const double d_o = observed / n;
  const double d_e = s2 / (n * (n - 1.0));
  if (d_e == 0.0) {
    rep.alpha = 1.0;
    rep.degenerate = true;
    return rep;
  }
  rep.alpha = 1.0 - d_o / d_e;
  return rep;
}

ReliabilityReport categorical_alpha(std::span<const std::vector<double>> units, Scale scale) {
  ReliabilityReport rep;
  std::vector<double> categories;
  for (const auto& u : units) {
    if (u.size() < 2) continue;
    categories.insert(categories.end(), u.begin(), u.end());
  }
  std::sort(categories.begin(), categories.end());
  categories.erase(std::unique(categories.begin(), categories.end()), categories.end());
  const std::size_t v = categories.size();
  auto index = [&](double x) {
    return static_cast<std::size_t>(std::lower_bound(categories.begin(), categories.end(), x) -
                                    categories.begin());
  };

  std::vector<double> o(v * v, 0.0);
  for (const auto& u : units) {
    if (u.size() < 2) continue;
    ++rep.n_units_used;
    rep.n_values_used += u.size();
    const double w = 1.0 / (static_cast<double>(u.size()) - 1.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (std::size_t j = 0; j < u.size(); ++j) {
        if (i != j) o[index(u[i]) * v + index(u[j])] += w;
      }
    }
  }
  if (rep.n_units_used == 0) throw NumericalError("alpha undefined: no unit has two or more values");

  std::vector<double> nc(v, 0.0);
  for (std::size_t c = 0; c < v; ++c) {
    for (std::size_t k = 0; k < v; ++k) nc[c] += o[c * v + k];
  }
  const double n = std::accumulate(nc.begin(), nc.end(), 0.0);

  std::vector<double> cum(v + 1, 0.0);
  for (std::size_t c = 0; c < v; ++c) cum[c + 1] = cum[c] + nc[c];
  auto delta2 = [&](std::size_t c, std::size_t k) {
    if (c == k) return 0.0;
    if (scale == Scale::nominal) return 1.0;
    const auto lo = std::min(c, k), hi = std::max(c, k);
    const double d = (cum[hi + 1] - cum[lo]) - (nc[lo] + nc[hi]) / 2.0;
    return d * d;
  };

  double d_o = 0.0, d_e = 0.0;
  for (std::size_t c = 0; c < v; ++c) {
    for (std::size_t k = 0; k < v; ++k) {
      const double d = delta2(c, k);
      d_o += o[c * v + k] * d;
      d_e += nc[c] * nc[k] * d;
    }
  }
  d_o /= n;
  d_e /= n * (n - 1.0);
  if (d_e == 0.0) {
    rep.alpha = 1.0;
    rep.degenerate = true;
    return rep;
  }
  rep.alpha = 1.0 - d_o / d_e;
  return rep;
}

}  // namespace

ReliabilityReport krippendorff_alpha(std::span<const std::vector<double>> units, Scale scale) {
  return scale == Scale::interval ? interval_alpha(units) : categorical_alpha(units, scale);
}

ReliabilityReport krippendorff_alpha(const ReliabilityMatrix& m) {
  const auto units = m.values_by_unit();
  return krippendorff_alpha(units, m.scale());
}

NormalizedMatrix zscore_normalize(const ReliabilityMatrix& m) {
  NormalizedMatrix out{ReliabilityMatrix(m.scale()), {}};
  const auto by_rater = m.values_by_rater();
  std::vector<double> mean(by_rater.size(), 0.0), sd(by_rater.size(), 0.0);
  for (std::size_t r = 0; r < by_rater.size(); ++r) {
    const auto s = summarize(by_rater[r]);
    mean[r] = s.mean;
    sd[r] = s.stdev;
    if (!(sd[r] > 0.0)) {
      out.warnings.push_back("rater " + m.raters()[r] +
                             " has zero rating variance; normalized values set to 0");
    }
  }
  out.matrix = m.transformed([&](std::size_t r, double v) {
    return sd[r] > 0.0 ? (v - mean[r]) / sd[r] : 0.0;
  });
  return out;
}

ReliabilityReport intra_rater_alpha(std::span<const ratings::RatingRecord> records,
                                    const ratings::SessionPlan& plan) {
  std::map<std::string, std::array<std::optional<double>, 2>> shows;
  std::string rater;
  for (const auto& r : records) {
    if (rater.empty()) rater = r.rater_id;
    if (r.rater_id != rater) throw DataError("intra_rater_alpha: records of more than one rater");
    if (r.task_kind != plan.task_kind) continue;
    if (!plan.repeat_pool.count(r.assignment_id)) continue;
    if (r.occurrence < 0 || r.occurrence > 1) continue;
    shows[r.assignment_id][static_cast<std::size_t>(r.occurrence)] = r.value;
  }
  std::vector<std::vector<double>> units;
  for (const auto& [id, both] : shows) {
    if (both[0] && both[1]) units.push_back({*both[0], *both[1]});
  }
  if (units.size() < 2) {
    throw NumericalError("intra-rater alpha undefined: fewer than two repeated units answered twice");
  }
  const Scale scale = plan.task_kind == ratings::TaskKind::cardinal ? Scale::interval : Scale::ordinal;
  return krippendorff_alpha(units, scale);
}

std::map<std::string, double> intra_rater_alphas(std::span<const ratings::RatingRecord> records,
                                                 const ratings::SessionPlan& plan) {
  std::map<std::string, std::vector<ratings::RatingRecord>> by_rater;
  for (const auto& r : records) by_rater[r.rater_id].push_back(r);
  std::map<std::string, double> out;
  for (const auto& [rater, recs] : by_rater) {
    try {
      out[rater] = intra_rater_alpha(recs, plan).alpha;
    } catch (const NumericalError&) {
    }
  }
  return out;
}

std::vector<double> pairwise_rater_alphas(const ReliabilityMatrix& m) {
  std::vector<std::string> ids = m.raters();
  std::sort(ids.begin(), ids.end());
  std::vector<double> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      try {
        out.push_back(krippendorff_alpha(m.with_raters({ids[i], ids[j]})).alpha);
      } catch (const NumericalError&) {
      }
    }
  }
  return out;
}

Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.stdev = std::sqrt(ss / static_cast<double>(s.n - 1));
  return s;
}

}  // namespace bnmt::reliability
