#include "bnmt/estimator/losses.hpp"

#include <cmath>

#include "bnmt/common/error.hpp"

namespace bnmt::estimator {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

void validate(const RewardExample& e) {
  if (!(e.reward >= 0.0 && e.reward <= 1.0)) throw DataError("reward outside [0,1]");
  if (e.source.empty() || e.target.empty()) throw DataError("reward example with empty sequence");
}

void validate(const PreferencePair& p) {
  if (!(p.q >= 0.0 && p.q <= 1.0)) throw DataError("preference q outside [0,1]");
  if (p.target_1 == p.target_2) throw DataError("preference pair with identical targets");
  if (p.source.empty() || p.target_1.empty() || p.target_2.empty()) {
    throw DataError("preference pair with empty sequence");
  }
}

double preference_probability(double r1, double r2) { return sigmoid(r1 - r2); }

double bradley_terry_nll(double r1, double r2, double q) {
  const double d = r1 - r2;
  return q * softplus(-d) + (1.0 - q) * softplus(d);
}

LossResult mse_loss(const RewardEstimator& est, std::span<const RewardExample> batch,
                    std::optional<std::uint64_t> dropout_seed, bool accumulate_grad) {
  if (batch.empty()) throw UsageError("mse_loss: empty batch");
  Rng rng(dropout_seed.value_or(0));
  Rng* drop = dropout_seed ? &rng : nullptr;
  const double n = static_cast<double>(batch.size());
  LossResult res;
  for (const auto& ex : batch) {
    nn::Tape t(accumulate_grad);
    nn::Var r = est.forward(t, ex.source, ex.target, drop);
    const double pred = r.scalar();
    const double diff = ex.reward - pred;
    res.loss += diff * diff / n;
    res.predictions.push_back(pred);
    if (accumulate_grad) t.backward(r, -2.0 * diff / n);
  }
  return res;
}

LossResult pw_loss(const RewardEstimator& est, std::span<const PreferencePair> batch,
                   std::optional<std::uint64_t> dropout_seed, bool accumulate_grad) {
  if (batch.empty()) throw UsageError("pw_loss: empty batch");
  Rng rng(dropout_seed.value_or(0));
  Rng* drop = dropout_seed ? &rng : nullptr;
  const double n = static_cast<double>(batch.size());
  LossResult res;
  for (const auto& p : batch) {
    nn::Tape t(accumulate_grad);
    nn::Var r1 = est.forward(t, p.source, p.target_1, drop);
    nn::Var r2 = est.forward(t, p.source, p.target_2, drop);
    const double a = r1.scalar(), b = r2.scalar();
    res.loss += bradley_terry_nll(a, b, p.q) / n;
    res.predictions.push_back(a);
    res.predictions.push_back(b);
    if (accumulate_grad) {
      const double g = (sigmoid(a - b) - p.q) / n;
      const std::pair<nn::Var, double> seeds[2] = {{r1, g}, {r2, -g}};
      t.backward(seeds);
    }
  }
  return res;
}

}  // namespace bnmt::estimator
