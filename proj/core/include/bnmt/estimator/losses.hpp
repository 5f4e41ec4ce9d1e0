#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bnmt/common/tokens.hpp"
#include "bnmt/estimator/model.hpp"

namespace bnmt::estimator {

struct RewardExample {
  Tokens source;
  Tokens target;
  double reward = 0.0;  // in [0,1]
};

struct PreferencePair {
  Tokens source;
  Tokens target_1;
  Tokens target_2;
  double q = 0.5;  // probability that target_1 is preferred
};

void validate(const RewardExample& e);
void validate(const PreferencePair& p);

struct LossResult {
  double loss = 0.0;
  std::vector<double> predictions;  // r_hat per example (per target for pairs)
};

// Dropout masks are drawn from Rng(dropout_seed) when a seed is given, so a
// repeated call reproduces the same stochastic forward pass.

// (1/n) sum (r - r_hat)^2.  When `accumulate_grad`, d loss / d psi is added
// into the estimator's parameter gradients.
LossResult mse_loss(const RewardEstimator& est, std::span<const RewardExample> batch,
                    std::optional<std::uint64_t> dropout_seed, bool accumulate_grad);

// Bradley-Terry: P = exp r1 / (exp r1 + exp r2);
// loss = -(1/n) sum (q log P + (1 - q) log (1 - P)).
LossResult pw_loss(const RewardEstimator& est, std::span<const PreferencePair> batch,
                   std::optional<std::uint64_t> dropout_seed, bool accumulate_grad);

// -(q log sigmoid(d) + (1-q) log sigmoid(-d)) computed without overflow.
double bradley_terry_nll(double r1, double r2, double q);
double preference_probability(double r1, double r2);

}  // namespace bnmt::estimator
