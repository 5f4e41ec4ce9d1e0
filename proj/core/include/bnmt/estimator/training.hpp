#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bnmt/estimator/losses.hpp"
#include "bnmt/estimator/model.hpp"
#include "bnmt/metrics/metrics.hpp"
#include "bnmt/nn/parameters.hpp"

namespace bnmt::estimator {

enum class LossKind { mse, pairwise };

struct EstimatorData {
  std::vector<RewardExample> rewards;
  std::vector<PreferencePair> pairs;
};

// A translation with its reference, for rank correlation against TER.
struct ScoredTranslation {
  Tokens source;
  Tokens hypothesis;
  Tokens reference;
};

struct EstimatorTrainConfig {
  LossKind loss = LossKind::mse;
  double p_aux = 0.8;
  int batch_size = 16;
  nn::AdamConfig adam{.lr = 1e-4};
  double clip_norm = 1.0;  // <= 0 disables
  int max_steps = 1000;
  int eval_every = 50;
  int patience = 5;  // evaluations without improvement; 0 disables early stopping
  bool dropout = true;
  std::uint64_t seed = 1;
  metrics::MetricConfig metric;

  void validate() const;
};

struct TrainStep {
  int step = 0;
  double loss = 0.0;
  bool aux_batch = false;
};

struct DevPoint {
  int step = 0;
  double spearman = 0.0;
};

struct EstimatorTrainReport {
  std::vector<TrainStep> steps;
  std::vector<DevPoint> dev;
  int best_step = 0;
  std::optional<double> best_spearman;
  int aux_batches = 0;
  int human_batches = 0;
};

using StepCallback = std::function<void(const TrainStep&)>;

// Adam on the selected loss; every batch comes from the auxiliary data with
// probability p_aux, otherwise from the human data.  With a dev set the
// parameters of the best (most negative) Spearman rho against TER are kept.
EstimatorTrainReport train_estimator(RewardEstimator& est, const EstimatorData& human,
                                     const EstimatorData& aux, std::span<const ScoredTranslation> dev,
                                     const EstimatorTrainConfig& cfg, const StepCallback& on_step = {});

struct EstimatorEvaluation {
  double spearman = 0.0;
  std::vector<double> predictions;
  std::vector<double> ter;
};

// Spearman rho between r_hat and sentence TER.
EstimatorEvaluation evaluate_estimator(const RewardEstimator& est,
                                       std::span<const ScoredTranslation> test,
                                       const metrics::MetricConfig& cfg = {});

}  // namespace bnmt::estimator
