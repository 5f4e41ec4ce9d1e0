#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bnmt/common/corpus.hpp"
#include "bnmt/common/rng.hpp"
#include "bnmt/estimator/model.hpp"
#include "bnmt/estimator/targets.hpp"
#include "bnmt/estimator/training.hpp"
#include "bnmt/metrics/metrics.hpp"
#include "bnmt/policy/feedback_log.hpp"
#include "bnmt/policy/model.hpp"
#include "bnmt/policy/training.hpp"

// Simulated feedback: references stand in for raters.
namespace bnmt::simulation {

struct SampleConfig {
  int samples_per_source = 2;
  double tau = 1.0;
  metrics::MetricConfig metric;
};

// Sampled translations of each source with sBLEU rewards; the two samples of
// a source form a preference pair with simulated q when they differ.  Empty
// samples are dropped.
estimator::EstimatorData simulate_ratings(const policy::Seq2SeqPolicy& p, std::span<const SentencePair> corpus,
                                          const SampleConfig& cfg, Rng& rng);

// One sampled translation per source with its reference, for Spearman
// evaluation of an estimator. Empty samples are dropped.
std::vector<estimator::ScoredTranslation> sample_scored(const policy::Seq2SeqPolicy& p,
                                                         std::span<const SentencePair> corpus, double tau,
                                                         Rng& rng);

enum class LogReward { sbleu, gleu };

// Greedy translations of a deterministic logging policy with metric rewards.
policy::FeedbackLog logged_feedback(const policy::Seq2SeqPolicy& logger, std::span<const SentencePair> corpus,
                                    LogReward reward, const metrics::MetricConfig& cfg = {});

// Beam ranks of the policy.
estimator::RankedDecoder beam_ranks(const policy::Seq2SeqPolicy& p);

policy::RewardFn direct_reward(LogReward metric, const metrics::MetricConfig& cfg = {});
// r_hat of the estimator; an empty hypothesis earns 0.
policy::RewardFn estimated_reward(const estimator::RewardEstimator& est);

}  // namespace bnmt::simulation
