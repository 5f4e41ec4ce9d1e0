#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bnmt/common/corpus.hpp"
#include "bnmt/common/rng.hpp"
#include "bnmt/nn/parameters.hpp"
#include "bnmt/policy/feedback_log.hpp"
#include "bnmt/policy/model.hpp"

namespace bnmt::policy {

struct StepStats {
  double objective = 0.0;
  double grad_norm = 0.0;  // before clipping
  int samples = 0;
  int skipped = 0;
  std::vector<std::string> warnings;
};

// ---- MLE -------------------------------------------------------------------

// Adds the gradient of the mean negative log-likelihood of the references;
// returns that mean.
double mle_gradient(const Seq2SeqPolicy& p, std::span<const SentencePair> batch);
// Descends the mean NLL with clipping at `clip` (<= 0 disables).
StepStats mle_step(Seq2SeqPolicy& p, nn::Adam& opt, std::span<const SentencePair> batch, double clip);

// ---- REINFORCE ---------------------------------------------------------------

struct RLConfig {
  int k = 5;
  double tau = 0.5;
  // Score function of the tempered distribution instead of the untempered one.
  bool tempered_gradient = false;
  double clip = 1.0;
  int batch_size = 20;
};

// Global running mean of all rewards seen.
struct Baseline {
  double mean = 0.0;
  long count = 0;
  void update(double r) {
    ++count;
    mean += (r - mean) / static_cast<double>(count);
  }
};

// Reward of a hypothesis for an example (source plus optional reference in
// `target`).  Exceptions skip the sample and produce a warning.
using RewardFn = std::function<double(const SentencePair& example, const Tokens& hypothesis)>;

struct RLGradient {
  StepStats stats;
  std::vector<double> rewards;
};

// Adds mean over samples of (r - baseline) * grad log p(y|x) to the
// parameter gradients.  Samples come from softmax(o / tau).
RLGradient rl_gradient(const Seq2SeqPolicy& p, std::span<const SentencePair> batch,
                       const RewardFn& reward, const RLConfig& cfg, double baseline, Rng& rng);
// Gradient, clipping, ascent, then the baseline absorbs the batch rewards.
StepStats rl_step(Seq2SeqPolicy& p, nn::Adam& opt, std::span<const SentencePair> batch,
                  const RewardFn& reward, const RLConfig& cfg, Baseline& baseline, Rng& rng);

// ---- off-policy learning from a log -------------------------------------------

// Objective sum_h r_h p(y_h|x_h) / sum_b p(y_b|x_b) over the minibatch;
// returns it and adds its gradient.
double opl_objective(const Seq2SeqPolicy& p, std::span<const LogEntry> batch);
double opl_gradient(const Seq2SeqPolicy& p, std::span<const LogEntry> batch);
StepStats opl_step(Seq2SeqPolicy& p, nn::Adam& opt, std::span<const LogEntry> batch, double clip);

}  // namespace bnmt::policy
