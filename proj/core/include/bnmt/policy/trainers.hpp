#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnmt/policy/evaluation.hpp"
#include "bnmt/policy/training.hpp"

namespace bnmt::policy {

enum class SelectionMetric { bleu, gleu };

struct LoopConfig {
  int epochs = 1;
  int max_steps = 0;  // 0: no limit beyond epochs
  int batch_size = 20;
  nn::AdamConfig adam{.lr = 1e-3};
  double clip = 1.0;
  int eval_every = 0;  // steps; 0 evaluates once per epoch
  int patience = 0;    // evaluations without improvement; 0 disables
  SelectionMetric metric = SelectionMetric::gleu;
  double max_seconds = 0.0;  // 0: unlimited
  std::uint64_t seed = 1;
};

struct EvalPoint {
  int step = 0;
  double score = 0.0;
};

struct LoopReport {
  int steps = 0;
  std::vector<EvalPoint> dev;
  std::optional<EvalPoint> best;
  double seconds = 0.0;
};

using Progress = std::function<void(int step, const StepStats&)>;

// Greedy dev score used for model selection.
double dev_score(const Seq2SeqPolicy& p, std::span<const SentencePair> dev, SelectionMetric m);

// With a non-empty dev set the best evaluated parameters (including the
// starting point) are restored at the end.
LoopReport train_mle(Seq2SeqPolicy& p, std::span<const SentencePair> train,
                     std::span<const SentencePair> dev, const LoopConfig& cfg, const Progress& on_step = {});

LoopReport train_rl(Seq2SeqPolicy& p, std::span<const SentencePair> train, const RewardFn& reward,
                    std::span<const SentencePair> dev, const LoopConfig& cfg, const RLConfig& rl,
                    const Progress& on_step = {});

LoopReport train_opl(Seq2SeqPolicy& p, std::span<const LogEntry> log, std::span<const SentencePair> dev,
                     const LoopConfig& cfg, const Progress& on_step = {});

}  // namespace bnmt::policy
