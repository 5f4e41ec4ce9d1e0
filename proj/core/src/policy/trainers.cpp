#include "bnmt/policy/trainers.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "bnmt/common/error.hpp"

namespace bnmt::policy {

double dev_score(const Seq2SeqPolicy& p, std::span<const SentencePair> dev, SelectionMetric m) {
  const auto ev = evaluate_policy(p, dev);
  return m == SelectionMetric::bleu ? ev.scores.bleu : ev.scores.gleu;
}

namespace {

// Shared epoch/batch/evaluation scaffolding; `step` consumes one batch of
// indices into the training data.
LoopReport run_loop(Seq2SeqPolicy& p, std::size_t n_train, std::span<const SentencePair> dev,
                    const LoopConfig& cfg, const std::function<StepStats(std::span<const std::size_t>)>& step,
                    const Progress& on_step) {
  if (cfg.batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (cfg.epochs < 0 || cfg.max_steps < 0) throw UsageError("epochs and max_steps must be >= 0");
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  LoopReport rep;
  std::optional<nn::ParameterSet> best_params;
  int since_best = 0;
  auto evaluate = [&] {
    if (dev.empty()) return false;
    const EvalPoint pt{rep.steps, dev_score(p, dev, cfg.metric)};
    rep.dev.push_back(pt);
    if (!rep.best || pt.score > rep.best->score) {
      rep.best = pt;
      best_params = p.params();
      since_best = 0;
      return false;
    }
    ++since_best;
    return cfg.patience > 0 && since_best >= cfg.patience;
  };

  const bool will_train = n_train > 0 && cfg.epochs > 0;
  if (will_train) evaluate();
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  bool stop = false;
  for (int epoch = 0; epoch < cfg.epochs && !stop && n_train > 0; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < n_train && !stop; b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t e = std::min(n_train, b + static_cast<std::size_t>(cfg.batch_size));
      const auto stats = step(std::span<const std::size_t>(order.data() + b, e - b));
      ++rep.steps;
      if (!p.params().all_finite()) throw NumericalError("policy parameters diverged");
      if (on_step) on_step(rep.steps, stats);
      if (cfg.eval_every > 0 && rep.steps % cfg.eval_every == 0) stop = evaluate();
      if (cfg.max_steps > 0 && rep.steps >= cfg.max_steps) stop = true;
      if (cfg.max_seconds > 0.0 && elapsed() >= cfg.max_seconds) stop = true;
    }
    if (cfg.eval_every == 0 && !stop) stop = evaluate();
  }
  if (will_train && (rep.dev.empty() || rep.dev.back().step != rep.steps)) evaluate();
  if (best_params) {
    for (std::size_t i = 0; i < best_params->all().size(); ++i) {
      p.params().all()[i]->value = best_params->all()[i]->value;
    }
  }
  rep.seconds = elapsed();
  return rep;
}

}  // namespace

LoopReport train_mle(Seq2SeqPolicy& p, std::span<const SentencePair> train,
                     std::span<const SentencePair> dev, const LoopConfig& cfg, const Progress& on_step) {
  nn::Adam opt(cfg.adam);
  std::vector<SentencePair> batch;
  return run_loop(
      p, train.size(), dev, cfg,
      [&](std::span<const std::size_t> idx) {
        batch.clear();
        for (auto i : idx) batch.push_back(train[i]);
        return mle_step(p, opt, batch, cfg.clip);
      },
      on_step);
}

LoopReport train_rl(Seq2SeqPolicy& p, std::span<const SentencePair> train, const RewardFn& reward,
                    std::span<const SentencePair> dev, const LoopConfig& cfg, const RLConfig& rl,
                    const Progress& on_step) {
  nn::Adam opt(cfg.adam);
  Baseline baseline;
  Rng rng(derive_seed(cfg.seed, 0x5eed));
  RLConfig rc = rl;
  rc.clip = cfg.clip;
  std::vector<SentencePair> batch;
  return run_loop(
      p, train.size(), dev, cfg,
      [&](std::span<const std::size_t> idx) {
        batch.clear();
        for (auto i : idx) batch.push_back(train[i]);
        return rl_step(p, opt, batch, reward, rc, baseline, rng);
      },
      on_step);
}

LoopReport train_opl(Seq2SeqPolicy& p, std::span<const LogEntry> log, std::span<const SentencePair> dev,
                     const LoopConfig& cfg, const Progress& on_step) {
  nn::Adam opt(cfg.adam);
  std::vector<LogEntry> batch;
  return run_loop(
      p, log.size(), dev, cfg,
      [&](std::span<const std::size_t> idx) {
        batch.clear();
        for (auto i : idx) batch.push_back(log[i]);
        return opl_step(p, opt, batch, cfg.clip);
      },
      on_step);
}

}  // namespace bnmt::policy
