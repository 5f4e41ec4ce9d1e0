#include "bnmt/policy/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bnmt/common/error.hpp"
#include "bnmt/policy/decoding.hpp"

namespace bnmt::policy {

using nn::Tape;
using nn::Var;

double mle_gradient(const Seq2SeqPolicy& p, std::span<const SentencePair> batch) {
  if (batch.empty()) throw UsageError("mle: empty batch");
  const double n = static_cast<double>(batch.size());
  double nll = 0.0;
  for (const auto& ex : batch) {
    Tape t;
    const auto enc = p.encode(t, p.source_ids(ex.source));
    Var lp = p.sequence_log_prob(t, enc, p.target_ids(ex.target));
    nll -= lp.scalar() / n;
    t.backward(lp, -1.0 / n);
  }
  return nll;
}

StepStats mle_step(Seq2SeqPolicy& p, nn::Adam& opt, std::span<const SentencePair> batch, double clip) {
  p.params().zero_grad();
  StepStats s;
  s.objective = mle_gradient(p, batch);
  s.samples = static_cast<int>(batch.size());
  s.grad_norm = clip > 0.0 ? p.params().clip_grad_norm(clip) : p.params().grad_norm();
  opt.step(p.params());
  return s;
}

RLGradient rl_gradient(const Seq2SeqPolicy& p, std::span<const SentencePair> batch,
                       const RewardFn& reward, const RLConfig& cfg, double baseline, Rng& rng) {
  if (batch.empty()) throw UsageError("rl: empty batch");
  if (cfg.k < 1) throw UsageError("rl: k must be >= 1");
  if (!(cfg.tau > 0.0)) throw UsageError("rl: tau must be > 0");

  struct Drawn {
    std::size_t example;
    std::vector<int> ids;
    double reward;
  };
  RLGradient out;
  std::vector<std::vector<int>> sources;
  std::vector<Drawn> drawn;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    sources.push_back(p.source_ids(batch[i].source));
    for (auto& smp : sample_translations(p, sources.back(), cfg.k, cfg.tau, rng)) {
      try {
        const double r = reward(batch[i], p.to_tokens(smp.ids));
        if (!std::isfinite(r)) throw NumericalError("reward is not finite");
        drawn.push_back({i, std::move(smp.ids), r});
        out.rewards.push_back(r);
      } catch (const std::exception& e) {
        ++out.stats.skipped;
        out.stats.warnings.push_back("reward failed for example " + std::to_string(i) + ": " + e.what());
      }
    }
  }
  out.stats.samples = static_cast<int>(drawn.size());
  if (drawn.empty()) return out;

  const double n = static_cast<double>(drawn.size());
  const double tau = cfg.tempered_gradient ? cfg.tau : 1.0;
  double total = 0.0;
  std::size_t d = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Tape t;
    const auto enc = p.encode(t, sources[i]);
    std::vector<std::pair<Var, double>> seeds;
    for (; d < drawn.size() && drawn[d].example == i; ++d) {
      total += drawn[d].reward;
      const double adv = drawn[d].reward - baseline;
      if (adv == 0.0) continue;
      seeds.emplace_back(p.sequence_log_prob(t, enc, drawn[d].ids, tau), adv / n);
    }
    if (!seeds.empty()) t.backward(seeds);
  }
  out.stats.objective = total / n;
  return out;
}

StepStats rl_step(Seq2SeqPolicy& p, nn::Adam& opt, std::span<const SentencePair> batch,
                  const RewardFn& reward, const RLConfig& cfg, Baseline& baseline, Rng& rng) {
  p.params().zero_grad();
  auto g = rl_gradient(p, batch, reward, cfg, baseline.mean, rng);
  g.stats.grad_norm = cfg.clip > 0.0 ? p.params().clip_grad_norm(cfg.clip) : p.params().grad_norm();
  if (g.stats.samples > 0) opt.step(p.params(), true);
  for (double r : g.rewards) baseline.update(r);
  return g.stats;
}

namespace {

// log p(y_h | x_h) for every entry, recorded on `t`.
std::vector<Var> log_probs(const Seq2SeqPolicy& p, Tape& t, std::span<const LogEntry> batch) {
  std::vector<Var> out;
  out.reserve(batch.size());
  for (const auto& e : batch) {
    validate(e);
    const auto enc = p.encode(t, p.source_ids(e.source));
    out.push_back(p.sequence_log_prob(t, enc, p.target_ids(e.translation)));
  }
  return out;
}

std::vector<double> normalized_weights(const std::vector<Var>& lps) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& v : lps) m = std::max(m, v.scalar());
  std::vector<double> w;
  double z = 0.0;
  for (const auto& v : lps) {
    w.push_back(std::exp(v.scalar() - m));
    z += w.back();
  }
  for (double& x : w) x /= z;
  return w;
}

double weighted_reward(std::span<const LogEntry> batch, const std::vector<double>& w) {
  double j = 0.0;
  for (std::size_t h = 0; h < batch.size(); ++h) j += batch[h].reward * w[h];
  return j;
}

}  // namespace

double opl_objective(const Seq2SeqPolicy& p, std::span<const LogEntry> batch) {
  if (batch.empty()) throw UsageError("opl: empty minibatch");
  Tape t(false);
  return weighted_reward(batch, normalized_weights(log_probs(p, t, batch)));
}

double opl_gradient(const Seq2SeqPolicy& p, std::span<const LogEntry> batch) {
  if (batch.empty()) throw UsageError("opl: empty minibatch");
  Tape t;
  const auto lps = log_probs(p, t, batch);
  const auto w = normalized_weights(lps);
  // d J / d log p_h = w_h (r_h - J), written as a sum of pairwise reward
  // differences so that equal rewards cancel exactly.
  std::vector<std::pair<Var, double>> seeds;
  for (std::size_t h = 0; h < batch.size(); ++h) {
    double adv = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) adv += w[b] * (batch[h].reward - batch[b].reward);
    if (adv != 0.0) seeds.emplace_back(lps[h], w[h] * adv);
  }
  if (!seeds.empty()) t.backward(seeds);
  return weighted_reward(batch, w);
}

StepStats opl_step(Seq2SeqPolicy& p, nn::Adam& opt, std::span<const LogEntry> batch, double clip) {
  p.params().zero_grad();
  StepStats s;
  s.objective = opl_gradient(p, batch);
  s.samples = static_cast<int>(batch.size());
  s.grad_norm = clip > 0.0 ? p.params().clip_grad_norm(clip) : p.params().grad_norm();
  opt.step(p.params(), true);
  return s;
}

}  // namespace bnmt::policy
