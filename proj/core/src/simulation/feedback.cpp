#include "bnmt/simulation/feedback.hpp"

#include "bnmt/common/error.hpp"
#include "bnmt/policy/decoding.hpp"

namespace bnmt::simulation {

estimator::EstimatorData simulate_ratings(const policy::Seq2SeqPolicy& p, std::span<const SentencePair> corpus,
                                          const SampleConfig& cfg, Rng& rng) {
  if (cfg.samples_per_source < 1) throw UsageError("samples_per_source must be >= 1");
  estimator::EstimatorData out;
  for (const auto& ex : corpus) {
    std::vector<Tokens> kept;
    for (const auto& s : policy::sample_translations(p, p.source_ids(ex.source), cfg.samples_per_source, cfg.tau, rng)) {
      auto t = p.to_tokens(s.ids);
      if (t.empty()) continue;
      out.rewards.push_back({ex.source, t, metrics::sbleu(t, ex.target, cfg.metric)});
      kept.push_back(std::move(t));
    }
    for (std::size_t i = 0; i + 1 < kept.size(); i += 2) {
      if (kept[i] == kept[i + 1]) continue;
      out.pairs.push_back({ex.source, kept[i], kept[i + 1], estimator::simulated_q(kept[i], kept[i + 1], ex.target, cfg.metric)});
    }
  }
  return out;
}

std::vector<estimator::ScoredTranslation> sample_scored(const policy::Seq2SeqPolicy& p,
                                                         std::span<const SentencePair> corpus, double tau,
                                                         Rng& rng) {
  std::vector<estimator::ScoredTranslation> out;
  for (const auto& ex : corpus) {
    const auto s = policy::sample_translations(p, p.source_ids(ex.source), 1, tau, rng);
    auto t = p.to_tokens(s[0].ids);
    if (!t.empty()) out.push_back({ex.source, std::move(t), ex.target});
  }
  return out;
}

policy::FeedbackLog logged_feedback(const policy::Seq2SeqPolicy& logger, std::span<const SentencePair> corpus,
                                    LogReward reward, const metrics::MetricConfig& cfg) {
  const auto score = direct_reward(reward, cfg);
  policy::FeedbackLog log;
  for (const auto& ex : corpus) {
    auto t = policy::greedy_translate(logger, ex.source);
    if (t.empty()) continue;
    const double r = score(ex, t);
    log.push_back({ex.source, std::move(t), r});
  }
  return log;
}

estimator::RankedDecoder beam_ranks(const policy::Seq2SeqPolicy& p) {
  return [&p](const Tokens& source, int n) {
    std::vector<Tokens> out;
    for (const auto& h : policy::beam_decode(p, p.source_ids(source), {.width = n})) out.push_back(h.tokens(p));
    return out;
  };
}

policy::RewardFn direct_reward(LogReward metric, const metrics::MetricConfig& cfg) {
  return [metric, cfg](const SentencePair& ex, const Tokens& h) {
    if (h.empty()) return 0.0;
    return metric == LogReward::gleu ? metrics::gleu(h, ex.target, cfg) : metrics::sbleu(h, ex.target, cfg);
  };
}

policy::RewardFn estimated_reward(const estimator::RewardEstimator& est) {
  return [&est](const SentencePair& ex, const Tokens& h) { return h.empty() ? 0.0 : est.predict(ex.source, h); };
}

}  // namespace bnmt::simulation
