#include "bnmt/estimator/targets.hpp"

#include <algorithm>
#include <cmath>

#include "bnmt/common/error.hpp"
#include "bnmt/common/rng.hpp"
#include "bnmt/reliability/alpha.hpp"

namespace bnmt::estimator {

double simulated_q_from_scores(double s1, double s2) {
  // exp(s1)/(exp(s1)+exp(s2)) = 1/(1+exp(s2-s1))
  return 1.0 / (1.0 + std::exp(s2 - s1));
}

double simulated_q(const Tokens& y1, const Tokens& y2, const Tokens& ref,
                   const metrics::MetricConfig& cfg) {
  return simulated_q_from_scores(metrics::sbleu(y1, ref, cfg), metrics::sbleu(y2, ref, cfg));
}

double human_q(int prefer_1, int prefer_2, int ties) {
  if (prefer_1 < 0 || prefer_2 < 0 || ties < 0) throw DataError("negative preference count");
  const int total = prefer_1 + prefer_2 + ties;
  if (total == 0) throw DataError("human_q: no judgments for this pair");
  return (prefer_1 + 0.5 * ties) / total;
}

CardinalTargets prepare_cardinal_targets(const reliability::ReliabilityMatrix& raw) {
  CardinalTargets out;
  auto norm = reliability::zscore_normalize(raw);
  out.warnings = std::move(norm.warnings);
  const auto by_unit = norm.matrix.values_by_unit();
  const auto& units = norm.matrix.units();
  std::vector<double> means;
  for (const auto& vals : by_unit) {
    double s = 0.0;
    for (double v : vals) s += v;
    means.push_back(vals.empty() ? 0.0 : s / static_cast<double>(vals.size()));
  }
  if (means.empty()) return out;
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  const double a = *lo, b = *hi;
  if (!(b > a)) out.warnings.push_back("all item means identical; every target set to 0.5");
  for (std::size_t u = 0; u < units.size(); ++u) {
    out.reward[units[u]] = b > a ? (means[u] - a) / (b - a) : 0.5;
  }
  return out;
}

std::map<std::string, PairCounts> count_preferences(std::span<const ratings::RatingRecord> records) {
  std::map<std::string, PairCounts> out;
  for (const auto& r : records) {
    if (r.task_kind != ratings::TaskKind::pairwise) continue;
    auto& c = out[r.assignment_id];
    if (r.value < 0) {
      ++c.prefer_a;
    } else if (r.value > 0) {
      ++c.prefer_b;
    } else {
      ++c.ties;
    }
  }
  return out;
}

RewardExample make_reward_example(const ratings::TranslationItem& item, double reward) {
  RewardExample e{item.source, item.target, reward};
  validate(e);
  return e;
}

PreferencePair make_preference_pair(const ratings::ItemPair& pair, const PairCounts& counts) {
  PreferencePair p{pair.source, pair.target_a, pair.target_b,
                   human_q(counts.prefer_a, counts.prefer_b, counts.ties)};
  validate(p);
  return p;
}

AuxData make_aux_data(std::span<const Tokens> sources, std::span<const Tokens> references,
                      const RankedDecoder& decode, const AuxConfig& cfg) {
  if (sources.size() != references.size()) throw DataError("aux data: source/reference counts differ");
  if (cfg.n_ranks < 1) throw UsageError("aux data: n_ranks must be >= 1");
  AuxData out;
  Rng rng(cfg.seed);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto hyps = decode(sources[i], cfg.n_ranks);
    std::vector<double> scores;
    for (const auto& h : hyps) {
      const double s = h.empty() ? 0.0 : metrics::sbleu(h, references[i], cfg.metric);
      scores.push_back(s);
      if (!h.empty()) out.rewards.push_back({sources[i], h, s});
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < hyps.size(); ++a) {
      for (std::size_t b = a + 1; b < hyps.size(); ++b) {
        if (hyps[a] != hyps[b] && !hyps[a].empty() && !hyps[b].empty()) pairs.emplace_back(a, b);
      }
    }
    if (cfg.max_pairs_per_source > 0 &&
        pairs.size() > static_cast<std::size_t>(cfg.max_pairs_per_source)) {
      std::shuffle(pairs.begin(), pairs.end(), rng);
      pairs.resize(static_cast<std::size_t>(cfg.max_pairs_per_source));
    }
    for (auto [a, b] : pairs) {
      out.pairs.push_back({sources[i], hyps[a], hyps[b], simulated_q_from_scores(scores[a], scores[b])});
    }
  }
  return out;
}

}  // namespace bnmt::estimator
