#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bnmt/estimator/losses.hpp"
#include "bnmt/metrics/metrics.hpp"
#include "bnmt/ratings/types.hpp"
#include "bnmt/reliability/matrix.hpp"

namespace bnmt::estimator {

// exp(s1) / (exp(s1) + exp(s2)) with s the sentence BLEU against `ref`.
double simulated_q(const Tokens& y1, const Tokens& y2, const Tokens& ref,
                   const metrics::MetricConfig& cfg = {});
double simulated_q_from_scores(double s1, double s2);

// Ties count half for each side.  Throws DataError when all counts are zero.
double human_q(int prefer_1, int prefer_2, int ties);

struct CardinalTargets {
  std::map<std::string, double> reward;  // unit id -> [0,1]
  std::vector<std::string> warnings;
};

// Per-rater Z-scores, averaged per unit, min-max rescaled to [0,1].
CardinalTargets prepare_cardinal_targets(const reliability::ReliabilityMatrix& raw);

// Pairwise judgments of all raters aggregated into one q per pair id
// (target A preferred = -1 code).
struct PairCounts {
  int prefer_a = 0;
  int prefer_b = 0;
  int ties = 0;
};
std::map<std::string, PairCounts> count_preferences(std::span<const ratings::RatingRecord> records);

RewardExample make_reward_example(const ratings::TranslationItem& item, double reward);
PreferencePair make_preference_pair(const ratings::ItemPair& pair, const PairCounts& counts);

// Produces `n` distinct ranked hypotheses for a source (e.g. beam search).
using RankedDecoder = std::function<std::vector<Tokens>(const Tokens& source, int n)>;

struct AuxData {
  std::vector<RewardExample> rewards;
  std::vector<PreferencePair> pairs;
};

struct AuxConfig {
  int n_ranks = 9;
  // 0 pairs every two distinct ranks of a source; otherwise at most this
  // many pairs per source, drawn with `seed`.
  int max_pairs_per_source = 0;
  std::uint64_t seed = 1;
  metrics::MetricConfig metric;
};

// Rewards are sBLEU of every rank against the reference; pairs carry
// simulated q.
AuxData make_aux_data(std::span<const Tokens> sources, std::span<const Tokens> references,
                      const RankedDecoder& decode, const AuxConfig& cfg);

}  // namespace bnmt::estimator
