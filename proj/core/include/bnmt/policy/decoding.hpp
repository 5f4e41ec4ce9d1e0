#pragma once

#include <span>
#include <vector>

#include "bnmt/common/rng.hpp"
#include "bnmt/policy/model.hpp"

namespace bnmt::policy {

// Generated ids end with </s> unless the length limit was hit first.
struct Hypothesis {
  std::vector<int> ids;
  double log_prob = 0.0;

  bool finished() const;
  Tokens tokens(const Seq2SeqPolicy& p) const { return p.to_tokens(ids); }
};

struct Sample {
  std::vector<int> ids;
  double log_prob = 0.0;           // untempered
  double tempered_log_prob = 0.0;  // under softmax(o / tau)
};

Hypothesis greedy_decode(const Seq2SeqPolicy& p, std::span<const int> source);
Tokens greedy_translate(const Seq2SeqPolicy& p, const Tokens& source);

// Ancestral sampling from softmax(o / tau); duplicates are kept.
std::vector<Sample> sample_translations(const Seq2SeqPolicy& p, std::span<const int> source, int k,
                                        double tau, Rng& rng);

struct BeamConfig {
  int width = 10;
  // Rank finished hypotheses by log-prob per symbol instead of the total.
  bool length_normalize = false;
};

// Distinct hypotheses, best first.  The beam shrinks by one for every
// hypothesis that emits </s>; hypotheses still open at the length limit
// are closed there.
std::vector<Hypothesis> beam_decode(const Seq2SeqPolicy& p, std::span<const int> source,
                                    const BeamConfig& cfg);
Tokens beam_translate(const Seq2SeqPolicy& p, const Tokens& source, const BeamConfig& cfg);

}  // namespace bnmt::policy
