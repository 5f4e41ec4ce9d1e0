#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bnmt/common/corpus.hpp"
#include "bnmt/metrics/metrics.hpp"
#include "bnmt/policy/decoding.hpp"
#include "bnmt/policy/model.hpp"

namespace bnmt::policy {

struct DecodeOptions {
  // Greedy when absent.
  std::optional<BeamConfig> beam;
};

std::vector<Tokens> translate_all(const Seq2SeqPolicy& p, std::span<const SentencePair> corpus,
                                  const DecodeOptions& opts = {});

struct CorpusScores {
  double bleu = 0.0;
  double gleu = 0.0;
  double chrf = 0.0;
  double ter = 0.0;
};

CorpusScores score_corpus(std::span<const Tokens> hyps, std::span<const Tokens> refs,
                          const metrics::MetricConfig& cfg = {});

struct PolicyEvaluation {
  CorpusScores scores;
  std::vector<Tokens> hypotheses;
};

PolicyEvaluation evaluate_policy(const Seq2SeqPolicy& p, std::span<const SentencePair> test,
                                 const DecodeOptions& opts = {}, const metrics::MetricConfig& cfg = {});

}  // namespace bnmt::policy
