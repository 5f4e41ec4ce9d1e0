#pragma once

#include <span>
#include <string>
#include <vector>

#include "bnmt/common/tokens.hpp"

namespace bnmt::metrics {

struct MetricConfig {
  int max_ngram = 4;
  // Added to numerator and denominator of the n >= 2 precisions of sbleu.
  double smoothing_epsilon = 0.1;
  double chrf_beta = 3.0;
  int chrf_max_n = 6;
  bool ter_enable_shifts = true;
  int ter_max_shift_distance = 10;
  int ter_max_shift_length = 10;

  // Throws UsageError when a field is out of range.
  void validate() const;
};

// All sentence-level scores live in [0,1] (TER excepted).  Token types are
// either words (std::string) or vocabulary ids (int).

template <class T>
double sbleu(std::span<const T> hyp, std::span<const T> ref, const MetricConfig& cfg = {});

template <class T>
double gleu(std::span<const T> hyp, std::span<const T> ref, const MetricConfig& cfg = {});

// Number of word edits (substitutions, insertions, deletions and block shifts).
template <class T>
double ter_edits(std::span<const T> hyp, std::span<const T> ref, const MetricConfig& cfg = {});

template <class T>
double ter(std::span<const T> hyp, std::span<const T> ref, const MetricConfig& cfg = {});

// Character n-gram F-score over the whitespace-free concatenation of tokens.
double chrf(const Tokens& hyp, const Tokens& ref, const MetricConfig& cfg = {});

inline double sbleu(const Tokens& h, const Tokens& r, const MetricConfig& c = {}) {
  return sbleu<std::string>(h, r, c);
}
inline double gleu(const Tokens& h, const Tokens& r, const MetricConfig& c = {}) {
  return gleu<std::string>(h, r, c);
}
inline double ter(const Tokens& h, const Tokens& r, const MetricConfig& c = {}) {
  return ter<std::string>(h, r, c);
}
inline double sbleu(const std::vector<int>& h, const std::vector<int>& r, const MetricConfig& c = {}) {
  return sbleu<int>(h, r, c);
}
inline double gleu(const std::vector<int>& h, const std::vector<int>& r, const MetricConfig& c = {}) {
  return gleu<int>(h, r, c);
}

// Plain word-level Levenshtein distance.
template <class T>
int edit_distance(std::span<const T> a, std::span<const T> b);

// ---- corpus level ---------------------------------------------------------

// Additive per-sentence sufficient statistics for BLEU:
// [match_1, total_1, ..., match_N, total_N, hyp_len, ref_len].
std::vector<double> bleu_stats(const Tokens& hyp, const Tokens& ref, int max_ngram = 4);
// Unsmoothed BLEU from summed statistics.
double bleu_from_stats(std::span<const double> stats, int max_ngram = 4);

// Per-sentence statistics for corpus GLEU: [matches, hyp_ngrams, ref_ngrams].
std::vector<double> gleu_stats(const Tokens& hyp, const Tokens& ref, int max_ngram = 4);
double gleu_from_stats(std::span<const double> stats);

double corpus_bleu(std::span<const Tokens> hyps, std::span<const Tokens> refs,
                   const MetricConfig& cfg = {});
// min(precision, recall) with n-gram counts pooled over the corpus.
double corpus_gleu(std::span<const Tokens> hyps, std::span<const Tokens> refs,
                   const MetricConfig& cfg = {});
// Mean sentence chrF.
double corpus_chrf(std::span<const Tokens> hyps, std::span<const Tokens> refs,
                   const MetricConfig& cfg = {});
// Total edits over total reference length.
double corpus_ter(std::span<const Tokens> hyps, std::span<const Tokens> refs,
                  const MetricConfig& cfg = {});

}  // namespace bnmt::metrics
