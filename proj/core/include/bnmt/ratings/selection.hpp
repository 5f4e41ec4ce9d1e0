#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bnmt/metrics/metrics.hpp"
#include "bnmt/ratings/types.hpp"

namespace bnmt::ratings {

// Two system translations of the same source plus the reference.
struct CandidatePair {
  std::string pair_id;
  TranslationItem out_domain;
  TranslationItem in_domain;
  Tokens reference;
};

struct SelectionCriteria {
  std::size_t n_select = 400;
  // Reference length window, whitespace tokens, inclusive.
  std::size_t ref_len_lo = 20;
  std::size_t ref_len_hi = 40;
  // |len_a - len_b| / max(len_a, len_b)
  double max_relative_length_diff = 0.10;
  metrics::MetricConfig metric;  // chrF with beta = 3
};

struct ScoredCandidate {
  std::string pair_id;
  double chrf_a = 0.0;
  double chrf_b = 0.0;
  std::size_t len_a = 0;
  std::size_t len_b = 0;

  double chrf_gap() const;
  std::size_t length_diff() const;
  double relative_length_diff() const;
};

// Indices of `scored` ordered by chrF gap (desc), length difference (asc),
// pair id (asc).
std::vector<std::size_t> rank_candidates(std::span<const ScoredCandidate> scored);

// Filters identical pairs, references outside the length window and pairs of
// dissimilar length, then returns the n_select candidates with the largest
// chrF gap.  Throws DataError on shortage with the per-filter counts.
std::vector<ItemPair> select_rating_items(std::span<const CandidatePair> candidates,
                                          const SelectionCriteria& criteria);

// The two translations of every pair as separate items "<pair_id>.a" (out of
// domain) and "<pair_id>.b" (in domain).
std::vector<TranslationItem> split_pairs(std::span<const ItemPair> pairs);
std::string item_id_for(const std::string& pair_id, bool target_b);

}  // namespace bnmt::ratings
