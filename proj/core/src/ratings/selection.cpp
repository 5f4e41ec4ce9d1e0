#include "bnmt/ratings/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "bnmt/common/error.hpp"

namespace bnmt::ratings {

double ScoredCandidate::chrf_gap() const { return std::abs(chrf_a - chrf_b); }

std::size_t ScoredCandidate::length_diff() const {
  return len_a > len_b ? len_a - len_b : len_b - len_a;
}

double ScoredCandidate::relative_length_diff() const {
  const auto longest = std::max(len_a, len_b);
  return longest == 0 ? 0.0 : static_cast<double>(length_diff()) / static_cast<double>(longest);
}

std::vector<std::size_t> rank_candidates(std::span<const ScoredCandidate> scored) {
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const auto& a = scored[i];
    const auto& b = scored[j];
    if (a.chrf_gap() != b.chrf_gap()) return a.chrf_gap() > b.chrf_gap();
    if (a.length_diff() != b.length_diff()) return a.length_diff() < b.length_diff();
    return a.pair_id < b.pair_id;
  });
  return order;
}

std::vector<ItemPair> select_rating_items(std::span<const CandidatePair> candidates,
                                          const SelectionCriteria& criteria) {
  criteria.metric.validate();
  std::set<std::string> ids;
  std::size_t identical = 0, out_of_window = 0, length_mismatch = 0;
  std::vector<ScoredCandidate> scored;
  std::vector<const CandidatePair*> eligible;
  for (const auto& c : candidates) {
    if (c.reference.empty()) throw DataError("candidate " + c.pair_id + " has no reference");
    if (c.out_domain.target.empty() || c.in_domain.target.empty()) {
      throw DataError("candidate " + c.pair_id + " has an empty translation");
    }
    if (!ids.insert(c.pair_id).second) throw DataError("duplicate pair id " + c.pair_id);
    if (c.out_domain.target == c.in_domain.target) {
      ++identical;
      continue;
    }
    const auto ref_len = c.reference.size();
    if (ref_len < criteria.ref_len_lo || ref_len > criteria.ref_len_hi) {
      ++out_of_window;
      continue;
    }
    ScoredCandidate s{c.pair_id, 0.0, 0.0, c.out_domain.target.size(), c.in_domain.target.size()};
    if (s.relative_length_diff() > criteria.max_relative_length_diff) {
      ++length_mismatch;
      continue;
    }
    s.chrf_a = metrics::chrf(c.out_domain.target, c.reference, criteria.metric);
    s.chrf_b = metrics::chrf(c.in_domain.target, c.reference, criteria.metric);
    scored.push_back(std::move(s));
    eligible.push_back(&c);
  }
  if (scored.size() < criteria.n_select) {
    throw DataError("item selection shortage: requested " + std::to_string(criteria.n_select) +
                    ", eligible " + std::to_string(scored.size()) + " (input " +
                    std::to_string(candidates.size()) + ", identical " + std::to_string(identical) +
                    ", reference length outside window " + std::to_string(out_of_window) +
                    ", length mismatch " + std::to_string(length_mismatch) + ")");
  }
  const auto order = rank_candidates(scored);
  std::vector<ItemPair> out;
  out.reserve(criteria.n_select);
  for (std::size_t k = 0; k < criteria.n_select; ++k) {
    const auto& c = *eligible[order[k]];
    out.push_back(ItemPair{c.pair_id, c.out_domain.source, c.out_domain.target, c.in_domain.target,
                           c.reference});
  }
  return out;
}

std::string item_id_for(const std::string& pair_id, bool target_b) {
  return pair_id + (target_b ? ".b" : ".a");
}

std::vector<TranslationItem> split_pairs(std::span<const ItemPair> pairs) {
  std::vector<TranslationItem> out;
  out.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    out.push_back({item_id_for(p.pair_id, false), p.source, p.target_a, SystemTag::out_domain, p.reference});
    out.push_back({item_id_for(p.pair_id, true), p.source, p.target_b, SystemTag::in_domain, p.reference});
  }
  return out;
}

}  // namespace bnmt::ratings
