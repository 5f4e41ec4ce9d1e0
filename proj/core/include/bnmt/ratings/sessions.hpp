#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bnmt/ratings/types.hpp"

namespace bnmt::ratings {

// Splits ids into n_sections equal sections.  Each id in repeat_ids appears
// twice, in two different sections; all other ids once.  Every section gets
// the same number of repeated and unrepeated occurrences.  Deterministic in
// seed.  Throws DataError when the quotas do not divide evenly.
SessionPlan build_sections(TaskKind kind, std::span<const std::string> ids,
                           const std::set<std::string>& repeat_ids, std::size_t n_sections,
                           std::uint64_t seed);

// Picks n_repeat ids uniformly at random (seeded).
std::set<std::string> choose_repeats(std::span<const std::string> ids, std::size_t n_repeat,
                                     std::uint64_t seed);

// n_repeat counts individual translations.
SessionPlan build_sections_cardinal(std::span<const TranslationItem> items, std::size_t n_repeat,
                                    std::size_t n_sections, std::uint64_t seed);
SessionPlan build_sections_pairwise(std::span<const ItemPair> pairs, std::size_t n_repeat,
                                    std::size_t n_sections, std::uint64_t seed);

// Both studies at once: the pairwise repeat pool is drawn from the pairs and
// the cardinal repeat pool is made of both translations of those pairs.
struct StudyPlans {
  SessionPlan cardinal;
  SessionPlan pairwise;
};
StudyPlans build_study_plans(std::span<const ItemPair> pairs, std::size_t n_repeat_pairs,
                             std::size_t n_sections, std::uint64_t seed);

// Same sections, each shuffled independently; the plan stays valid.
SessionPlan reorder_within_sections(const SessionPlan& plan, std::uint64_t seed);

}  // namespace bnmt::ratings
