#include "bnmt/ratings/sessions.hpp"

#include <algorithm>
#include <unordered_set>

#include "bnmt/common/error.hpp"
#include "bnmt/common/rng.hpp"
#include "bnmt/ratings/selection.hpp"

namespace bnmt::ratings {

SessionPlan build_sections(TaskKind kind, std::span<const std::string> ids,
                           const std::set<std::string>& repeat_ids, std::size_t n_sections,
                           std::uint64_t seed) {
  if (n_sections == 0) throw DataError("build_sections: n_sections must be positive");
  std::unordered_set<std::string> unique(ids.begin(), ids.end());
  if (unique.size() != ids.size()) throw DataError("build_sections: duplicate ids");
  for (const auto& r : repeat_ids) {
    if (!unique.count(r)) throw DataError("build_sections: repeat id '" + r + "' not among ids");
  }
  const std::size_t n_repeat = repeat_ids.size();
  const std::size_t n_single = ids.size() - n_repeat;
  if (n_single % n_sections != 0 || (2 * n_repeat) % n_sections != 0) {
    throw DataError("build_sections: infeasible quotas, " + std::to_string(n_single) +
                    " unrepeated and " + std::to_string(2 * n_repeat) +
                    " repeated occurrences are not divisible by " + std::to_string(n_sections) +
                    " sections");
  }
  if (n_repeat > 0 && n_sections < 2) {
    throw DataError("build_sections: repeats need at least two sections");
  }
  const std::size_t single_quota = n_single / n_sections;
  const std::size_t repeat_quota = 2 * n_repeat / n_sections;

  Rng rng(seed);
  std::vector<std::string> singles, repeats;
  for (const auto& id : ids) (repeat_ids.count(id) ? repeats : singles).push_back(id);
  std::shuffle(singles.begin(), singles.end(), rng);
  std::shuffle(repeats.begin(), repeats.end(), rng);

  // Occurrence stream R ++ R cut into consecutive blocks of repeat_quota: the
  // two copies of an id are n_repeat >= repeat_quota positions apart, so they
  // always fall into different blocks.
  std::vector<std::string> occurrences = repeats;
  occurrences.insert(occurrences.end(), repeats.begin(), repeats.end());

  SessionPlan plan;
  plan.task_kind = kind;
  plan.repeat_pool = repeat_ids;
  plan.sections.resize(n_sections);
  for (std::size_t s = 0; s < n_sections; ++s) {
    auto& section = plan.sections[s];
    section.reserve(single_quota + repeat_quota);
    for (std::size_t k = 0; k < single_quota; ++k) section.push_back(singles[s * single_quota + k]);
    for (std::size_t k = 0; k < repeat_quota; ++k) section.push_back(occurrences[s * repeat_quota + k]);
    std::shuffle(section.begin(), section.end(), rng);
  }
  // The block construction puts every second copy in a later section except
  // for the wrap-around block; shuffling sections restores a uniform order.
  std::shuffle(plan.sections.begin(), plan.sections.end(), rng);
  plan.validate();
  return plan;
}

std::set<std::string> choose_repeats(std::span<const std::string> ids, std::size_t n_repeat,
                                     std::uint64_t seed) {
  if (n_repeat > ids.size()) throw DataError("choose_repeats: more repeats than ids");
  std::vector<std::string> pool(ids.begin(), ids.end());
  std::sort(pool.begin(), pool.end());
  Rng rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_repeat)};
}

SessionPlan build_sections_cardinal(std::span<const TranslationItem> items, std::size_t n_repeat,
                                    std::size_t n_sections, std::uint64_t seed) {
  std::vector<std::string> ids;
  for (const auto& it : items) ids.push_back(it.item_id);
  auto repeats = choose_repeats(ids, n_repeat, derive_seed(seed, 1));
  return build_sections(TaskKind::cardinal, ids, repeats, n_sections, seed);
}

SessionPlan build_sections_pairwise(std::span<const ItemPair> pairs, std::size_t n_repeat,
                                    std::size_t n_sections, std::uint64_t seed) {
  std::vector<std::string> ids;
  for (const auto& p : pairs) {
    if (p.target_a == p.target_b) throw DataError("pair " + p.pair_id + " has identical targets");
    ids.push_back(p.pair_id);
  }
  auto repeats = choose_repeats(ids, n_repeat, derive_seed(seed, 1));
  return build_sections(TaskKind::pairwise, ids, repeats, n_sections, seed);
}

StudyPlans build_study_plans(std::span<const ItemPair> pairs, std::size_t n_repeat_pairs,
                             std::size_t n_sections, std::uint64_t seed) {
  StudyPlans out;
  out.pairwise = build_sections_pairwise(pairs, n_repeat_pairs, n_sections, seed);
  std::vector<std::string> item_ids;
  for (const auto& p : pairs) {
    item_ids.push_back(item_id_for(p.pair_id, false));
    item_ids.push_back(item_id_for(p.pair_id, true));
  }
  std::set<std::string> item_repeats;
  for (const auto& pid : out.pairwise.repeat_pool) {
    item_repeats.insert(item_id_for(pid, false));
    item_repeats.insert(item_id_for(pid, true));
  }
  out.cardinal = build_sections(TaskKind::cardinal, item_ids, item_repeats, n_sections,
                                derive_seed(seed, 2));
  return out;
}

SessionPlan reorder_within_sections(const SessionPlan& plan, std::uint64_t seed) {
  SessionPlan out = plan;
  Rng rng(seed);
  for (auto& s : out.sections) std::shuffle(s.begin(), s.end(), rng);
  return out;
}

}  // namespace bnmt::ratings
