#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bnmt/common/tokens.hpp"

namespace bnmt::ratings {

enum class SystemTag { out_domain, in_domain };
enum class TaskKind { cardinal, pairwise };

// Pairwise outcomes carry their ordinal code: target A = -1, B = +1.
enum class PairwiseChoice : int { prefer_a = -1, no_preference = 0, prefer_b = 1 };

struct TranslationItem {
  std::string item_id;
  Tokens source;
  Tokens target;
  SystemTag system_tag = SystemTag::out_domain;
  std::optional<Tokens> reference;

  friend bool operator==(const TranslationItem&, const TranslationItem&) = default;
};

struct ItemPair {
  std::string pair_id;
  Tokens source;
  Tokens target_a;
  Tokens target_b;
  std::optional<Tokens> reference;

  friend bool operator==(const ItemPair&, const ItemPair&) = default;
};

// One position in a rater's session.
struct PlanEntry {
  std::string id;
  int occurrence = 0;  // 0 for the first showing, 1 for the repeat
  std::size_t section = 0;
  std::size_t position = 0;  // within the section
  std::size_t index = 0;     // within the whole session
};

struct SessionPlan {
  TaskKind task_kind = TaskKind::cardinal;
  std::vector<std::vector<std::string>> sections;
  std::set<std::string> repeat_pool;

  std::size_t total_assignments() const;
  // Session order with occurrence indices resolved.
  std::vector<PlanEntry> flatten() const;
  // Throws DataError naming the first violated invariant.
  void validate() const;

  friend bool operator==(const SessionPlan&, const SessionPlan&) = default;
};

struct RatingRecord {
  std::string rater_id;
  std::string assignment_id;  // item_id (cardinal) or pair_id (pairwise)
  int occurrence = 0;
  TaskKind task_kind = TaskKind::cardinal;
  // 1..5 for cardinal; the PairwiseChoice code for pairwise.
  int value = 0;
  std::size_t section_index = 0;
  std::int64_t timestamp_ms = 0;

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

bool value_in_range(TaskKind kind, int value);
// Throws DataError for an illegal value or empty identifiers.
void validate_record(const RatingRecord& r);

std::string_view to_string(SystemTag t);
std::string_view to_string(TaskKind t);
std::string_view to_string(PairwiseChoice c);
SystemTag parse_system_tag(std::string_view s);
TaskKind parse_task_kind(std::string_view s);
PairwiseChoice parse_pairwise_choice(std::string_view s);

}  // namespace bnmt::ratings
