#include "bnmt/ratings/types.hpp"

#include <map>
#include <unordered_set>

#include "bnmt/common/error.hpp"

namespace bnmt::ratings {

std::size_t SessionPlan::total_assignments() const {
  std::size_t n = 0;
  for (const auto& s : sections) n += s.size();
  return n;
}

std::vector<PlanEntry> SessionPlan::flatten() const {
  std::vector<PlanEntry> out;
  out.reserve(total_assignments());
  std::map<std::string, int> seen;
  for (std::size_t s = 0; s < sections.size(); ++s) {
    for (std::size_t p = 0; p < sections[s].size(); ++p) {
      const auto& id = sections[s][p];
      out.push_back(PlanEntry{id, seen[id]++, s, p, out.size()});
    }
  }
  return out;
}

void SessionPlan::validate() const {
  std::map<std::string, int> counts;
  for (std::size_t s = 0; s < sections.size(); ++s) {
    std::unordered_set<std::string> in_section;
    for (const auto& id : sections[s]) {
      if (!in_section.insert(id).second) {
        throw DataError("plan: id '" + id + "' occurs twice in section " + std::to_string(s));
      }
      ++counts[id];
    }
  }
  for (const auto& id : repeat_pool) {
    if (counts[id] != 2) {
      throw DataError("plan: repeated id '" + id + "' occurs " + std::to_string(counts[id]) +
                      " times, expected 2");
    }
  }
  for (const auto& [id, n] : counts) {
    if (!repeat_pool.count(id) && n != 1) {
      throw DataError("plan: id '" + id + "' occurs " + std::to_string(n) + " times, expected 1");
    }
  }
}

bool value_in_range(TaskKind kind, int value) {
  if (kind == TaskKind::cardinal) return value >= 1 && value <= 5;
  return value >= -1 && value <= 1;
}

void validate_record(const RatingRecord& r) {
  if (r.rater_id.empty()) throw DataError("rating: empty rater_id");
  if (r.assignment_id.empty()) throw DataError("rating: empty assignment id");
  if (r.occurrence < 0 || r.occurrence > 1) throw DataError("rating: occurrence must be 0 or 1");
  if (!value_in_range(r.task_kind, r.value)) {
    throw DataError("rating: value " + std::to_string(r.value) + " out of range for " +
                    std::string(to_string(r.task_kind)) + " task");
  }
}

std::string_view to_string(SystemTag t) {
  return t == SystemTag::out_domain ? "out_domain" : "in_domain";
}

std::string_view to_string(TaskKind t) { return t == TaskKind::cardinal ? "cardinal" : "pairwise"; }

std::string_view to_string(PairwiseChoice c) {
  switch (c) {
    case PairwiseChoice::prefer_a: return "prefer_a";
    case PairwiseChoice::no_preference: return "no_preference";
    case PairwiseChoice::prefer_b: return "prefer_b";
  }
  return "no_preference";
}

SystemTag parse_system_tag(std::string_view s) {
  if (s == "out_domain") return SystemTag::out_domain;
  if (s == "in_domain") return SystemTag::in_domain;
  throw DataError("unknown system tag: " + std::string(s));
}

TaskKind parse_task_kind(std::string_view s) {
  if (s == "cardinal") return TaskKind::cardinal;
  if (s == "pairwise") return TaskKind::pairwise;
  throw DataError("unknown task kind: " + std::string(s));
}

PairwiseChoice parse_pairwise_choice(std::string_view s) {
  if (s == "prefer_a") return PairwiseChoice::prefer_a;
  if (s == "no_preference") return PairwiseChoice::no_preference;
  if (s == "prefer_b") return PairwiseChoice::prefer_b;
  throw DataError("unknown pairwise choice: " + std::string(s));
}

}  // namespace bnmt::ratings
