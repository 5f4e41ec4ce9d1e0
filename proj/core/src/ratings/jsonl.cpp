#include "bnmt/ratings/jsonl.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

#include "bnmt/common/error.hpp"

namespace bnmt::ratings {

using nlohmann::json;

namespace {

json tokens_json(const Tokens& t) { return detokenize(t); }
Tokens tokens_from(const json& j) { return tokenize(j.get<std::string>()); }

json record_json(const RatingRecord& r) {
  json j;
  j["rater_id"] = r.rater_id;
  j["assignment_id"] = r.assignment_id;
  j["occurrence"] = r.occurrence;
  j["task_kind"] = std::string(to_string(r.task_kind));
  if (r.task_kind == TaskKind::cardinal) {
    j["value"] = r.value;
  } else {
    j["value"] = std::string(to_string(static_cast<PairwiseChoice>(r.value)));
  }
  j["section_index"] = r.section_index;
  j["timestamp_ms"] = r.timestamp_ms;
  return j;
}

RatingRecord record_from(const json& j) {
  RatingRecord r;
  r.rater_id = j.at("rater_id").get<std::string>();
  r.assignment_id = j.at("assignment_id").get<std::string>();
  r.occurrence = j.value("occurrence", 0);
  r.task_kind = parse_task_kind(j.at("task_kind").get<std::string>());
  const auto& v = j.at("value");
  if (r.task_kind == TaskKind::cardinal) {
    if (!v.is_number_integer()) throw DataError("cardinal value must be an integer");
    r.value = v.get<int>();
  } else if (v.is_string()) {
    r.value = static_cast<int>(parse_pairwise_choice(v.get<std::string>()));
  } else {
    if (!v.is_number_integer()) throw DataError("pairwise value must be a choice name or -1/0/1");
    r.value = v.get<int>();
  }
  r.section_index = j.value("section_index", std::size_t{0});
  r.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
  validate_record(r);
  return r;
}

json item_json(const TranslationItem& it) {
  json j{{"item_id", it.item_id},
         {"source", tokens_json(it.source)},
         {"target", tokens_json(it.target)},
         {"system_tag", std::string(to_string(it.system_tag))}};
  if (it.reference) j["reference"] = tokens_json(*it.reference);
  return j;
}

TranslationItem item_from(const json& j) {
  TranslationItem it;
  it.item_id = j.at("item_id").get<std::string>();
  it.source = tokens_from(j.at("source"));
  it.target = tokens_from(j.at("target"));
  it.system_tag = parse_system_tag(j.at("system_tag").get<std::string>());
  if (j.contains("reference") && !j["reference"].is_null()) it.reference = tokens_from(j["reference"]);
  if (it.item_id.empty() || it.source.empty() || it.target.empty()) {
    throw DataError("item needs an id, a source and a target");
  }
  return it;
}

json pair_json(const ItemPair& p) {
  json j{{"pair_id", p.pair_id},
         {"source", tokens_json(p.source)},
         {"target_a", tokens_json(p.target_a)},
         {"target_b", tokens_json(p.target_b)}};
  if (p.reference) j["reference"] = tokens_json(*p.reference);
  return j;
}

ItemPair pair_from(const json& j) {
  ItemPair p;
  p.pair_id = j.at("pair_id").get<std::string>();
  p.source = tokens_from(j.at("source"));
  p.target_a = tokens_from(j.at("target_a"));
  p.target_b = tokens_from(j.at("target_b"));
  if (j.contains("reference") && !j["reference"].is_null()) p.reference = tokens_from(j["reference"]);
  if (p.target_a == p.target_b) throw DataError("pair " + p.pair_id + " has identical targets");
  return p;
}

template <class F>
auto parse_line(std::string_view line, F&& f) {
  try {
    return f(json::parse(line));
  } catch (const json::exception& e) {
    throw DataError(e.what());
  }
}

template <class T, class F>
std::vector<T> read_lines(std::istream& is, F&& f) {
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_line(line, f));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::string to_json_line(const RatingRecord& r) { return record_json(r).dump(); }
std::string to_json_line(const TranslationItem& item) { return item_json(item).dump(); }
std::string to_json_line(const ItemPair& pair) { return pair_json(pair).dump(); }

RatingRecord rating_from_json(std::string_view line) { return parse_line(line, record_from); }
TranslationItem item_from_json(std::string_view line) { return parse_line(line, item_from); }
ItemPair pair_from_json(std::string_view line) { return parse_line(line, pair_from); }

void export_jsonl(std::ostream& os, std::span<const RatingRecord> records) {
  for (const auto& r : records) os << to_json_line(r) << '\n';
}
void export_jsonl(std::ostream& os, std::span<const TranslationItem> items) {
  for (const auto& i : items) os << to_json_line(i) << '\n';
}
void export_jsonl(std::ostream& os, std::span<const ItemPair> pairs) {
  for (const auto& p : pairs) os << to_json_line(p) << '\n';
}

std::vector<RatingRecord> import_ratings(std::istream& is) {
  return read_lines<RatingRecord>(is, record_from);
}
std::vector<TranslationItem> import_items(std::istream& is) {
  return read_lines<TranslationItem>(is, item_from);
}
std::vector<ItemPair> import_pairs(std::istream& is) { return read_lines<ItemPair>(is, pair_from); }

void export_plan(std::ostream& os, const SessionPlan& plan) {
  json header{{"task_kind", std::string(to_string(plan.task_kind))},
              {"repeat_pool", plan.repeat_pool},
              {"n_sections", plan.sections.size()}};
  os << header.dump() << '\n';
  for (std::size_t s = 0; s < plan.sections.size(); ++s) {
    os << json{{"section", s}, {"ids", plan.sections[s]}}.dump() << '\n';
  }
}

SessionPlan import_plan(std::istream& is) {
  SessionPlan plan;
  std::size_t n_sections = 0;
  bool have_header = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      if (!have_header) {
        plan.task_kind = parse_task_kind(j.at("task_kind").get<std::string>());
        plan.repeat_pool = j.at("repeat_pool").get<std::set<std::string>>();
        n_sections = j.at("n_sections").get<std::size_t>();
        have_header = true;
        continue;
      }
      const auto s = j.at("section").get<std::size_t>();
      if (s != plan.sections.size()) throw DataError("sections out of order");
      plan.sections.push_back(j.at("ids").get<std::vector<std::string>>());
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw DataError("plan: missing header line");
  if (plan.sections.size() != n_sections) throw DataError("plan: section count mismatch");
  plan.validate();
  return plan;
}

}  // namespace bnmt::ratings
