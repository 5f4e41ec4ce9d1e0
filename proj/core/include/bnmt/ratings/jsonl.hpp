#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bnmt/ratings/types.hpp"

namespace bnmt::ratings {

// One UTF-8 JSON object per line.  Readers skip blank lines and report the
// 1-based line number of the first malformed record in a DataError.

std::string to_json_line(const RatingRecord& r);
std::string to_json_line(const TranslationItem& item);
std::string to_json_line(const ItemPair& pair);

RatingRecord rating_from_json(std::string_view line);
TranslationItem item_from_json(std::string_view line);
ItemPair pair_from_json(std::string_view line);

void export_jsonl(std::ostream& os, std::span<const RatingRecord> records);
void export_jsonl(std::ostream& os, std::span<const TranslationItem> items);
void export_jsonl(std::ostream& os, std::span<const ItemPair> pairs);

std::vector<RatingRecord> import_ratings(std::istream& is);
std::vector<TranslationItem> import_items(std::istream& is);
std::vector<ItemPair> import_pairs(std::istream& is);

// Header line {"task_kind", "repeat_pool", "n_sections"} followed by one
// {"section", "ids"} line per section.
void export_plan(std::ostream& os, const SessionPlan& plan);
SessionPlan import_plan(std::istream& is);

}  // namespace bnmt::ratings
