#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "bnmt/estimator/losses.hpp"
#include "bnmt/estimator/training.hpp"

namespace bnmt::estimator {

// Line-delimited JSON, text fields whitespace-tokenized:
//   {"source", "target", "reward"}
//   {"source", "target_1", "target_2", "q"}
//   {"source", "hypothesis", "reference"}
void export_rewards(std::ostream& os, std::span<const RewardExample> xs);
void export_pairs(std::ostream& os, std::span<const PreferencePair> xs);
void export_scored(std::ostream& os, std::span<const ScoredTranslation> xs);

std::vector<RewardExample> import_rewards(std::istream& is);
std::vector<PreferencePair> import_pairs(std::istream& is);
std::vector<ScoredTranslation> import_scored(std::istream& is);

std::vector<RewardExample> import_rewards_file(const std::filesystem::path& p);
std::vector<PreferencePair> import_pairs_file(const std::filesystem::path& p);
std::vector<ScoredTranslation> import_scored_file(const std::filesystem::path& p);

}  // namespace bnmt::estimator
