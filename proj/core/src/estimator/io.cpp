#include "bnmt/estimator/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "bnmt/common/error.hpp"

namespace bnmt::estimator {

using nlohmann::json;

namespace {

Tokens text(const json& j, const char* key) { return tokenize(j.at(key).get<std::string>()); }

template <class T, class F>
std::vector<T> read(std::istream& is, F&& parse) {
  std::vector<T> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(n) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

template <class T, class F>
std::vector<T> read_file(const std::filesystem::path& p, F&& parse) {
  std::ifstream is(p);
  if (!is) throw UsageError("cannot read " + p.string());
  try {
    return read<T>(is, parse);
  } catch (const DataError& e) {
    throw DataError(p.string() + " " + e.what());
  }
}

RewardExample reward_from(const json& j) {
  RewardExample e{text(j, "source"), text(j, "target"), j.at("reward").get<double>()};
  validate(e);
  return e;
}

PreferencePair pair_from(const json& j) {
  PreferencePair p{text(j, "source"), text(j, "target_1"), text(j, "target_2"), j.at("q").get<double>()};
  validate(p);
  return p;
}

ScoredTranslation scored_from(const json& j) {
  ScoredTranslation s{text(j, "source"), text(j, "hypothesis"), text(j, "reference")};
  if (s.source.empty() || s.hypothesis.empty() || s.reference.empty()) {
    throw DataError("scored translation with empty text");
  }
  return s;
}

}  // namespace

void export_rewards(std::ostream& os, std::span<const RewardExample> xs) {
  for (const auto& x : xs) {
    os << json{{"source", detokenize(x.source)}, {"target", detokenize(x.target)}, {"reward", x.reward}}.dump()
       << '\n';
  }
}

void export_pairs(std::ostream& os, std::span<const PreferencePair> xs) {
  for (const auto& x : xs) {
    os << json{{"source", detokenize(x.source)},
               {"target_1", detokenize(x.target_1)},
               {"target_2", detokenize(x.target_2)},
               {"q", x.q}}
              .dump()
       << '\n';
  }
}

void export_scored(std::ostream& os, std::span<const ScoredTranslation> xs) {
  for (const auto& x : xs) {
    os << json{{"source", detokenize(x.source)},
               {"hypothesis", detokenize(x.hypothesis)},
               {"reference", detokenize(x.reference)}}
              .dump()
       << '\n';
  }
}

std::vector<RewardExample> import_rewards(std::istream& is) { return read<RewardExample>(is, reward_from); }
std::vector<PreferencePair> import_pairs(std::istream& is) { return read<PreferencePair>(is, pair_from); }
std::vector<ScoredTranslation> import_scored(std::istream& is) {
  return read<ScoredTranslation>(is, scored_from);
}

std::vector<RewardExample> import_rewards_file(const std::filesystem::path& p) {
  return read_file<RewardExample>(p, reward_from);
}
std::vector<PreferencePair> import_pairs_file(const std::filesystem::path& p) {
  return read_file<PreferencePair>(p, pair_from);
}
std::vector<ScoredTranslation> import_scored_file(const std::filesystem::path& p) {
  return read_file<ScoredTranslation>(p, scored_from);
}

}  // namespace bnmt::estimator
