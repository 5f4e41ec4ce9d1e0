#include "bnmt/policy/feedback_log.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "bnmt/common/error.hpp"

namespace bnmt::policy {

void validate(const LogEntry& e) {
  if (!(e.reward >= 0.0 && e.reward <= 1.0)) throw DataError("feedback reward outside [0,1]");
  if (e.source.empty() || e.translation.empty()) throw DataError("feedback entry with empty text");
}

void export_log(std::ostream& os, std::span<const LogEntry> log) {
  for (const auto& e : log) {
    nlohmann::json j;
    j["source"] = detokenize(e.source);
    j["translation"] = detokenize(e.translation);
    j["reward"] = e.reward;
    os << j.dump() << '\n';
  }
}

FeedbackLog import_log(std::istream& is) {
  FeedbackLog out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      LogEntry e{tokenize(j.at("source").get<std::string>()),
                 tokenize(j.at("translation").get<std::string>()), j.at("reward").get<double>()};
      validate(e);
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("feedback log line " + std::to_string(n) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("feedback log line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

FeedbackLog import_log_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read " + path.string());
  return import_log(is);
}

}  // namespace bnmt::policy
