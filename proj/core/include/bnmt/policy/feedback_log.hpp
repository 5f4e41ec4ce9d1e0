#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "bnmt/common/tokens.hpp"

namespace bnmt::policy {

struct LogEntry {
  Tokens source;
  Tokens translation;
  double reward = 0.0;  // in [0,1]

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

using FeedbackLog = std::vector<LogEntry>;

void validate(const LogEntry& e);

// {"source": "...", "translation": "...", "reward": r} per line.
void export_log(std::ostream& os, std::span<const LogEntry> log);
FeedbackLog import_log(std::istream& is);
FeedbackLog import_log_file(const std::filesystem::path& path);

}  // namespace bnmt::policy
