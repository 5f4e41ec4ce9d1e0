#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bnmt/common/corpus.hpp"
#include "bnmt/policy/model.hpp"

namespace bnmt::cli {

using Action = std::function<void()>;

// Every subcommand stores its work here; main runs it after parsing.
struct Registry {
  Action action;
};

void add_data_commands(CLI::App& app, Registry& reg);
void add_reliability_commands(CLI::App& app, Registry& reg);
void add_estimator_commands(CLI::App& app, Registry& reg);
void add_policy_commands(CLI::App& app, Registry& reg);

// SHA-1 of "blob <size>\0<content>", as git hashes file contents.
std::string git_blob_hash(const std::filesystem::path& path);

// Run record written next to the primary output as <out>.manifest.json:
// the resolved options, the seed and content hashes of inputs and outputs.
class Manifest {
 public:
  Manifest(const CLI::App& command, std::uint64_t seed);
  void input(const std::filesystem::path& p);
  void output(const std::filesystem::path& p);
  void result(const std::string& key, nlohmann::json value);
  void write(const std::filesystem::path& primary_output) const;

 private:
  nlohmann::json doc_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// Throws UsageError when the file cannot be read.
std::vector<SentencePair> load_tsv(const std::filesystem::path& p);

struct PolicyFlags {
  policy::PolicyConfig cfg;
  void add(CLI::App& sub);
};

// Reports progress of long loops through spdlog.
void log_step(const char* what, int step, double value);

}  // namespace bnmt::cli
