#include "common.hpp"

#include <openssl/sha.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iomanip>
#include <sstream>

#include "bnmt/common/error.hpp"

namespace bnmt::cli {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot write " + path.string());
  os << text;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

std::string git_blob_hash(const std::filesystem::path& path) {
  const std::string content = read_text(path);
  const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
  std::ostringstream hex;
  for (unsigned char c : digest) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
  return hex.str();
}

Manifest::Manifest(const CLI::App& command, std::uint64_t seed) {
  doc_["tool"] = "bnmt";
  doc_["command"] = command.get_name();
  doc_["seed"] = seed;
  nlohmann::json cfg = nlohmann::json::object();
  for (const CLI::Option* opt : command.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      cfg[name] = res.size() == 1 ? nlohmann::json(res[0]) : nlohmann::json(res);
    } else {
      cfg[name] = opt->get_default_str();
    }
  }
  doc_["config"] = cfg;
  doc_["inputs"] = nlohmann::json::object();
  doc_["outputs"] = nlohmann::json::object();
}

void Manifest::input(const std::filesystem::path& p) {
  if (std::filesystem::is_regular_file(p)) doc_["inputs"][p.string()] = git_blob_hash(p);
}

void Manifest::output(const std::filesystem::path& p) {
  if (std::filesystem::is_regular_file(p)) doc_["outputs"][p.string()] = git_blob_hash(p);
}

void Manifest::result(const std::string& key, nlohmann::json value) { doc_["results"][key] = std::move(value); }

void Manifest::write(const std::filesystem::path& primary_output) const {
  write_json(primary_output.string() + ".manifest.json", doc_);
}

std::vector<SentencePair> load_tsv(const std::filesystem::path& p) {
  if (!std::filesystem::is_regular_file(p)) throw UsageError("cannot read " + p.string());
  return read_tsv_file(p);
}

void PolicyFlags::add(CLI::App& sub) {
  sub.add_option("--embed-dim", cfg.embed_dim, "Embedding size")->capture_default_str();
  sub.add_option("--hidden", cfg.hidden, "GRU units per direction")->capture_default_str();
  sub.add_option("--attention-dim", cfg.attention_dim, "Attention size")->capture_default_str();
  sub.add_option("--max-len", cfg.max_len, "Longest source and output")->capture_default_str();
  sub.add_option("--allow-unk", cfg.allow_unk, "Let the decoder emit <unk>")->capture_default_str();
}

void log_step(const char* what, int step, double value) { spdlog::info("{} step {} {:.4f}", what, step, value); }

}  // namespace bnmt::cli
