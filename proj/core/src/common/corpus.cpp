#include "bnmt/common/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "bnmt/common/error.hpp"

namespace bnmt {

std::vector<SentencePair> read_tsv(std::istream& is) {
  std::vector<SentencePair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("line " + std::to_string(lineno) + ": expected source<TAB>target");
    }
    out.push_back({tokenize(std::string_view(line).substr(0, tab)),
                   tokenize(std::string_view(line).substr(tab + 1))});
  }
  return out;
}

void write_tsv(std::ostream& os, const std::vector<SentencePair>& pairs) {
  for (const auto& p : pairs) os << detokenize(p.source) << '\t' << detokenize(p.target) << '\n';
}

std::vector<Tokens> read_lines(std::istream& is) {
  std::vector<Tokens> out;
  std::string line;
  while (std::getline(is, line)) out.push_back(tokenize(line));
  return out;
}

void write_lines(std::ostream& os, const std::vector<Tokens>& lines) {
  for (const auto& l : lines) os << detokenize(l) << '\n';
}

std::vector<SentencePair> read_parallel(std::istream& source, std::istream& target) {
  auto src = read_lines(source);
  auto tgt = read_lines(target);
  if (src.size() != tgt.size()) {
    throw DataError("parallel files differ in length: " + std::to_string(src.size()) + " vs " +
                    std::to_string(tgt.size()));
  }
  std::vector<SentencePair> out;
  out.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) out.push_back({std::move(src[i]), std::move(tgt[i])});
  return out;
}

std::vector<SentencePair> read_tsv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  return read_tsv(in);
}

void write_tsv_file(const std::filesystem::path& path, const std::vector<SentencePair>& pairs) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  write_tsv(out, pairs);
}

}  // namespace bnmt
