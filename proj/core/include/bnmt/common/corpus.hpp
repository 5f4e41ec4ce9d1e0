#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "bnmt/common/tokens.hpp"

namespace bnmt {

struct SentencePair {
  Tokens source;
  Tokens target;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

// "source<TAB>target" per line.  Lines without a tab raise a DataError with
// the line number.
std::vector<SentencePair> read_tsv(std::istream& is);
void write_tsv(std::ostream& os, const std::vector<SentencePair>& pairs);

// Twin files, one sentence per line; line counts must agree.
std::vector<SentencePair> read_parallel(std::istream& source, std::istream& target);

std::vector<Tokens> read_lines(std::istream& is);
void write_lines(std::ostream& os, const std::vector<Tokens>& lines);

std::vector<SentencePair> read_tsv_file(const std::filesystem::path& path);
void write_tsv_file(const std::filesystem::path& path, const std::vector<SentencePair>& pairs);

}  // namespace bnmt
