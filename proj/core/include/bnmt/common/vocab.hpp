#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bnmt/common/tokens.hpp"

namespace bnmt {

// Closed word vocabulary with four reserved symbols at fixed ids.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kNumSpecials = 4;

  Vocab();
  explicit Vocab(const std::vector<std::string>& tokens);

  // Most frequent first, ties broken lexicographically; max_size counts
  // specials, 0 means unlimited.
  static Vocab build(std::span<const Tokens> corpus, int min_count = 1, int max_size = 0);

  int id(const std::string& token) const;
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  bool contains(const std::string& token) const { return index_.count(token) > 0; }

  std::vector<int> encode(const Tokens& tokens) const;
  // Stops at the first end-of-sequence symbol; drops pad/bos.
  Tokens decode(std::span<const int> ids) const;

  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  void add(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace bnmt
