#include "bnmt/common/vocab.hpp"

#include <algorithm>
#include <map>

#include "bnmt/common/error.hpp"

namespace bnmt {

namespace {
const std::vector<std::string> kSpecials = {"<pad>", "<s>", "</s>", "<unk>"};
}

Vocab::Vocab() {
  for (const auto& s : kSpecials) add(s);
}

Vocab::Vocab(const std::vector<std::string>& tokens) {
  if (tokens.size() < kSpecials.size() ||
      !std::equal(kSpecials.begin(), kSpecials.end(), tokens.begin())) {
    throw DataError("vocabulary must start with <pad> <s> </s> <unk>");
  }
  for (const auto& t : tokens) {
    if (index_.count(t)) throw DataError("duplicate vocabulary entry: " + t);
    add(t);
  }
}

Vocab Vocab::build(std::span<const Tokens> corpus, int min_count, int max_size) {
  std::map<std::string, int> counts;
  for (const auto& sentence : corpus) {
    for (const auto& t : sentence) ++counts[t];
  }
  std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  for (const auto& [tok, n] : ranked) {
    if (n < min_count) continue;
    if (max_size > 0 && v.size() >= max_size) break;
    if (!v.contains(tok)) v.add(tok);
  }
  return v;
}

void Vocab::add(const std::string& token) {
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
}

int Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) throw DataError("token id out of range: " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocab::encode(const Tokens& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

Tokens Vocab::decode(std::span<const int> ids) const {
  Tokens out;
  for (int i : ids) {
    if (i == kEos) break;
    if (i == kPad || i == kBos) continue;
    out.push_back(token(i));
  }
  return out;
}

}  // namespace bnmt
