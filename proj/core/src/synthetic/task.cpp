#include "bnmt/synthetic/task.hpp"

#include <cstdio>

#include "bnmt/common/error.hpp"
#include "bnmt/common/rng.hpp"

namespace bnmt::synthetic {

namespace {

std::string word(const char* prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%s%02d", prefix, i);
  return buf;
}

}  // namespace

void TaskConfig::validate() const {
  if (n_plain < 1 || n_ambiguous < 0) throw UsageError("synthetic task: bad lexicon sizes");
  if (min_len < 1 || max_len < min_len) throw UsageError("synthetic task: bad sentence lengths");
  for (double p : {ambiguous_rate_out, ambiguous_rate_in, p_in_sense_out_domain}) {
    if (p < 0.0 || p > 1.0) throw UsageError("synthetic task: probabilities must be in [0,1]");
  }
  if (n_ambiguous == 0 && (ambiguous_rate_out > 0.0 || ambiguous_rate_in > 0.0)) {
    throw UsageError("synthetic task: ambiguous rate without ambiguous words");
  }
}

Task make_task(const TaskConfig& cfg) {
  cfg.validate();
  Task task;
  std::vector<std::string> plain_src, amb_src, src_words, tgt_words;
  for (int i = 0; i < cfg.n_plain; ++i) {
    plain_src.push_back(word("s", i));
    task.plain_lexicon[plain_src.back()] = word("t", i);
    src_words.push_back(plain_src.back());
    tgt_words.push_back(word("t", i));
  }
  for (int i = 0; i < cfg.n_ambiguous; ++i) {
    amb_src.push_back(word("a", i));
    task.ambiguous_lexicon[amb_src.back()] = {word("o", i), word("i", i)};
    src_words.push_back(amb_src.back());
    tgt_words.push_back(word("o", i));
    tgt_words.push_back(word("i", i));
  }
  std::vector<std::string> sv{"<pad>", "<s>", "</s>", "<unk>"};
  sv.insert(sv.end(), src_words.begin(), src_words.end());
  std::vector<std::string> tv{"<pad>", "<s>", "</s>", "<unk>"};
  tv.insert(tv.end(), tgt_words.begin(), tgt_words.end());
  task.source_vocab = Vocab(sv);
  task.target_vocab = Vocab(tv);

  Rng rng(cfg.seed);
  std::uniform_int_distribution<int> len_dist(cfg.min_len, cfg.max_len);
  std::uniform_int_distribution<std::size_t> plain_pick(0, plain_src.size() - 1);
  auto sentence = [&](bool in_domain) {
    const double amb_rate = in_domain ? cfg.ambiguous_rate_in : cfg.ambiguous_rate_out;
    SentencePair sp;
    const int n = len_dist(rng);
    for (int i = 0; i < n; ++i) {
      if (!amb_src.empty() && uniform01(rng) < amb_rate) {
        const auto& w = amb_src[std::uniform_int_distribution<std::size_t>(0, amb_src.size() - 1)(rng)];
        const auto& senses = task.ambiguous_lexicon[w];
        const bool in_sense = in_domain || uniform01(rng) < cfg.p_in_sense_out_domain;
        sp.source.push_back(w);
        sp.target.push_back(in_sense ? senses.second : senses.first);
      } else {
        const auto& w = plain_src[plain_pick(rng)];
        sp.source.push_back(w);
        sp.target.push_back(task.plain_lexicon[w]);
      }
    }
    return sp;
  };
  auto fill = [&](std::vector<SentencePair>& v, int n, bool in_domain) {
    for (int i = 0; i < n; ++i) v.push_back(sentence(in_domain));
  };
  fill(task.out_train, cfg.n_out_train, false);
  fill(task.out_dev, cfg.n_out_dev, false);
  fill(task.in_train, cfg.n_in_train, true);
  fill(task.in_dev, cfg.n_in_dev, true);
  fill(task.in_test, cfg.n_in_test, true);
  return task;
}

}  // namespace bnmt::synthetic
