#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bnmt/common/corpus.hpp"
#include "bnmt/common/vocab.hpp"

namespace bnmt::synthetic {

// Word-for-word translation with a closed lexicon.  Plain source words have
// one translation.  Ambiguous source words have an out-of-domain sense and an
// in-domain sense: the out-of-domain corpus uses the in-domain sense only
// with probability p_in_sense_out_domain, the in-domain corpus always.
// A model trained on out-of-domain data therefore prefers the wrong sense
// in domain, and feedback on in-domain sources can correct it.
struct TaskConfig {
  int n_plain = 24;
  int n_ambiguous = 8;
  int min_len = 4;
  int max_len = 8;
  double ambiguous_rate_out = 0.3;
  double ambiguous_rate_in = 0.5;
  double p_in_sense_out_domain = 0.35;
  int n_out_train = 1500;
  int n_out_dev = 100;
  int n_in_train = 500;
  int n_in_dev = 100;
  int n_in_test = 200;
  std::uint64_t seed = 7;

  void validate() const;
};

struct Task {
  std::vector<SentencePair> out_train, out_dev;
  std::vector<SentencePair> in_train, in_dev, in_test;
  Vocab source_vocab;
  Vocab target_vocab;
  std::map<std::string, std::string> plain_lexicon;
  // source word -> {out-of-domain sense, in-domain sense}
  std::map<std::string, std::pair<std::string, std::string>> ambiguous_lexicon;
};

Task make_task(const TaskConfig& cfg);

}  // namespace bnmt::synthetic
