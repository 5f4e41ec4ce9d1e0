#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "bnmt/common/rng.hpp"
#include "bnmt/common/vocab.hpp"
#include "bnmt/nn/layers.hpp"
#include "bnmt/nn/parameters.hpp"
#include "bnmt/nn/tape.hpp"

namespace bnmt::policy {

// Desk-scale defaults.  Full scale: embed 500, 1024 GRUs per layer,
// 30k-merge subword vocabulary.
struct PolicyConfig {
  int embed_dim = 32;
  int hidden = 64;
  int attention_dim = 64;
  int max_len = 60;  // source tokens, and generated symbols including </s>
  bool allow_unk = true;

  void validate() const;
};

// Bidirectional GRU encoder, single-layer GRU decoder with additive
// attention, output layer over [state; context; previous embedding].
class Seq2SeqPolicy {
 public:
  Seq2SeqPolicy(PolicyConfig cfg, Vocab source_vocab, Vocab target_vocab, std::uint64_t seed);
  Seq2SeqPolicy(const Seq2SeqPolicy& other);
  Seq2SeqPolicy& operator=(const Seq2SeqPolicy& other);
  Seq2SeqPolicy(Seq2SeqPolicy&&) noexcept = default;
  Seq2SeqPolicy& operator=(Seq2SeqPolicy&&) noexcept = default;

  const PolicyConfig& config() const { return cfg_; }
  const Vocab& source_vocab() const { return src_vocab_; }
  const Vocab& target_vocab() const { return tgt_vocab_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }

  struct Encoding {
    nn::Var annotations;  // 2H x S
    nn::Var keys;         // A x S
    nn::Var initial_state;
  };
  struct StepOutput {
    nn::Var state;
    nn::Var logits;  // masked: pad and <s> (and <unk> unless allowed) never win
  };

  // Throws DataError for an empty or over-long source.
  std::vector<int> source_ids(const Tokens& source) const;
  // Target ids followed by </s>.
  std::vector<int> target_ids(const Tokens& target) const;
  Tokens to_tokens(std::span<const int> ids) const { return tgt_vocab_.decode(ids); }

  Encoding encode(nn::Tape& t, std::span<const int> source) const;
  StepOutput step(nn::Tape& t, const Encoding& enc, nn::Var state, int previous) const;

  // Sum of per-symbol log-probabilities of `ids` under teacher forcing, with
  // the softmax taken over logits / tau.
  nn::Var sequence_log_prob(nn::Tape& t, const Encoding& enc, std::span<const int> ids,
                            double tau = 1.0) const;
  // log p(target </s> | source).
  double log_prob(const Tokens& source, const Tokens& target) const;
  double log_prob_ids(std::span<const int> source, std::span<const int> ids, double tau = 1.0) const;

  void save(std::ostream& os) const;
  static Seq2SeqPolicy load(std::istream& is);
  void save_file(const std::filesystem::path& path) const;
  static Seq2SeqPolicy load_file(const std::filesystem::path& path);

 private:
  void declare();
  void bind();

  PolicyConfig cfg_;
  Vocab src_vocab_;
  Vocab tgt_vocab_;
  mutable nn::ParameterSet params_;
  nn::Gru enc_fwd_, enc_bwd_, dec_;
  nn::Linear init_, out_;
  nn::Matrix mask_;
};

// Tempered logits; tau = +inf gives the uniform distribution.
nn::Var temper(nn::Var logits, double tau);

}  // namespace bnmt::policy
