#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnmt/common/rng.hpp"
#include "bnmt/common/vocab.hpp"
#include "bnmt/nn/layers.hpp"
#include "bnmt/nn/parameters.hpp"
#include "bnmt/nn/tape.hpp"

namespace bnmt::estimator {

// Desk-scale defaults.  Full scale: embed 500, feature 10, 50 filters of
// widths 2..15 (700 pooled features), dropout 0.5.
struct EstimatorConfig {
  int embed_dim = 32;
  int feature_dim = 2;
  int hidden = 32;  // per direction
  int n_filters = 8;
  int filter_min = 2;
  int filter_max = 5;
  double dropout = 0.5;
  double leaky_slope = 0.01;
  int max_len = 100;
  bool freeze_embeddings = false;

  int pooled_width() const { return n_filters * (filter_max - filter_min + 1); }
  void validate() const;
};

// r_hat(x, y): embeddings plus a continuation-token feature, one biLSTM per
// side, per-position concatenation (the shorter side zero-padded), a bank of
// 1-D convolutions with max-over-time pooling, dropout, and a single
// leaky-ReLU output unit.
class RewardEstimator {
 public:
  RewardEstimator(EstimatorConfig cfg, Vocab source_vocab, Vocab target_vocab, std::uint64_t seed);
  RewardEstimator(const RewardEstimator& other);
  RewardEstimator& operator=(const RewardEstimator& other);
  RewardEstimator(RewardEstimator&&) noexcept = default;
  RewardEstimator& operator=(RewardEstimator&&) noexcept = default;

  const EstimatorConfig& config() const { return cfg_; }
  const Vocab& source_vocab() const { return src_vocab_; }
  const Vocab& target_vocab() const { return tgt_vocab_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }

  // Dropout is applied only when `dropout_rng` is given.  Throws DataError
  // for empty or over-long sequences.
  nn::Var forward(nn::Tape& t, const Tokens& source, const Tokens& target, Rng* dropout_rng) const;
  // The pooled feature vector, exposed for inspection.
  nn::Var features(nn::Tape& t, const Tokens& source, const Tokens& target) const;

  double predict(const Tokens& source, const Tokens& target) const;
  std::vector<double> predict(std::span<const Tokens> sources, std::span<const Tokens> targets) const;

  void save(std::ostream& os) const;
  static RewardEstimator load(std::istream& is);
  void save_file(const std::filesystem::path& path) const;
  static RewardEstimator load_file(const std::filesystem::path& path);

 private:
  std::vector<nn::Var> encode_side(nn::Tape& t, const Tokens& tokens, const Vocab& vocab,
                                   const nn::Parameter& emb, const nn::Lstm& fwd,
                                   const nn::Lstm& bwd) const;
  void declare();
  void bind();

  EstimatorConfig cfg_;
  Vocab src_vocab_;
  Vocab tgt_vocab_;
  // mutable: the tape writes gradients into the parameter set.
  mutable nn::ParameterSet params_;
  nn::Lstm src_fwd_, src_bwd_, tgt_fwd_, tgt_bwd_;
  std::vector<nn::Linear> convs_;
  nn::Linear out_;
};

}  // namespace bnmt::estimator
