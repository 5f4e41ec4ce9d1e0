#include "bnmt/estimator/model.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "bnmt/common/error.hpp"

namespace bnmt::estimator {

using nn::Matrix;
using nn::Tape;
using nn::Var;

void EstimatorConfig::validate() const {
  if (embed_dim < 1 || feature_dim < 0 || hidden < 1 || n_filters < 1) {
    throw UsageError("estimator dimensions must be positive");
  }
  if (filter_min < 1 || filter_max < filter_min) throw UsageError("estimator filter sizes invalid");
  if (dropout < 0.0 || dropout >= 1.0) throw UsageError("estimator dropout must be in [0,1)");
  if (max_len < 1) throw UsageError("estimator max_len must be positive");
}

RewardEstimator::RewardEstimator(EstimatorConfig cfg, Vocab source_vocab, Vocab target_vocab,
                                 std::uint64_t seed)
    : cfg_(cfg), src_vocab_(std::move(source_vocab)), tgt_vocab_(std::move(target_vocab)) {
  cfg_.validate();
  declare();
  Rng rng(seed);
  params_.init_glorot(rng);
  bind();
  nn::init_lstm_bias(src_fwd_);
  nn::init_lstm_bias(src_bwd_);
  nn::init_lstm_bias(tgt_fwd_);
  nn::init_lstm_bias(tgt_bwd_);
  // A small positive bias keeps the leaky unit in its linear region at start.
  out_.b->value(0, 0) = 0.5;
}

RewardEstimator::RewardEstimator(const RewardEstimator& other)
    : cfg_(other.cfg_), src_vocab_(other.src_vocab_), tgt_vocab_(other.tgt_vocab_),
      params_(other.params_) {
  bind();
}

RewardEstimator& RewardEstimator::operator=(const RewardEstimator& other) {
  if (this == &other) return *this;
  cfg_ = other.cfg_;
  src_vocab_ = other.src_vocab_;
  tgt_vocab_ = other.tgt_vocab_;
  params_ = other.params_;
  bind();
  return *this;
}

void RewardEstimator::declare() {
  const int in = cfg_.embed_dim + cfg_.feature_dim;
  params_.add("src.emb", cfg_.embed_dim, src_vocab_.size());
  params_.add("tgt.emb", cfg_.embed_dim, tgt_vocab_.size());
  params_.add("feat.emb", std::max(cfg_.feature_dim, 1), 2);
  nn::Lstm::declare(params_, "src.fwd", in, cfg_.hidden);
  nn::Lstm::declare(params_, "src.bwd", in, cfg_.hidden);
  nn::Lstm::declare(params_, "tgt.fwd", in, cfg_.hidden);
  nn::Lstm::declare(params_, "tgt.bwd", in, cfg_.hidden);
  for (int s = cfg_.filter_min; s <= cfg_.filter_max; ++s) {
    nn::Linear::declare(params_, "conv" + std::to_string(s), 4 * cfg_.hidden * s, cfg_.n_filters);
  }
  nn::Linear::declare(params_, "out", cfg_.pooled_width(), 1);
}

void RewardEstimator::bind() {
  auto lstm = [&](const std::string& name) {
    return nn::Lstm{&params_[name + ".w"], &params_[name + ".b"], cfg_.hidden};
  };
  src_fwd_ = lstm("src.fwd");
  src_bwd_ = lstm("src.bwd");
  tgt_fwd_ = lstm("tgt.fwd");
  tgt_bwd_ = lstm("tgt.bwd");
  convs_.clear();
  for (int s = cfg_.filter_min; s <= cfg_.filter_max; ++s) {
    const std::string n = "conv" + std::to_string(s);
    convs_.push_back(nn::Linear{&params_[n + ".w"], &params_[n + ".b"]});
  }
  out_ = nn::Linear{&params_["out.w"], &params_["out.b"]};
}

std::vector<Var> RewardEstimator::encode_side(Tape& t, const Tokens& tokens, const Vocab& vocab,
                                              const nn::Parameter& emb, const nn::Lstm& fwd,
                                              const nn::Lstm& bwd) const {
  auto& table = const_cast<nn::Parameter&>(emb);
  auto& feat = params_["feat.emb"];
  std::vector<Var> xs;
  xs.reserve(tokens.size());
  for (const auto& tok : tokens) {
    const int id = vocab.id(tok);
    Var e = cfg_.freeze_embeddings ? t.constant(table.value.col(id)) : t.lookup(table, id);
    if (cfg_.feature_dim > 0) {
      const Var parts[2] = {e, t.lookup(feat, is_continuation_token(tok) ? 1 : 0)};
      e = nn::concat_rows(parts);
    }
    xs.push_back(e);
  }
  const auto f = fwd.run(t, xs, false);
  const auto b = bwd.run(t, xs, true);
  std::vector<Var> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Var parts[2] = {f[i], b[i]};
    out.push_back(nn::concat_rows(parts));
  }
  return out;
}

Var RewardEstimator::features(Tape& t, const Tokens& source, const Tokens& target) const {
  if (source.empty() || target.empty()) throw DataError("estimator input sequence is empty");
  const auto max_len = static_cast<std::size_t>(cfg_.max_len);
  if (source.size() > max_len || target.size() > max_len) {
    throw DataError("estimator input longer than max_len " + std::to_string(cfg_.max_len));
  }
  const auto src = encode_side(t, source, src_vocab_, params_["src.emb"], src_fwd_, src_bwd_);
  const auto tgt = encode_side(t, target, tgt_vocab_, params_["tgt.emb"], tgt_fwd_, tgt_bwd_);

  const std::size_t len =
      std::max({src.size(), tgt.size(), static_cast<std::size_t>(cfg_.filter_max)});
  Var zero = t.constant(Matrix::Zero(2 * cfg_.hidden, 1));
  std::vector<Var> cols;
  cols.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    const Var parts[2] = {i < src.size() ? src[i] : zero, i < tgt.size() ? tgt[i] : zero};
    cols.push_back(nn::concat_rows(parts));
  }
  Var seq = nn::concat_cols(cols);

  std::vector<Var> pooled;
  for (std::size_t k = 0; k < convs_.size(); ++k) {
    const int width = cfg_.filter_min + static_cast<int>(k);
    Var conv = convs_[k](t, nn::unfold(seq, width));
    pooled.push_back(nn::max_over_columns(nn::tanh(conv)));
  }
  return nn::concat_rows(pooled);
}

Var RewardEstimator::forward(Tape& t, const Tokens& source, const Tokens& target,
                             Rng* dropout_rng) const {
  Var h = features(t, source, target);
  if (dropout_rng && cfg_.dropout > 0.0) {
    const double keep = 1.0 - cfg_.dropout;
    Matrix mask(h.rows(), 1);
    for (Eigen::Index i = 0; i < mask.rows(); ++i) {
      mask(i, 0) = uniform01(*dropout_rng) < keep ? 1.0 / keep : 0.0;
    }
    h = nn::mul_const(h, mask);
  }
  return nn::leaky_relu(out_(t, h), cfg_.leaky_slope);
}

double RewardEstimator::predict(const Tokens& source, const Tokens& target) const {
  Tape t(false);
  return forward(t, source, target, nullptr).scalar();
}

std::vector<double> RewardEstimator::predict(std::span<const Tokens> sources,
                                             std::span<const Tokens> targets) const {
  if (sources.size() != targets.size()) throw UsageError("predict: source/target counts differ");
  std::vector<double> out;
  out.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) out.push_back(predict(sources[i], targets[i]));
  return out;
}

void RewardEstimator::save(std::ostream& os) const {
  nlohmann::json h;
  h["model"] = "reward_estimator";
  h["embed_dim"] = cfg_.embed_dim;
  h["feature_dim"] = cfg_.feature_dim;
  h["hidden"] = cfg_.hidden;
  h["n_filters"] = cfg_.n_filters;
  h["filter_min"] = cfg_.filter_min;
  h["filter_max"] = cfg_.filter_max;
  h["dropout"] = cfg_.dropout;
  h["leaky_slope"] = cfg_.leaky_slope;
  h["max_len"] = cfg_.max_len;
  h["freeze_embeddings"] = cfg_.freeze_embeddings;
  h["source_vocab"] = src_vocab_.tokens();
  h["target_vocab"] = tgt_vocab_.tokens();
  os << h.dump() << '\n';
  params_.save(os);
}

RewardEstimator RewardEstimator::load(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("estimator checkpoint is empty");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("estimator checkpoint header: ") + e.what());
  }
  if (h.value("model", "") != "reward_estimator") throw DataError("not a reward estimator checkpoint");
  EstimatorConfig cfg;
  cfg.embed_dim = h.at("embed_dim");
  cfg.feature_dim = h.at("feature_dim");
  cfg.hidden = h.at("hidden");
  cfg.n_filters = h.at("n_filters");
  cfg.filter_min = h.at("filter_min");
  cfg.filter_max = h.at("filter_max");
  cfg.dropout = h.at("dropout");
  cfg.leaky_slope = h.at("leaky_slope");
  cfg.max_len = h.at("max_len");
  cfg.freeze_embeddings = h.at("freeze_embeddings");
  Vocab src(h.at("source_vocab").get<std::vector<std::string>>());
  Vocab tgt(h.at("target_vocab").get<std::vector<std::string>>());
  RewardEstimator est(cfg, std::move(src), std::move(tgt), 0);
  est.params_.load(is);
  return est;
}

void RewardEstimator::save_file(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw UsageError("cannot write " + path.string());
  save(os);
}

RewardEstimator RewardEstimator::load_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read " + path.string());
  return load(is);
}

}  // namespace bnmt::estimator
