#include "bnmt/policy/model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "bnmt/common/error.hpp"

namespace bnmt::policy {

using nn::Matrix;
using nn::Tape;
using nn::Var;

namespace {
constexpr double kMasked = -1e9;
}

void PolicyConfig::validate() const {
  if (embed_dim < 1 || hidden < 1 || attention_dim < 1) throw UsageError("policy dimensions must be positive");
  if (max_len < 1) throw UsageError("policy max_len must be positive");
}

Var temper(Var logits, double tau) {
  if (!(tau > 0.0)) throw UsageError("temperature must be > 0");
  if (tau == 1.0) return logits;
  if (std::isinf(tau)) return nn::scale(logits, 0.0);
  return nn::scale(logits, 1.0 / tau);
}

Seq2SeqPolicy::Seq2SeqPolicy(PolicyConfig cfg, Vocab source_vocab, Vocab target_vocab,
                             std::uint64_t seed)
    : cfg_(cfg), src_vocab_(std::move(source_vocab)), tgt_vocab_(std::move(target_vocab)) {
  cfg_.validate();
  declare();
  Rng rng(seed);
  params_.init_glorot(rng);
  bind();
}

Seq2SeqPolicy::Seq2SeqPolicy(const Seq2SeqPolicy& other)
    : cfg_(other.cfg_), src_vocab_(other.src_vocab_), tgt_vocab_(other.tgt_vocab_),
      params_(other.params_) {
  bind();
}

Seq2SeqPolicy& Seq2SeqPolicy::operator=(const Seq2SeqPolicy& other) {
  if (this == &other) return *this;
  cfg_ = other.cfg_;
  src_vocab_ = other.src_vocab_;
  tgt_vocab_ = other.tgt_vocab_;
  params_ = other.params_;
  bind();
  return *this;
}

void Seq2SeqPolicy::declare() {
  const int e = cfg_.embed_dim, h = cfg_.hidden, a = cfg_.attention_dim;
  params_.add("src.emb", e, src_vocab_.size());
  params_.add("tgt.emb", e, tgt_vocab_.size());
  nn::Gru::declare(params_, "enc.fwd", e, h);
  nn::Gru::declare(params_, "enc.bwd", e, h);
  nn::Linear::declare(params_, "init", 2 * h, h);
  params_.add("att.keys", a, 2 * h);
  params_.add("att.query", a, h);
  params_.add("att.v", 1, a);
  nn::Gru::declare(params_, "dec", e + 2 * h, h);
  nn::Linear::declare(params_, "out", h + 2 * h + e, tgt_vocab_.size());
}

void Seq2SeqPolicy::bind() {
  auto gru = [&](const std::string& n) {
    return nn::Gru{&params_[n + ".w"], &params_[n + ".u"], &params_[n + ".uh"], &params_[n + ".b"],
                   cfg_.hidden};
  };
  enc_fwd_ = gru("enc.fwd");
  enc_bwd_ = gru("enc.bwd");
  dec_ = gru("dec");
  init_ = nn::Linear{&params_["init.w"], &params_["init.b"]};
  out_ = nn::Linear{&params_["out.w"], &params_["out.b"]};
  mask_ = Matrix::Zero(tgt_vocab_.size(), 1);
  mask_(Vocab::kPad, 0) = kMasked;
  mask_(Vocab::kBos, 0) = kMasked;
  if (!cfg_.allow_unk) mask_(Vocab::kUnk, 0) = kMasked;
}

std::vector<int> Seq2SeqPolicy::source_ids(const Tokens& source) const {
  if (source.empty()) throw DataError("policy source is empty");
  if (source.size() > static_cast<std::size_t>(cfg_.max_len)) {
    throw DataError("policy source longer than max_len " + std::to_string(cfg_.max_len));
  }
  return src_vocab_.encode(source);
}

std::vector<int> Seq2SeqPolicy::target_ids(const Tokens& target) const {
  auto ids = tgt_vocab_.encode(target);
  ids.push_back(Vocab::kEos);
  return ids;
}

Seq2SeqPolicy::Encoding Seq2SeqPolicy::encode(Tape& t, std::span<const int> source) const {
  auto& emb = params_["src.emb"];
  std::vector<Var> xs;
  xs.reserve(source.size());
  for (int id : source) xs.push_back(t.lookup(emb, id));
  const auto f = enc_fwd_.run(t, xs, false);
  const auto b = enc_bwd_.run(t, xs, true);
  std::vector<Var> cols;
  cols.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Var parts[2] = {f[i], b[i]};
    cols.push_back(nn::concat_rows(parts));
  }
  Encoding enc;
  enc.annotations = nn::concat_cols(cols);
  enc.keys = nn::matmul(t.param(params_["att.keys"]), enc.annotations);
  const auto s = static_cast<Eigen::Index>(source.size());
  Var mean = nn::matmul(enc.annotations, t.constant(Matrix::Constant(s, 1, 1.0 / static_cast<double>(s))));
  enc.initial_state = nn::tanh(init_(t, mean));
  return enc;
}

Seq2SeqPolicy::StepOutput Seq2SeqPolicy::step(Tape& t, const Encoding& enc, Var state,
                                              int previous) const {
  Var e = t.lookup(params_["tgt.emb"], previous);
  Var query = nn::matmul(t.param(params_["att.query"]), state);
  Var energy = nn::tanh(nn::add(enc.keys, query));
  Var scores = nn::transpose(nn::matmul(t.param(params_["att.v"]), energy));
  Var weights = nn::softmax(scores);
  Var context = nn::matmul(enc.annotations, weights);
  const Var in[2] = {e, context};
  Var next = dec_.step(t, nn::concat_rows(in), state);
  const Var feats[3] = {next, context, e};
  Var logits = nn::add(out_(t, nn::concat_rows(feats)), t.constant(mask_));
  return {next, logits};
}

Var Seq2SeqPolicy::sequence_log_prob(Tape& t, const Encoding& enc, std::span<const int> ids,
                                     double tau) const {
  if (ids.empty()) throw UsageError("sequence_log_prob: empty output");
  Var state = enc.initial_state;
  int prev = Vocab::kBos;
  std::vector<Var> terms;
  terms.reserve(ids.size());
  for (int id : ids) {
    auto out = step(t, enc, state, prev);
    terms.push_back(nn::pick(nn::log_softmax(temper(out.logits, tau)), id));
    state = out.state;
    prev = id;
  }
  return nn::sum(nn::concat_rows(terms));
}

double Seq2SeqPolicy::log_prob_ids(std::span<const int> source, std::span<const int> ids,
                                   double tau) const {
  Tape t(false);
  const auto enc = encode(t, source);
  return sequence_log_prob(t, enc, ids, tau).scalar();
}

double Seq2SeqPolicy::log_prob(const Tokens& source, const Tokens& target) const {
  return log_prob_ids(source_ids(source), target_ids(target));
}

void Seq2SeqPolicy::save(std::ostream& os) const {
  nlohmann::json h;
  h["model"] = "seq2seq_policy";
  h["embed_dim"] = cfg_.embed_dim;
  h["hidden"] = cfg_.hidden;
  h["attention_dim"] = cfg_.attention_dim;
  h["max_len"] = cfg_.max_len;
  h["allow_unk"] = cfg_.allow_unk;
  h["source_vocab"] = src_vocab_.tokens();
  h["target_vocab"] = tgt_vocab_.tokens();
  os << h.dump() << '\n';
  params_.save(os);
}

Seq2SeqPolicy Seq2SeqPolicy::load(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("policy checkpoint is empty");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("policy checkpoint header: ") + e.what());
  }
  if (h.value("model", "") != "seq2seq_policy") throw DataError("not a policy checkpoint");
  PolicyConfig cfg;
  cfg.embed_dim = h.at("embed_dim");
  cfg.hidden = h.at("hidden");
  cfg.attention_dim = h.at("attention_dim");
  cfg.max_len = h.at("max_len");
  cfg.allow_unk = h.at("allow_unk");
  Vocab src(h.at("source_vocab").get<std::vector<std::string>>());
  Vocab tgt(h.at("target_vocab").get<std::vector<std::string>>());
  Seq2SeqPolicy p(cfg, std::move(src), std::move(tgt), 0);
  p.params_.load(is);
  return p;
}

void Seq2SeqPolicy::save_file(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw UsageError("cannot write " + path.string());
  save(os);
}

Seq2SeqPolicy Seq2SeqPolicy::load_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read " + path.string());
  return load(is);
}

}  // namespace bnmt::policy
