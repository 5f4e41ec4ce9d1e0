#include "bnmt/policy/decoding.hpp"

#include <algorithm>
#include <cmath>

#include "bnmt/common/error.hpp"

namespace bnmt::policy {

using nn::Matrix;
using nn::Tape;
using nn::Var;

namespace {

Matrix log_softmax_values(const Matrix& logits, double tau) {
  Matrix x = std::isinf(tau) ? Matrix(Matrix::Zero(logits.rows(), 1)) : Matrix(logits / tau);
  if (std::isinf(tau)) {
    // Masked symbols stay impossible under the uniform limit.
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 0) = logits(i, 0) < -1e8 ? -1e300 : 0.0;
  }
  const double m = x.maxCoeff();
  const double lse = m + std::log((x.array() - m).exp().sum());
  return (x.array() - lse).matrix();
}

int argmax(const Matrix& v) {
  Eigen::Index i = 0;
  v.col(0).maxCoeff(&i);
  return static_cast<int>(i);
}

}  // namespace

bool Hypothesis::finished() const { return !ids.empty() && ids.back() == Vocab::kEos; }

Hypothesis greedy_decode(const Seq2SeqPolicy& p, std::span<const int> source) {
  Tape t(false);
  const auto enc = p.encode(t, source);
  Var state = enc.initial_state;
  int prev = Vocab::kBos;
  Hypothesis h;
  for (int i = 0; i < p.config().max_len; ++i) {
    auto out = p.step(t, enc, state, prev);
    const Matrix lp = log_softmax_values(out.logits.value(), 1.0);
    const int next = argmax(lp);
    h.ids.push_back(next);
    h.log_prob += lp(next, 0);
    if (next == Vocab::kEos) break;
    state = out.state;
    prev = next;
  }
  return h;
}

Tokens greedy_translate(const Seq2SeqPolicy& p, const Tokens& source) {
  return greedy_decode(p, p.source_ids(source)).tokens(p);
}

std::vector<Sample> sample_translations(const Seq2SeqPolicy& p, std::span<const int> source, int k,
                                        double tau, Rng& rng) {
  if (k < 1) throw UsageError("sample_translations: k must be >= 1");
  if (!(tau > 0.0)) throw UsageError("sample_translations: tau must be > 0");
  Tape t(false);
  const auto enc = p.encode(t, source);
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(k));
  std::vector<double> probs;
  for (int s = 0; s < k; ++s) {
    Sample smp;
    Var state = enc.initial_state;
    int prev = Vocab::kBos;
    for (int i = 0; i < p.config().max_len; ++i) {
      auto step = p.step(t, enc, state, prev);
      const Matrix& logits = step.logits.value();
      const Matrix lp = log_softmax_values(logits, 1.0);
      const Matrix lpt = tau == 1.0 ? lp : log_softmax_values(logits, tau);
      probs.assign(static_cast<std::size_t>(lpt.rows()), 0.0);
      for (Eigen::Index j = 0; j < lpt.rows(); ++j) probs[static_cast<std::size_t>(j)] = std::exp(lpt(j, 0));
      const int next = static_cast<int>(sample_index(probs, rng));
      smp.ids.push_back(next);
      smp.log_prob += lp(next, 0);
      smp.tempered_log_prob += lpt(next, 0);
      if (next == Vocab::kEos) break;
      state = step.state;
      prev = next;
    }
    out.push_back(std::move(smp));
  }
  return out;
}

std::vector<Hypothesis> beam_decode(const Seq2SeqPolicy& p, std::span<const int> source,
                                    const BeamConfig& cfg) {
  if (cfg.width < 1) throw UsageError("beam width must be >= 1");
  Tape t(false);
  const auto enc = p.encode(t, source);

  struct Live {
    Hypothesis hyp;
    Var state;
  };
  std::vector<Live> live{{Hypothesis{}, enc.initial_state}};
  std::vector<Hypothesis> done;
  const auto width = static_cast<std::size_t>(cfg.width);

  struct Candidate {
    std::size_t parent;
    int token;
    double score;
  };
  for (int len = 0; len < p.config().max_len && !live.empty(); ++len) {
    std::vector<Candidate> cands;
    std::vector<Var> states;
    for (std::size_t i = 0; i < live.size(); ++i) {
      const int prev = live[i].hyp.ids.empty() ? Vocab::kBos : live[i].hyp.ids.back();
      auto out = p.step(t, enc, live[i].state, prev);
      states.push_back(out.state);
      const Matrix lp = log_softmax_values(out.logits.value(), 1.0);
      for (Eigen::Index j = 0; j < lp.rows(); ++j) {
        if (lp(j, 0) < -1e8) continue;
        cands.push_back({i, static_cast<int>(j), live[i].hyp.log_prob + lp(j, 0)});
      }
    }
    std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.parent != b.parent) return a.parent < b.parent;
      return a.token < b.token;
    });
    const std::size_t room = width - done.size();
    std::vector<Live> next;
    for (std::size_t c = 0; c < cands.size() && c < room; ++c) {
      Hypothesis h = live[cands[c].parent].hyp;
      h.ids.push_back(cands[c].token);
      h.log_prob = cands[c].score;
      if (cands[c].token == Vocab::kEos || len + 1 == p.config().max_len) {
        done.push_back(std::move(h));
      } else {
        next.push_back({std::move(h), states[cands[c].parent]});
      }
    }
    live = std::move(next);
  }
  auto key = [&](const Hypothesis& h) {
    return cfg.length_normalize ? h.log_prob / static_cast<double>(h.ids.size()) : h.log_prob;
  };
  std::stable_sort(done.begin(), done.end(),
                   [&](const Hypothesis& a, const Hypothesis& b) { return key(a) > key(b); });
  return done;
}

Tokens beam_translate(const Seq2SeqPolicy& p, const Tokens& source, const BeamConfig& cfg) {
  const auto hyps = beam_decode(p, p.source_ids(source), cfg);
  return hyps.empty() ? Tokens{} : hyps.front().tokens(p);
}

}  // namespace bnmt::policy
