#include <benchmark/benchmark.h>

#include <random>

#include "bnmt/estimator/losses.hpp"
#include "bnmt/estimator/model.hpp"
#include "bnmt/metrics/metrics.hpp"
#include "bnmt/metrics/statistics.hpp"
#include "bnmt/policy/decoding.hpp"
#include "bnmt/policy/training.hpp"
#include "bnmt/reliability/alpha.hpp"
#include "bnmt/synthetic/task.hpp"

using namespace bnmt;

namespace {

Tokens random_sentence(std::mt19937_64& rng, int vocab, int len) {
  std::uniform_int_distribution<int> word(0, vocab - 1);
  Tokens t;
  for (int i = 0; i < len; ++i) t.push_back("w" + std::to_string(word(rng)));
  return t;
}

const synthetic::Task& task() {
  static const auto t = synthetic::make_task({});
  return t;
}

policy::Seq2SeqPolicy make_policy() {
  policy::PolicyConfig c;
  c.embed_dim = 32;
  c.hidden = 64;
  c.attention_dim = 32;
  c.allow_unk = false;
  return policy::Seq2SeqPolicy(c, task().source_vocab, task().target_vocab, 1);
}

void BM_Alpha(benchmark::State& state) {
  const auto scale = static_cast<reliability::Scale>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> value(1, 5);
  reliability::ReliabilityMatrix m(scale);
  for (int r = 0; r < 20; ++r) {
    for (int u = 0; u < state.range(1); ++u) m.add("r" + std::to_string(r), "u" + std::to_string(u), value(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(reliability::krippendorff_alpha(m).alpha);
}
BENCHMARK(BM_Alpha)->ArgsProduct({{0, 1, 2}, {100, 1000}})->Unit(benchmark::kMillisecond);

void BM_SentenceMetric(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto hyp = random_sentence(rng, 30, static_cast<int>(state.range(1)));
  const auto ref = random_sentence(rng, 30, static_cast<int>(state.range(1)));
  switch (state.range(0)) {
    case 0:
      for (auto _ : state) benchmark::DoNotOptimize(metrics::sbleu(hyp, ref));
      break;
    case 1:
      for (auto _ : state) benchmark::DoNotOptimize(metrics::gleu(hyp, ref));
      break;
    case 2:
      for (auto _ : state) benchmark::DoNotOptimize(metrics::chrf(hyp, ref));
      break;
    default:
      for (auto _ : state) benchmark::DoNotOptimize(metrics::ter(hyp, ref));
  }
  state.SetLabel(state.range(0) == 0 ? "sbleu" : state.range(0) == 1 ? "gleu" : state.range(0) == 2 ? "chrf" : "ter");
}
BENCHMARK(BM_SentenceMetric)->ArgsProduct({{0, 1, 2, 3}, {8, 30}});

void BM_ApproxRandomization(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::vector<metrics::SentenceStats> a, b;
  for (int i = 0; i < 200; ++i) {
    const auto ref = random_sentence(rng, 20, 12);
    a.push_back(metrics::bleu_stats(random_sentence(rng, 20, 12), ref));
    b.push_back(metrics::bleu_stats(random_sentence(rng, 20, 12), ref));
  }
  const auto bleu = [](std::span<const double> s) { return metrics::bleu_from_stats(s); };
  for (auto _ : state) benchmark::DoNotOptimize(metrics::approx_randomization_test(a, b, bleu, 1000, 1).p_value);
}
BENCHMARK(BM_ApproxRandomization)->Unit(benchmark::kMillisecond);

void BM_EstimatorMseForwardBackward(benchmark::State& state) {
  estimator::RewardEstimator est({}, task().source_vocab, task().target_vocab, 1);
  std::vector<estimator::RewardExample> batch;
  for (std::size_t i = 0; i < 16; ++i) batch.push_back({task().in_train[i].source, task().in_train[i].target, 0.5});
  for (auto _ : state) {
    est.params().zero_grad();
    benchmark::DoNotOptimize(estimator::mse_loss(est, batch, 1, true).loss);
  }
}
BENCHMARK(BM_EstimatorMseForwardBackward)->Unit(benchmark::kMillisecond);

void BM_EstimatorPredict(benchmark::State& state) {
  estimator::RewardEstimator est({}, task().source_vocab, task().target_vocab, 1);
  const auto& ex = task().in_train[0];
  for (auto _ : state) benchmark::DoNotOptimize(est.predict(ex.source, ex.target));
}
BENCHMARK(BM_EstimatorPredict)->Unit(benchmark::kMicrosecond);

void BM_PolicyMleForwardBackward(benchmark::State& state) {
  auto p = make_policy();
  const std::span<const SentencePair> batch(task().out_train.data(), 20);
  for (auto _ : state) {
    p.params().zero_grad();
    benchmark::DoNotOptimize(policy::mle_gradient(p, batch));
  }
}
BENCHMARK(BM_PolicyMleForwardBackward)->Unit(benchmark::kMillisecond);

void BM_PolicyRlGradient(benchmark::State& state) {
  auto p = make_policy();
  const std::span<const SentencePair> batch(task().in_train.data(), 20);
  const policy::RewardFn reward = [](const SentencePair& ex, const Tokens& h) {
    return h.empty() ? 0.0 : metrics::gleu(h, ex.target);
  };
  Rng rng(4);
  for (auto _ : state) {
    p.params().zero_grad();
    benchmark::DoNotOptimize(policy::rl_gradient(p, batch, reward, {}, 0.3, rng).stats.objective);
  }
}
BENCHMARK(BM_PolicyRlGradient)->Unit(benchmark::kMillisecond);

void BM_Decode(benchmark::State& state) {
  const auto p = make_policy();
  const auto src = p.source_ids(task().in_test[0].source);
  const int width = static_cast<int>(state.range(0));
  for (auto _ : state) {
    if (width == 0) {
      benchmark::DoNotOptimize(policy::greedy_decode(p, src).log_prob);
    } else {
      benchmark::DoNotOptimize(policy::beam_decode(p, src, {.width = width}).size());
    }
  }
  state.SetLabel(width == 0 ? "greedy" : "beam");
}
BENCHMARK(BM_Decode)->Arg(0)->Arg(10)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
