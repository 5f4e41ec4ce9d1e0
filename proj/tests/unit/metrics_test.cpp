#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bnmt/common/error.hpp"
#include "bnmt/common/tokens.hpp"
#include "bnmt/metrics/metrics.hpp"
#include "bnmt/metrics/statistics.hpp"
#include "oracles.hpp"

using namespace bnmt;
using namespace bnmt::metrics;

namespace {

Tokens T(const char* s) { return tokenize(s); }

const Tokens kRef = T("the quick brown fox jumps over the lazy dog today");

Tokens random_sentence(std::mt19937_64& rng, int vocab, int lo, int hi) {
  std::uniform_int_distribution<int> len(lo, hi), word(0, vocab - 1);
  Tokens t;
  for (int i = len(rng); i > 0; --i) t.push_back("w" + std::to_string(word(rng)));
  return t;
}

}  // namespace

TEST(Sbleu, IdentityIsOne) { EXPECT_DOUBLE_EQ(sbleu(kRef, kRef), 1.0); }

TEST(Sbleu, EmptyHypothesisIsZero) { EXPECT_EQ(sbleu(Tokens{}, kRef), 0.0); }

TEST(Sbleu, EmptyReferenceThrows) { EXPECT_THROW(sbleu(kRef, Tokens{}), Error); }

TEST(Sbleu, OneSubstitutionMatchesHandCount) {
  // 1-grams 9/10, 2-grams 7/9, 3-grams 5/8, 4-grams 3/7, eps 0.1 on n >= 2
  const double expect = std::exp((std::log(0.9) + std::log(7.1 / 9.1) + std::log(5.1 / 8.1) +
                                  std::log(3.1 / 7.1)) /
                                 4.0);
  const double got = sbleu(T("the quick brown cat jumps over the lazy dog today"), kRef);
  EXPECT_NEAR(got, expect, 1e-12);
  EXPECT_NEAR(got, 0.662845011295575, 1e-12);
}

TEST(Sbleu, SmoothingFloorWithoutHigherOrderMatches) {
  EXPECT_NEAR(sbleu(T("a b c d e"), T("e d c b a")), 0.07823638743178428, 1e-12);
  EXPECT_EQ(sbleu(T("a b c d e"), T("v w x y z")), 0.0);
}

TEST(Sbleu, BrevityPenalty) {
  EXPECT_NEAR(sbleu(T("the quick brown fox"), kRef), 0.22313016014842982, 1e-12);
}

TEST(Gleu, IdentityAndSingleToken) {
  EXPECT_DOUBLE_EQ(gleu(kRef, kRef), 1.0);
  EXPECT_DOUBLE_EQ(gleu(T("x"), T("x")), 1.0);
  EXPECT_EQ(gleu(Tokens{}, kRef), 0.0);
}

TEST(Gleu, PrefixHalfMatchesCount) {
  // hyp n-grams 5+4+3+2 = 14 all matched; ref n-grams 10+9+8+7 = 34
  const Tokens half(kRef.begin(), kRef.begin() + 5);
  EXPECT_NEAR(gleu(half, kRef), 14.0 / 34.0, 1e-15);
}

TEST(Chrf, IdentityIsOne) { EXPECT_DOUBLE_EQ(chrf(kRef, kRef), 1.0); }

TEST(Chrf, ToyPairMatchesOracle) {
  EXPECT_NEAR(chrf(T("the cat sat"), T("the cats sat down")), 0.46039547310615153, 1e-12);
}

TEST(Chrf, LargeBetaApproachesRecall) {
  MetricConfig cfg;
  cfg.chrf_beta = 1000.0;
  EXPECT_NEAR(chrf(T("the cat sat"), T("the cats sat down"), cfg), 0.4406833906833907, 1e-3);
}

TEST(Ter, IdentityAndSingleSubstitution) {
  EXPECT_EQ(ter(kRef, kRef), 0.0);
  EXPECT_DOUBLE_EQ(ter(T("the quick brown cat jumps over the lazy dog today"), kRef), 0.1);
}

TEST(Ter, EmptyReferenceThrows) { EXPECT_THROW(ter(kRef, Tokens{}), Error); }

TEST(Ter, BlockMoveMatchesExhaustiveSearch) {
  const Tokens ref = T("a b c d e f");
  const Tokens hyp = T("a d e b c f");
  const int best = oracle::ter_exhaustive(hyp, ref);
  EXPECT_EQ(best, 1);
  EXPECT_DOUBLE_EQ(ter_edits<std::string>(hyp, ref), best);
}

TEST(Ter, ShiftsNeverWorseThanEditDistanceNorBetterThanExhaustive) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const Tokens ref = random_sentence(rng, 4, 3, 6);
    const Tokens hyp = random_sentence(rng, 4, 3, 6);
    const double greedy = ter_edits<std::string>(hyp, ref);
    EXPECT_LE(greedy, edit_distance<std::string>(hyp, ref));
    EXPECT_GE(greedy, oracle::ter_exhaustive(hyp, ref));
  }
}

TEST(Ter, WithoutShiftsEqualsEditDistanceOverRefLength) {
  MetricConfig cfg;
  cfg.ter_enable_shifts = false;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Tokens ref = random_sentence(rng, 6, 1, 12);
    const Tokens hyp = random_sentence(rng, 6, 0, 12);
    // plain DP oracle
    std::vector<std::vector<int>> d(hyp.size() + 1, std::vector<int>(ref.size() + 1));
    for (std::size_t i = 0; i <= hyp.size(); ++i) d[i][0] = static_cast<int>(i);
    for (std::size_t j = 0; j <= ref.size(); ++j) d[0][j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= hyp.size(); ++i) {
      for (std::size_t j = 1; j <= ref.size(); ++j) {
        d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                            d[i - 1][j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1)});
      }
    }
    EXPECT_DOUBLE_EQ(ter(hyp, ref, cfg),
                     static_cast<double>(d[hyp.size()][ref.size()]) / static_cast<double>(ref.size()));
  }
}

TEST(MetricProperties, BoundedOnRandomInputs) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Tokens ref = random_sentence(rng, 8, 1, 15);
    const Tokens hyp = random_sentence(rng, 8, 0, 15);
    for (double v : {sbleu(hyp, ref), gleu(hyp, ref), chrf(hyp, ref)}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_GE(ter(hyp, ref), 0.0);
  }
}

TEST(MetricProperties, InvariantUnderVocabularyRenaming) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const Tokens ref = random_sentence(rng, 6, 2, 12);
    const Tokens hyp = random_sentence(rng, 6, 1, 12);
    auto rename = [](Tokens t) {
      for (auto& w : t) w = "renamed_" + std::string(w.rbegin(), w.rend());
      return t;
    };
    EXPECT_DOUBLE_EQ(sbleu(hyp, ref), sbleu(rename(hyp), rename(ref)));
    EXPECT_DOUBLE_EQ(gleu(hyp, ref), gleu(rename(hyp), rename(ref)));
  }
}

TEST(MetricProperties, IdsAndWordsAgree) {
  const std::vector<int> h{4, 5, 6, 7, 8}, r{4, 5, 9, 7, 8, 10};
  EXPECT_DOUBLE_EQ(sbleu(h, r), sbleu(T("a b c d e"), T("a b x d e y")));
  EXPECT_DOUBLE_EQ(gleu(h, r), gleu(T("a b c d e"), T("a b x d e y")));
}

TEST(MetricConfig, RejectsBadFields) {
  MetricConfig cfg;
  cfg.max_ngram = 0;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg = {};
  cfg.chrf_beta = 0.0;
  EXPECT_THROW(cfg.validate(), UsageError);
}

namespace {
const std::vector<Tokens> kHyps{T("a b c d e f"), T("the cat sat on the mat"), T("one two three four five")};
const std::vector<Tokens> kRefs{T("a b c d x f"), T("the cat sat on a mat"), T("one two three four five six")};
}  // namespace

TEST(CorpusBleu, IdentityIsOne) { EXPECT_DOUBLE_EQ(corpus_bleu(kRefs, kRefs), 1.0); }

TEST(CorpusBleu, ThreeSentenceOracle) { EXPECT_NEAR(corpus_bleu(kHyps, kRefs), 0.6309583339593116, 1e-12); }

TEST(CorpusBleu, SingleSentenceIsUnsmoothedSbleu) {
  MetricConfig cfg;
  cfg.smoothing_epsilon = 0.0;
  const std::vector<Tokens> h{T("the quick brown cat jumps over the lazy dog today")}, r{kRef};
  EXPECT_NEAR(corpus_bleu(h, r), sbleu(h[0], r[0], cfg), 1e-14);
}

TEST(CorpusGleu, PooledCounts) {
  EXPECT_NEAR(corpus_gleu(kHyps, kRefs), 2.0 / 3.0, 1e-14);
  EXPECT_DOUBLE_EQ(corpus_gleu(kRefs, kRefs), 1.0);
}

TEST(CorpusTer, IdentityIsZero) { EXPECT_EQ(corpus_ter(kRefs, kRefs), 0.0); }

TEST(Spearman, MonotoneAndReversed) {
  const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 8, 16, 32}, z{5, 3, 2, 1, 0};
  EXPECT_DOUBLE_EQ(spearman_rho(x, y), 1.0);
  EXPECT_DOUBLE_EQ(spearman_rho(x, z), -1.0);
}

TEST(Spearman, TieHeavyMatchesOracle) {
  const std::vector<double> x{1, 2, 2, 3, 3, 3, 4, 5, 5, 1}, y{2, 2, 1, 3, 4, 4, 4, 5, 3, 1};
  EXPECT_NEAR(spearman_rho(x, y), 0.7943037974683544, 1e-12);
}

TEST(Spearman, BruteForceRanks) {
  const std::vector<double> x{3, 1, 3, 2, 3, 1};
  const auto r = average_ranks(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      less += v < x[i];
      equal += v == x[i];
    }
    EXPECT_DOUBLE_EQ(r[i], less + (equal + 1.0) / 2.0);
  }
}

TEST(Spearman, InvariantUnderMonotoneTransforms) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  std::vector<double> x(40), y(40);
  for (int i = 0; i < 40; ++i) {
    x[i] = g(rng);
    y[i] = x[i] + g(rng);
  }
  std::vector<double> fx(40), fy(40);
  for (int i = 0; i < 40; ++i) {
    fx[i] = std::exp(x[i]);
    fy[i] = y[i] * y[i] * y[i] - 7.0;
  }
  EXPECT_NEAR(spearman_rho(x, y), spearman_rho(fx, fy), 1e-12);
}

TEST(Spearman, ConstantSideThrows) {
  const std::vector<double> x{1, 1, 1}, y{1, 2, 3};
  EXPECT_THROW(spearman_rho(x, y), NumericalError);
}

namespace {
std::vector<SentenceStats> stats_of(const std::vector<Tokens>& hyps) {
  std::vector<SentenceStats> s;
  for (std::size_t i = 0; i < hyps.size(); ++i) s.push_back(bleu_stats(hyps[i], kRefs[i]));
  return s;
}
double bleu_metric(std::span<const double> s) { return bleu_from_stats(s); }
}  // namespace

TEST(ApproxRandomization, IdenticalSystemsGivePOne) {
  const auto a = stats_of(kHyps);
  const auto r = approx_randomization_test(a, a, bleu_metric, 500, 1);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(ApproxRandomization, AgreesWithExactEnumeration) {
  const std::vector<Tokens> other{T("a b c d e f"), T("the dog sat on a mat"), T("one two three four")};
  const auto a = stats_of(kHyps), b = stats_of(other);
  auto corpus = [&](unsigned mask, bool first) {
    std::vector<double> sum(a[0].size(), 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
      const bool swap = (mask >> i) & 1u;
      const auto& s = (swap != first) ? a[i] : b[i];
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += s[k];
    }
    return bleu_from_stats(sum);
  };
  const double observed = std::abs(corpus(0, true) - corpus(0, false));
  int extreme = 0;
  for (unsigned mask = 0; mask < 8; ++mask) {
    extreme += std::abs(corpus(mask, true) - corpus(mask, false)) >= observed - 1e-12;
  }
  const double exact = extreme / 8.0;
  const auto r = approx_randomization_test(a, b, bleu_metric, 200000, 7);
  EXPECT_NEAR(r.p_value, exact, 0.005);
  EXPECT_NEAR(r.observed_delta, corpus(0, true) - corpus(0, false), 1e-12);
}

TEST(ApproxRandomization, DeterministicUnderSeed) {
  const std::vector<Tokens> other{T("a b c"), T("the dog"), T("one two three four")};
  const auto a = stats_of(kHyps), b = stats_of(other);
  const auto r1 = approx_randomization_test(a, b, bleu_metric, 300, 42);
  const auto r2 = approx_randomization_test(a, b, bleu_metric, 300, 42);
  EXPECT_EQ(r1.p_value, r2.p_value);
  EXPECT_EQ(r1.n_at_least_as_extreme, r2.n_at_least_as_extreme);
}

TEST(ApproxRandomization, RejectsNoPermutations) {
  const auto a = stats_of(kHyps);
  EXPECT_THROW(approx_randomization_test(a, a, bleu_metric, 0, 1), UsageError);
}
