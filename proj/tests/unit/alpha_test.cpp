#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>

#include "bnmt/common/error.hpp"
#include "bnmt/reliability/alpha.hpp"
#include "bnmt/reliability/matrix.hpp"
#include "oracles.hpp"

using namespace bnmt;
using namespace bnmt::reliability;
using ratings::RatingRecord;
using ratings::SessionPlan;
using ratings::TaskKind;

namespace {

ReliabilityMatrix from_rows(const std::vector<std::vector<std::optional<double>>>& rows, Scale scale) {
  ReliabilityMatrix m(scale);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t u = 0; u < rows[r].size(); ++u) {
      if (rows[r][u]) m.add("r" + std::to_string(r), "u" + std::to_string(u), *rows[r][u]);
    }
  }
  return m;
}

constexpr auto _ = std::nullopt;

// Krippendorff's four-observer, twelve-unit reliability example.
const std::vector<std::vector<std::optional<double>>> kFourObservers{
    {1, 2, 3, 3, 2, 1, 4, 1, 2, _, _, _},
    {1, 2, 3, 3, 2, 2, 4, 1, 2, 5, _, 3},
    {_, 3, 3, 3, 2, 3, 4, 2, 2, 5, 1, _},
    {1, 2, 3, 3, 2, 4, 4, 1, 2, 5, 1, _},
};

}  // namespace

TEST(Alpha, PublishedFourObserverExample) {
  EXPECT_NEAR(krippendorff_alpha(from_rows(kFourObservers, Scale::nominal)).alpha, 0.743, 5e-4);
  EXPECT_NEAR(krippendorff_alpha(from_rows(kFourObservers, Scale::ordinal)).alpha, 0.815, 5e-4);
  EXPECT_NEAR(krippendorff_alpha(from_rows(kFourObservers, Scale::interval)).alpha, 0.849, 5e-4);
}

TEST(Alpha, PublishedExampleMatchesDirectOracle) {
  for (Scale s : {Scale::nominal, Scale::ordinal, Scale::interval}) {
    const auto m = from_rows(kFourObservers, s);
    EXPECT_NEAR(krippendorff_alpha(m).alpha, oracle::alpha_direct(m.values_by_unit(), s), 1e-12);
  }
}

TEST(Alpha, TwoByFourIntervalAndOrdinal) {
  const std::vector<std::vector<std::optional<double>>> rows{{1, 2, 3, 4}, {1, 2, 3, 3}};
  const auto interval = from_rows(rows, Scale::interval);
  const auto ordinal = from_rows(rows, Scale::ordinal);
  EXPECT_NEAR(krippendorff_alpha(interval).alpha, oracle::alpha_direct(interval.values_by_unit(), Scale::interval),
              1e-9);
  EXPECT_NEAR(krippendorff_alpha(ordinal).alpha, oracle::alpha_direct(ordinal.values_by_unit(), Scale::ordinal),
              1e-9);
  EXPECT_NEAR(krippendorff_alpha(interval).alpha, 0.8888888888888888, 1e-12);
  EXPECT_NEAR(krippendorff_alpha(ordinal).alpha, 0.9102564102564102, 1e-12);
}

TEST(Alpha, PairwiseCodesAtOrdinalScale) {
  const std::vector<std::vector<double>> units{{-1, -1, 0}, {1, 1, 1}, {0, -1, 0}, {1, 0, 1}, {-1, -1, -1}};
  EXPECT_NEAR(krippendorff_alpha(units, Scale::ordinal).alpha, 0.735084175084175, 1e-12);
}

TEST(Alpha, PerfectAgreementIsExactlyOne) {
  const std::vector<std::vector<double>> units{{1, 1, 1}, {3, 3}, {5, 5, 5, 5}, {2, 2}};
  for (Scale s : {Scale::nominal, Scale::ordinal, Scale::interval}) {
    const auto r = krippendorff_alpha(units, s);
    EXPECT_EQ(r.alpha, 1.0);
    EXPECT_FALSE(r.degenerate);
  }
}

TEST(Alpha, SingleCategoryIsDegenerate) {
  const std::vector<std::vector<double>> units{{2, 2}, {2, 2, 2}};
  const auto r = krippendorff_alpha(units, Scale::interval);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.alpha, 1.0);
}

TEST(Alpha, NoPairableUnitThrows) {
  const std::vector<std::vector<double>> units{{1}, {2}};
  EXPECT_THROW(krippendorff_alpha(units, Scale::interval), NumericalError);
}

TEST(Alpha, UniformRandomMatrixNearZero) {
  std::mt19937_64 rng(2018);
  std::uniform_int_distribution<int> v(1, 5);
  ReliabilityMatrix m(Scale::interval);
  for (int r = 0; r < 20; ++r) {
    for (int u = 0; u < 500; ++u) m.add("r" + std::to_string(r), "u" + std::to_string(u), v(rng));
  }
  EXPECT_LT(std::abs(krippendorff_alpha(m).alpha), 0.05);
}

TEST(Alpha, CountsUsedUnitsAndValues) {
  const auto r = krippendorff_alpha(from_rows(kFourObservers, Scale::nominal));
  EXPECT_EQ(r.n_units_used, 11u);
  EXPECT_EQ(r.n_values_used, 40u);
}

TEST(AlphaProperties, InvariantUnderRelabeling) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> v(1, 5);
  std::bernoulli_distribution present(0.7);
  for (int trial = 0; trial < 20; ++trial) {
    ReliabilityMatrix a(Scale::ordinal), b(Scale::ordinal);
    for (int r = 0; r < 5; ++r) {
      for (int u = 0; u < 15; ++u) {
        if (!present(rng)) continue;
        const int x = v(rng);
        a.add("r" + std::to_string(r), "u" + std::to_string(u), x);
        b.add("rater-" + std::to_string(97 - r), "unit-" + std::to_string(1000 - 3 * u), x);
      }
    }
    EXPECT_NEAR(krippendorff_alpha(a).alpha, krippendorff_alpha(b).alpha, 1e-12);
  }
}

TEST(AlphaProperties, IntervalInvariantUnderAffineMaps) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> v(1, 5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> units(12), mapped(12);
    for (int u = 0; u < 12; ++u) {
      for (int k = 0; k < 3; ++k) {
        const double x = v(rng);
        units[u].push_back(x);
        mapped[u].push_back(2.5 * x - 7.0);
      }
    }
    EXPECT_NEAR(krippendorff_alpha(units, Scale::interval).alpha,
                krippendorff_alpha(mapped, Scale::interval).alpha, 1e-10);
  }
}

TEST(AlphaProperties, MatchesDirectOracleOnRandomMatrices) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> v(1, 5), m(1, 4);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<double>> units(10);
    for (auto& u : units) {
      for (int k = m(rng); k > 0; --k) u.push_back(v(rng));
    }
    for (Scale s : {Scale::nominal, Scale::ordinal, Scale::interval}) {
      double oracle_alpha = 0.0;
      try {
        oracle_alpha = oracle::alpha_direct(units, s);
      } catch (...) {
        continue;
      }
      if (!std::isfinite(oracle_alpha)) continue;
      EXPECT_NEAR(krippendorff_alpha(units, s).alpha, oracle_alpha, 1e-10);
    }
  }
}

TEST(ZScore, TwoValuesAreSqrtHalf) {
  ReliabilityMatrix m(Scale::interval);
  m.add("r", "u1", 1);
  m.add("r", "u2", 5);
  const auto n = zscore_normalize(m);
  const auto& obs = n.matrix.observations();
  ASSERT_EQ(obs.size(), 2u);
  EXPECT_NEAR(obs[0].value, -0.7071067811865476, 1e-12);
  EXPECT_NEAR(obs[1].value, 0.7071067811865476, 1e-12);
  EXPECT_TRUE(n.warnings.empty());
}

TEST(ZScore, ConstantRaterBecomesZeroWithWarning) {
  ReliabilityMatrix m(Scale::interval);
  m.add("flat", "u1", 3);
  m.add("flat", "u2", 3);
  m.add("other", "u1", 1);
  m.add("other", "u2", 4);
  const auto n = zscore_normalize(m);
  for (const auto& o : n.matrix.observations()) {
    if (n.matrix.raters()[o.rater] == "flat") {
      EXPECT_EQ(o.value, 0.0);
    }
  }
  ASSERT_EQ(n.warnings.size(), 1u);
  EXPECT_NE(n.warnings[0].find("flat"), std::string::npos);
}

TEST(ZScore, Idempotent) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> v(1, 5);
  ReliabilityMatrix m(Scale::interval);
  for (int r = 0; r < 4; ++r) {
    for (int u = 0; u < 9; ++u) m.add("r" + std::to_string(r), "u" + std::to_string(u), v(rng));
  }
  const auto once = zscore_normalize(m).matrix;
  const auto twice = zscore_normalize(once).matrix;
  for (std::size_t i = 0; i < once.observations().size(); ++i) {
    EXPECT_NEAR(once.observations()[i].value, twice.observations()[i].value, 1e-12);
  }
}

namespace {

SessionPlan repeat_plan(TaskKind kind, const std::vector<std::string>& repeated) {
  SessionPlan plan;
  plan.task_kind = kind;
  plan.sections = {repeated, repeated};
  plan.repeat_pool = {repeated.begin(), repeated.end()};
  return plan;
}

std::vector<RatingRecord> answers(const std::string& rater, TaskKind kind, const std::vector<std::string>& ids,
                                  const std::vector<int>& first, const std::vector<int>& second) {
  std::vector<RatingRecord> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.push_back({rater, ids[i], 0, kind, first[i], 0, 0});
    out.push_back({rater, ids[i], 1, kind, second[i], 1, 0});
  }
  return out;
}

const std::vector<std::string> kIds{"a", "b", "c", "d", "e", "f"};

}  // namespace

TEST(IntraRater, IdenticalRepeatsGiveOne) {
  const auto plan = repeat_plan(TaskKind::cardinal, kIds);
  const std::vector<int> v{1, 2, 3, 4, 2, 3};
  EXPECT_EQ(intra_rater_alpha(answers("x", TaskKind::cardinal, kIds, v, v), plan).alpha, 1.0);
}

TEST(IntraRater, ShiftedSecondShowingMatchesOracle) {
  const auto plan = repeat_plan(TaskKind::cardinal, kIds);
  const std::vector<int> first{1, 2, 3, 4, 2, 3}, second{2, 3, 4, 5, 3, 4};
  std::vector<std::vector<double>> units;
  for (std::size_t i = 0; i < first.size(); ++i) units.push_back({double(first[i]), double(second[i])});
  const double got = intra_rater_alpha(answers("x", TaskKind::cardinal, kIds, first, second), plan).alpha;
  EXPECT_NEAR(got, oracle::alpha_direct(units, Scale::interval), 1e-12);
  EXPECT_NEAR(got, 0.6071428571428572, 1e-12);
}

TEST(IntraRater, PairwiseUsesOrdinalScale) {
  const auto plan = repeat_plan(TaskKind::pairwise, kIds);
  const std::vector<int> first{-1, 0, 1, 1, -1, 0}, second{-1, 1, 1, 0, -1, 0};
  std::vector<std::vector<double>> units;
  for (std::size_t i = 0; i < first.size(); ++i) units.push_back({double(first[i]), double(second[i])});
  EXPECT_NEAR(intra_rater_alpha(answers("x", TaskKind::pairwise, kIds, first, second), plan).alpha,
              oracle::alpha_direct(units, Scale::ordinal), 1e-12);
}

TEST(IntraRater, TooFewRepeatsThrowsAndIsSkippedInMap) {
  const std::vector<std::string> ids{"a"};
  const auto plan = repeat_plan(TaskKind::cardinal, ids);
  const auto recs = answers("x", TaskKind::cardinal, ids, {3}, {4});
  EXPECT_THROW(intra_rater_alpha(recs, plan), NumericalError);
  EXPECT_TRUE(intra_rater_alphas(recs, plan).empty());
}

TEST(IntraRater, MixedRatersRejected) {
  const auto plan = repeat_plan(TaskKind::cardinal, kIds);
  auto recs = answers("x", TaskKind::cardinal, kIds, {1, 2, 3, 4, 5, 1}, {1, 2, 3, 4, 5, 1});
  recs.back().rater_id = "y";
  EXPECT_THROW(intra_rater_alpha(recs, plan), DataError);
}

TEST(PairwiseRaterAlphas, OnePerDefinedPair) {
  const auto m = from_rows({{1, 2, 3, 4}, {1, 2, 3, 3}, {4, 3, 2, 1}}, Scale::interval);
  const auto xs = pairwise_rater_alphas(m);
  ASSERT_EQ(xs.size(), 3u);
  EXPECT_NEAR(xs[0], 0.8888888888888888, 1e-12);
}

TEST(Summary, SampleStdev) {
  const std::vector<double> xs{1, 2, 3, 4};
  const auto s = summarize(xs);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stdev, std::sqrt(5.0 / 3.0), 1e-15);
}

TEST(Matrix, FromRecordsKeepsRepeatsAsExtraValues) {
  std::vector<RatingRecord> recs{{"r1", "i1", 0, TaskKind::cardinal, 3, 0, 0},
                                 {"r1", "i1", 1, TaskKind::cardinal, 4, 1, 0},
                                 {"r2", "i1", 0, TaskKind::cardinal, 2, 0, 0},
                                 {"r2", "p1", 0, TaskKind::pairwise, -1, 0, 0}};
  const auto all = matrix_from_records(recs, TaskKind::cardinal);
  EXPECT_EQ(all.observations().size(), 3u);
  EXPECT_EQ(all.scale(), Scale::interval);
  MatrixOptions first_only;
  first_only.include_repeats = false;
  EXPECT_EQ(matrix_from_records(recs, TaskKind::cardinal, first_only).observations().size(), 2u);
  EXPECT_EQ(matrix_from_records(recs, TaskKind::pairwise).scale(), Scale::ordinal);
}
