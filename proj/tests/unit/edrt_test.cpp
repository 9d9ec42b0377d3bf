#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "drt/edrt.hpp"
#include "drt/error.hpp"
#include "drt/gaussian.hpp"
#include "drt/random.hpp"
#include "json.hpp"

namespace drt {
namespace {

struct Golden {
  ThresholdContext ctx = make_context(0.05, 2, 500, 1000, 100);
  BinTable table{{990, 10}, {5, 95}, {400, 100}};
  ThresholdedHistogram hist = estimate(ctx, table);
};

TEST(Statistic, GoldenFixture) {
  const Golden g;
  EXPECT_NEAR(statistic(g.hist, g.table.n_test), 4.1056192127012679, 1e-12);
  const auto terms = threshold_terms(g.hist, g.ctx);
  EXPECT_NEAR(terms[0], 1.349325490084474, 1e-12);
  EXPECT_NEAR(terms[1], 0.89107471695877833, 1e-12);
  EXPECT_NEAR(terms[2], 0.048689303294508039, 1e-14);
  EXPECT_NEAR(terms[3], 1.1705968264578259, 1e-12);
  EXPECT_NEAR(threshold(g.hist, g.ctx), 3.4596863367955862, 1e-12);
  const auto rep = run_test(g.hist, g.ctx, g.table.n_test);
  EXPECT_TRUE(rep.reject);
  EXPECT_EQ(rep.K0, 1u);
  EXPECT_EQ(rep.K1, 1u);
  EXPECT_NEAR(rep.max_abs_r_minus_1, 19.798411916201993, 1e-11);
}

TEST(Statistic, SingleBinIsZero) {
  const auto ctx = make_context(0.05, 1, 100, 1000, 100);
  const auto h = estimate(ctx, std::vector<std::int64_t>{1000}, std::vector<std::int64_t>{100});
  const std::vector<std::int64_t> test{100};
  EXPECT_EQ(statistic(h, test), 0.0);
  const auto rep = run_test(h, ctx, test);
  EXPECT_EQ(rep.threshold, 0.0);
  EXPECT_FALSE(rep.reject);
  EXPECT_TRUE(rep.theta_infinite);
}

TEST(Statistic, ThresholdedBinsContributeNothing) {
  const auto ctx = make_context(0.05, 2, 500, 1000, 100, 1.0);
  // second bin: 10/1000 and 5/100 both below eps1 = sqrt(0.03)
  const auto h = estimate(ctx, std::vector<std::int64_t>{990, 10}, std::vector<std::int64_t>{95, 5});
  ASSERT_EQ(h.omega[1], Omega::Omega01);
  EXPECT_EQ(statistic(h, std::vector<std::int64_t>{0, 500}), 0.0);
}

TEST(Statistic, RejectsEmptyOrMismatchedCounts) {
  const Golden g;
  EXPECT_THROW(statistic(g.hist, std::vector<std::int64_t>{0, 0}), PreconditionError);
  EXPECT_THROW(statistic(g.hist, std::vector<std::int64_t>{1, 2, 3}), PreconditionError);
}

TEST(Statistic, PointwiseMatchesBinwise) {
  const auto s = GaussianSetting::named(SettingLabel::A);
  PartitionTree tree(2);
  tree.split_leaf_in_place(0, 0, 0.5);
  tree.split_leaf_in_place(1, 1, 0.55);
  tree.split_leaf_in_place(0, 1, 0.4);
  const auto e0 = sample_truncated_gaussian(s, 0, 5000, 1), e1 = sample_truncated_gaussian(s, 1, 1000, 2);
  const auto ctx = make_context(0.05, tree.bin_count(), 700, 5000, 1000);
  const auto h = estimate(ctx, count_bins(tree, e0), count_bins(tree, e1));
  const auto test = sample_mixture(s, 0.2, 700, 3).points;
  EXPECT_NEAR(pointwise_statistic(h, tree, test), statistic(h, count_bins(tree, test)), 1e-13);
}

TEST(Threshold, InvalidContextNamesTheHypothesis) {
  const auto ctx = make_context(0.05, 2, 100, 100, 200);
  const auto h = estimate(ctx, std::vector<std::int64_t>{50, 50}, std::vector<std::int64_t>{100, 100});
  try {
    threshold(h, ctx);
    FAIL() << "expected an error";
  } catch (const InvalidHypothesisError& e) {
    EXPECT_NE(std::string(e.what()).find("n1 <= n0"), std::string::npos);
  }
}

TEST(Threshold, GrowsWithTheContaminantFloor) {
  Golden g;
  const double before = threshold(g.hist, g.ctx);
  g.hist.K1 = 2;
  EXPECT_NEAR(threshold(g.hist, g.ctx) - before, 3 * g.ctx.eps1, 1e-12);
}

TEST(ThetaDetectable, GoldenTerms) {
  const Golden g;
  const auto d = theta_detectable(g.hist, g.ctx);
  EXPECT_NEAR(d.terms[0], 7.1591369192190796, 1e-11);
  EXPECT_NEAR(d.terms[1], 5.0238066739760339, 1e-11);
  EXPECT_NEAR(d.terms[2], 0.025464836785944561, 1e-14);
  EXPECT_NEAR(d.terms[3], 1.5224539509564369, 1e-12);
  EXPECT_NEAR(d.total, 13.730862380937495, 1e-11);
  EXPECT_TRUE(d.undetectable);
  EXPECT_FALSE(d.infinite);
}

TEST(ThetaDetectable, MatchesFormulaOnRandomInputs) {
  Rng rng = make_rng(77);
  for (int i = 0; i < 200; ++i) {
    ThresholdedHistogram h;
    const std::size_t K = 1 + uniform_index(rng, 40);
    h.h0.assign(K, 1.0);
    h.sigma2_hat = std::exp(8 * uniform01(rng) - 4);
    h.K0 = uniform_index(rng, K + 1);
    h.K1 = uniform_index(rng, K + 1);
    const auto n = static_cast<std::int64_t>(100 + uniform_index(rng, 100000));
    const auto n0 = static_cast<std::int64_t>(100 + uniform_index(rng, 100000));
    const auto n1 = static_cast<std::int64_t>(10 + uniform_index(rng, 10000));
    const auto c = make_context(0.01 + 0.2 * uniform01(rng), K, n, n0, n1);
    const double s2 = h.sigma2_hat;
    const double want[4] = {353 * std::sqrt(c.t / (n * s2)), 400 * std::sqrt(c.u) * h.K1 / (s2 * std::sqrt(n1)),
                            30 * c.eps0 * h.K0 / s2, 64 * std::sqrt(c.u * K / (n0 * s2))};
    const auto got = theta_detectable(h, c);
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(got.terms[j], want[j], 1e-12 * std::max(want[j], 1e-300));
  }
}

TEST(ThetaDetectable, VanishesWithLargeSignal) {
  Golden g;
  g.hist.sigma2_hat = 1e30;
  EXPECT_LT(theta_detectable(g.hist, g.ctx).total, 1e-10);
  g.hist.sigma2_hat = 0;
  const auto d = theta_detectable(g.hist, g.ctx);
  EXPECT_TRUE(d.infinite);
  EXPECT_TRUE(std::isinf(d.total));
}

TEST(ThetaDetectable, ScalesWithSampleSizes) {
  Golden g;
  const auto a = theta_detectable(g.hist, g.ctx);
  const auto c2 = make_context(0.05, 2, 1000, 2000, 200);
  const auto b = theta_detectable(g.hist, c2);
  EXPECT_NEAR(b.terms[0] / a.terms[0], 1 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(b.terms[1] / a.terms[1], 1 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(b.terms[2] / a.terms[2], 0.5, 1e-14);  // eps0 = 3u/n0 branch
  EXPECT_NEAR(b.terms[3] / a.terms[3], 1 / std::sqrt(2.0), 1e-14);
  const auto t = threshold_terms(g.hist, c2);
  const auto t0 = threshold_terms(g.hist, g.ctx);
  EXPECT_NEAR(t[0] / t0[0], 1 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(t[2] / t0[2], 0.5, 1e-14);
  EXPECT_NEAR(t[3] / t0[3], 1 / std::sqrt(2.0), 1e-14);
}

TEST(Report, JsonItemisesTerms) {
  const Golden g;
  const auto j = nlohmann::json::parse(run_test(g.hist, g.ctx, g.table.n_test).to_json());
  EXPECT_TRUE(j["reject"].get<bool>());
  EXPECT_NEAR(j["threshold_terms"]["contaminant_floor"].get<double>(), 1.1705968264578259, 1e-12);
  EXPECT_EQ(j["theta_detectable"]["terms"].size(), 4u);
}

TEST(NormalQuantile, MatchesReference) {
  EXPECT_NEAR(normal_quantile(0.95), 1.6448536269514722, 1e-8);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-8);
  EXPECT_NEAR(normal_quantile(1e-6), -4.753424308822899, 1e-8);
  EXPECT_NEAR(normal_quantile(0.999999), 4.753424308822899, 1e-8);
  EXPECT_EQ(normal_quantile(0.5), 0.0);
  EXPECT_THROW(normal_quantile(1.0), PreconditionError);
}

TEST(OracleLr, EqualDensitiesNeverReject) {
  const DensityFn one = [](std::span<const double>) { return 1.0; };
  PointMatrix test(1);
  for (int i = 0; i < 50; ++i) test.push_back(std::vector<double>{i / 50.0});
  for (double alpha : {0.01, 0.05, 0.2, 0.49}) {
    const auto r = oracle_lr_test(one, one, 0.0, test, alpha);
    EXPECT_EQ(r.statistic, 0.0);
    EXPECT_EQ(r.threshold, 0.0);
    EXPECT_FALSE(r.reject);
  }
}

TEST(OracleLr, ZeroReferenceDensityIsAnError) {
  const DensityFn f0 = [](std::span<const double> x) { return x[0] < 0.5 ? 2.0 : 0.0; };
  const DensityFn f1 = [](std::span<const double>) { return 1.0; };
  PointMatrix test(1);
  test.push_back(std::vector<double>{0.7});
  EXPECT_THROW(oracle_lr_test(f0, f1, 1.0, test, 0.05), PreconditionError);
}

TEST(OracleLr, AsymptoticLevelUnderTheNull) {
  const auto s = GaussianSetting::named(SettingLabel::A);
  const auto f0 = s.f0(), f1 = s.f1();
  const double sigma2 = population_signal(f0, f1, nullptr);
  const DensityFn d0 = [&](std::span<const double> x) { return f0.density(x); };
  const DensityFn d1 = [&](std::span<const double> x) { return f1.density(x); };
  int rejects = 0;
  const int reps = 500;
  for (int r = 0; r < reps; ++r)
    rejects += oracle_lr_test(d0, d1, sigma2, sample_truncated_gaussian(s, 0, 10000, derive_seed(91, {std::uint64_t(r)})), 0.05).reject;
  const double rate = static_cast<double>(rejects) / reps;
  EXPECT_GE(rate, 0.03);
  EXPECT_LE(rate, 0.08);
}

TEST(OracleRegion, Basics) {
  PointMatrix empty(2);
  EXPECT_FALSE(oracle_region_test(Box::unit(2), empty));
  PointMatrix one(2);
  one.push_back(std::vector<double>{1.0, 1.0});
  EXPECT_TRUE(oracle_region_test(Box::unit(2), one));
  EXPECT_FALSE(oracle_region_test(Box{{0.0, 0.0}, {0.5, 0.5}}, one));
}

TEST(OracleRegion, RejectionProbabilityMatchesBinomial) {
  // f0 uniform on [0, 0.5) x [0, 1), f1 uniform on the cube; region mass p = 0.5
  const Box region{{0.5, 0.0}, {1.0, 1.0}};
  const double theta = 0.01, p = 0.5;
  const int n = 100, reps = 4000;
  Rng rng = make_rng(5150);
  int hits = 0;
  for (int r = 0; r < reps; ++r) {
    PointMatrix test(2);
    for (int i = 0; i < n; ++i) {
      const bool cont = uniform01(rng) < theta;
      const double x = cont ? uniform01(rng) : 0.5 * uniform01(rng);
      test.push_back(std::vector<double>{x, uniform01(rng)});
    }
    hits += oracle_region_test(region, test);
  }
  const double want = 1 - std::pow(1 - theta * p, n);
  const double sd = std::sqrt(want * (1 - want) / reps);
  EXPECT_NEAR(static_cast<double>(hits) / reps, want, 3 * sd);
}

}  // namespace
}  // namespace drt
