#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "drt/random.hpp"

namespace drt {
namespace {

TEST(Random, DerivedSeedsDependOnPathOrder) {
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_NE(derive_seed(1, {2}), derive_seed(2, {2}));
  EXPECT_EQ(derive_seed(9, {4, 5}), derive_seed(9, {4, 5}));
}

TEST(Random, UniformIndexStaysInRangeAndCoversIt) {
  Rng rng = make_rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = uniform_index(rng, 7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_NEAR(h, 10000, 500);
  EXPECT_EQ(uniform_index(rng, 1), 0u);
  EXPECT_EQ(uniform_index(rng, 0), 0u);
}

TEST(Random, StandardNormalMoments) {
  Rng rng = make_rng(11);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}

TEST(Random, Uniform01IsHalfOpen) {
  Rng rng = make_rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

}  // namespace
}  // namespace drt
