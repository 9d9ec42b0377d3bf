#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "drt/dataset.hpp"
#include "drt/edrt.hpp"

namespace drt {

// Gaussian RBF kernel exp(-|x-y|^2 / (2 b^2)). Without a fixed bandwidth the
// median heuristic is applied to the pooled sample.
struct KernelSpec {
  std::optional<double> bandwidth;
  std::size_t median_cap = 1000;

  static KernelSpec parse(const std::string& text);  // number or "median"
};

double rbf_kernel(std::span<const double> x, std::span<const double> y, double bandwidth) noexcept;

// Linear-time estimate over consecutive disjoint pairs (1,2), (3,4), ... of
// the first m = min(|X|, |Y|) rows, rounded down to an even count.
double mmd_linear(const PointMatrix& X, const PointMatrix& Y, double bandwidth);

// Median pairwise distance over a subsample of at most `cap` points.
double median_heuristic(const PointMatrix& Z, std::size_t cap, std::uint64_t seed);

struct MmdConfig {
  KernelSpec kernel;
  std::size_t replicates = 200;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

// Permutation null: pool both samples, shuffle, split back to the original
// sizes and recompute; rejects when the observed value exceeds the upper
// (1 - alpha) empirical quantile.
TestReport mmd_test(const PointMatrix& reference, const PointMatrix& test, const MmdConfig& cfg);

}  // namespace drt
