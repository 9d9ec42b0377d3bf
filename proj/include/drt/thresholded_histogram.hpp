#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drt/partition_tree.hpp"

namespace drt {

class GaussianMixture;

// Confidence parameters and thresholds shared by every bin of a partition.
struct ThresholdContext {
  double alpha = 0.05;
  double u = 0.0;
  double t = 0.0;
  std::int64_t n = 0;   // test sample size
  std::int64_t n0 = 0;  // reference (estimation) sample size
  std::int64_t n1 = 0;  // contaminant (estimation) sample size
  double eps0 = 0.0;    // max(3u/n0, t/n)
  double eps1 = 0.0;    // sqrt(3u/n1)
  std::size_t K = 1;

  // 3*eps0 <= eps1 <= 1 and n1 <= n0; the level guarantee needs all three.
  bool valid = false;
  // Human-readable list of violated conditions; empty when valid.
  std::string violations;
};

// u = ln(4K/alpha) and t = ln(2/alpha) unless overridden.
ThresholdContext make_context(double alpha, std::size_t K, std::int64_t n, std::int64_t n0, std::int64_t n1,
                              std::optional<double> u_override = std::nullopt,
                              std::optional<double> t_override = std::nullopt);

// u used for every member of a nested sequence capped at k_max bins.
double sequence_u(double alpha, std::size_t k_max);

enum class Omega : std::uint8_t { Plain, Omega0, Omega1, Omega01 };

const char* to_string(Omega w) noexcept;

struct BinEstimate {
  double h0 = 0.0;
  double h1 = 0.0;
  Omega omega = Omega::Plain;

  double ratio() const noexcept { return h1 / h0; }
  // (h1/h0 - 1)^2 h0, the bin's share of the estimated signal.
  double signal() const noexcept {
    const double d = h1 / h0 - 1.0;
    return d * d * h0;
  }
};

// Classification and thresholded estimates for one bin.
BinEstimate estimate_bin(const ThresholdContext& ctx, std::int64_t count0, std::int64_t count1) noexcept;

struct ThresholdedHistogram {
  std::vector<double> h0;
  std::vector<double> h1;
  std::vector<double> r;
  std::vector<Omega> omega;
  double sigma2_hat = 0.0;
  std::size_t K0 = 0;  // |Omega0|
  std::size_t K1 = 0;  // |Omega1| + |Omega01|

  std::size_t bins() const noexcept { return h0.size(); }
  double max_abs_r_minus_1() const noexcept;
  // Sum of h1 over all bins and the bound 1 + 3 eps1 K1 it never exceeds.
  double sum_h1() const noexcept;
};

// Requires counts.n0 / counts.n1 of length ctx.K summing to ctx.n0 / ctx.n1.
ThresholdedHistogram estimate(const ThresholdContext& ctx, const BinTable& counts);
ThresholdedHistogram estimate(const ThresholdContext& ctx, std::span<const std::int64_t> n0,
                              std::span<const std::int64_t> n1);

std::string to_json(const ThresholdedHistogram& hist, const ThresholdContext& ctx);

using DensityFn = std::function<double(std::span<const double>)>;

// Population signal by tensor-grid midpoint quadrature with `resolution`
// cells per axis. Without a tree this is sigma^2 = ∫ (f1/f0 - 1)^2 f0; with a
// tree it is the signal of the piecewise-constant bin averages,
// sum_k (p1_k/p0_k - 1)^2 p0_k with p the bin masses.
double population_signal(const DensityFn& f0, const DensityFn& f1, std::size_t dim, const PartitionTree* tree,
                         std::size_t resolution);

// Closed forms for truncated-Gaussian models. With a tree, bin masses are
// exact rectangle probabilities. Without one, sigma^2 uses the per-axis erf
// formula when both laws are single Gaussians with equal variances and falls
// back to midpoint quadrature at `resolution` otherwise.
double population_signal(const GaussianMixture& f0, const GaussianMixture& f1, const PartitionTree* tree,
                         std::size_t resolution = 2048);

// sum_k (p1_k/p0_k - 1)^2 p0_k for explicit bin masses.
double discretized_signal(std::span<const double> p0, std::span<const double> p1);

}  // namespace drt
