#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drt/box.hpp"
#include "drt/dataset.hpp"
#include "drt/thresholded_histogram.hpp"

namespace drt {

struct TestReport {
  std::string method = "edrt";
  double statistic = 0.0;
  double threshold = 0.0;
  // sqrt(s2)*sqrt(10uK/n0), sqrt(s2)*sqrt(6t/n), (t/3n) max|r-1|, 3 eps1 K1
  std::array<double, 4> threshold_terms{};
  bool reject = false;
  double sigma2_hat = 0.0;
  std::size_t K = 0;
  std::size_t K0 = 0;
  std::size_t K1 = 0;
  double max_abs_r_minus_1 = 0.0;
  double kernel_bandwidth = 0.0;  // mmd only

  std::array<double, 4> theta_terms{};
  double theta_detectable = 0.0;
  bool theta_infinite = false;      // sigma2_hat = 0
  bool theta_undetectable = false;  // bound above 1

  // Bootstrap or permutation null draws, when the test has one.
  std::vector<double> null_statistics;

  ThresholdContext ctx;
  std::string to_json(bool with_null = false) const;
};

// (1/n) sum_k (r_k - 1) N_k with n the total of `test_counts`.
double statistic(const ThresholdedHistogram& hist, std::span<const std::int64_t> test_counts);

// Pointwise form of the same statistic: each test point contributes
// r(bin of x) - 1.
double pointwise_statistic(const ThresholdedHistogram& hist, const PartitionTree& tree, const PointMatrix& test);

// The four threshold addends; their sum is the rejection cutoff.
std::array<double, 4> threshold_terms(const ThresholdedHistogram& hist, const ThresholdContext& ctx);
double threshold(const ThresholdedHistogram& hist, const ThresholdContext& ctx);

struct DetectableTheta {
  std::array<double, 4> terms{};
  double total = 0.0;
  bool infinite = false;
  bool undetectable = false;
};

// 353 sqrt(t/(n s2)) + 400 sqrt(u) K1/(s2 sqrt(n1)) + 30 eps0 K0/s2
//   + 64 sqrt(uK/(n0 s2))
DetectableTheta theta_detectable(const ThresholdedHistogram& hist, const ThresholdContext& ctx);

// Rejects when the statistic reaches the threshold. With sigma2_hat = 0 the
// comparison is strict so exact ties at zero never reject.
TestReport run_test(const ThresholdedHistogram& hist, const ThresholdContext& ctx,
                    std::span<const std::int64_t> test_counts);

// Inverse standard normal CDF (Acklam's rational approximation refined by one
// Halley step).
double normal_quantile(double p);

// Known-density likelihood-ratio test: S_n = mean(f1/f0 - 1) against
// sqrt(sigma2) * z_{1-alpha} / sqrt(n).
TestReport oracle_lr_test(const DensityFn& f0, const DensityFn& f1, double sigma2, const PointMatrix& test,
                          double alpha);

// True when some test point lies in `region`.
bool oracle_region_test(const Box& region, const PointMatrix& test);

}  // namespace drt
