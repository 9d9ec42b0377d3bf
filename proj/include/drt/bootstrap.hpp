#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "drt/dataset.hpp"
#include "drt/edrt.hpp"
#include "drt/partition_tree.hpp"
#include "drt/thresholded_histogram.hpp"

namespace drt {

struct BootstrapConfig {
  std::size_t replicates = 200;
  double quantile_level = 0.95;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
};

struct BootstrapResult {
  double tau = 0.0;
  std::vector<double> statistics;  // replicate order
};

// Upper empirical quantile: the ceil(level * B)-th smallest value.
double empirical_quantile(std::vector<double> values, double level);

// Null distribution of the statistic on a fixed partition. Each replicate
// holds out n reference points as a pseudo test sample, re-estimates the
// ratios from n0 reference points resampled from the rest and n1 contaminant
// points resampled from all of them, and scores the held-out points.
// bins0 / bins1 are the bin ids of the estimation points; ctx supplies
// K, n, n0 = |bins0| and n1 = |bins1|.
BootstrapResult bootstrap_threshold(std::span<const int> bins0, std::span<const int> bins1,
                                    const ThresholdContext& ctx, const BootstrapConfig& cfg);
BootstrapResult bootstrap_threshold(const PartitionTree& tree, const PointMatrix& est0, const PointMatrix& est1,
                                    const ThresholdContext& ctx, const BootstrapConfig& cfg);

// Statistic with ratios estimated on the full estimation samples, compared
// strictly against tau.
TestReport bedrt_decision(const ThresholdedHistogram& hist, const ThresholdContext& ctx,
                          std::span<const std::int64_t> test_counts, const BootstrapResult& boot);

TestReport run_bedrt(const PartitionTree& tree, const PointMatrix& est0, const PointMatrix& est1,
                     const PointMatrix& test, const ThresholdContext& ctx, const BootstrapConfig& cfg,
                     BootstrapResult* boot_out = nullptr);

}  // namespace drt
