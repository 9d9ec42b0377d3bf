#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drt/dataset.hpp"
#include "drt/partition_tree.hpp"
#include "drt/thresholded_histogram.hpp"

namespace drt {

enum class SplitCriterion { DensityRatio, Gini };
enum class SizeMode { Full, Simplified };

const char* to_string(SplitCriterion c) noexcept;
const char* to_string(SizeMode m) noexcept;
SplitCriterion parse_criterion(const std::string& text);
SizeMode parse_size_mode(const std::string& text);

// Part-sample points pooled with artificial labels: 0 for reference rows,
// 1 for contaminant rows.
struct PartSample {
  PointMatrix points;
  std::vector<std::uint8_t> label;
  std::int64_t n0 = 0;
  std::int64_t n1 = 0;

  static PartSample from(const LabeledDataset& ds, const PartIndices& reference, const PartIndices& contaminant);
  static PartSample from(const PointMatrix& reference, const PointMatrix& contaminant);
};

struct SplitCandidate {
  int bin = 0;
  std::size_t dim = 0;
  double value = 0.0;
  double delta = 0.0;      // signal gain
  double gini_gain = 0.0;  // weighted Gini impurity decrease

  double gain(SplitCriterion c) const noexcept { return c == SplitCriterion::DensityRatio ? delta : gini_gain; }
};

// Smallest combined point count a bin needs before it may be split:
// ceil(3 * n1_part * eps1), with eps1 from the part-sample context.
std::size_t min_split_points(const ThresholdContext& part_ctx);

// Signal gain of splitting a bin with counts (c0, c1) into (l0, l1) and
// (c0 - l0, c1 - l1), all heights thresholded under `ctx`.
double signal_gain(const ThresholdContext& ctx, std::int64_t c0, std::int64_t c1, std::int64_t l0, std::int64_t l1);

// Parent Gini minus the child Gini weighted by child point fractions.
double gini_gain(std::int64_t c0, std::int64_t c1, std::int64_t l0, std::int64_t l1);

// Best axis-aligned split of the bin holding `members` (rows of `part`).
// Candidates are midpoints between consecutive distinct coordinates of the
// members along each axis. Ties go to the lower axis, then the lower value.
// Returns nothing when the bin is below `min_points`, no candidate exists, or
// the best gain is not positive.
std::optional<SplitCandidate> best_split(const PartSample& part, std::span<const std::size_t> members, int bin,
                                         const ThresholdContext& ctx, SplitCriterion criterion,
                                         std::size_t min_points);

std::optional<SplitCandidate> best_split(const PartitionTree& tree, int bin, const PartSample& part,
                                         const ThresholdContext& ctx, SplitCriterion criterion,
                                         std::size_t min_points);

struct GrowthOptions {
  double alpha = 0.05;
  std::size_t k_max = 64;
  std::int64_t n_test = 1;  // enters eps0 through t/n
  SplitCriterion criterion = SplitCriterion::DensityRatio;
};

struct GrowthStep {
  SplitCandidate split;
  std::size_t bin_points = 0;  // part points in the bin when it was split
};

// Nested partitions P_1 ⊂ ... ⊂ P_K grown one split at a time. Step i turns
// P_{i+1} into P_{i+2}.
struct PartitionSequence {
  PartitionTree tree{1};
  std::vector<GrowthStep> steps;
  std::size_t k_max = 1;
  SplitCriterion criterion = SplitCriterion::DensityRatio;
  ThresholdContext part_ctx;
  std::size_t min_points = 0;

  std::size_t size() const noexcept { return tree.bin_count(); }
  PartitionTree partition(std::size_t k) const { return tree.prefix(k); }
};

// Greedy growth from the single-bin tree: at every step the best candidate
// over all leaves is applied (lower bin id on ties) until k_max leaves or no
// leaf has an admissible positive-gain split. Thresholds use
// u = ln(8 k_max / alpha) and the part-sample sizes throughout.
PartitionSequence grow_sequence(const PartSample& part, const GrowthOptions& options);

// Estimation-sample counts for every member P_1..P_K of the sequence.
std::vector<BinTable> sequence_tables(const PartitionSequence& seq, const PointMatrix& est0, const PointMatrix& est1);

struct SequenceEstimate {
  std::vector<ThresholdContext> ctx;          // index K-1
  std::vector<ThresholdedHistogram> hist;     // index K-1
  std::vector<double> sigma2() const;
};

// Thresholded histograms of every member on the estimation samples, with
// u = ln(8 k_max / alpha) so one confidence budget covers all members.
SequenceEstimate estimate_sequence(const PartitionSequence& seq, const PointMatrix& est0, const PointMatrix& est1,
                                   double alpha, std::int64_t n_test);

struct SizeSelection {
  std::size_t k_star = 1;
  std::vector<double> criterion;  // NaN where sigma2_hat = 0 or K < min_k
  bool zero_signal = false;       // no member had positive signal
};

// Detection-rate criterion for one member.
double size_criterion(const ThresholdedHistogram& hist, const ThresholdContext& ctx, SizeMode mode);

// argmin of the size criterion over members with positive signal and
// K >= min_k; ties go to the smallest K.
SizeSelection select_size(std::span<const ThresholdedHistogram> hists, std::span<const ThresholdContext> ctxs,
                          SizeMode mode, std::size_t min_k = 1);

std::string to_json(const PartitionSequence& seq, const SequenceEstimate* est, const SizeSelection* selection);

}  // namespace drt
