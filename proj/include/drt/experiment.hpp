#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drt/bootstrap.hpp"
#include "drt/dataset.hpp"
#include "drt/drop.hpp"
#include "drt/gaussian.hpp"
#include "drt/mmd.hpp"

namespace drt {

enum class TestKind { EDRT, BEDRT, MMD, OracleLR };

const char* to_string(TestKind k) noexcept;
TestKind parse_test_kind(const std::string& text);

struct ExperimentPlan {
  GaussianSetting setting = GaussianSetting::named(SettingLabel::A);
  std::vector<std::size_t> n_train{1000, 3000, 10000, 30000, 100000};
  std::vector<double> theta = default_theta_grid();
  std::size_t reps = 100;
  std::vector<TestKind> tests{TestKind::EDRT};
  double alpha = 0.05;
  double frac_n0 = 0.7;
  double frac_test = 0.1;
  double frac_part = 0.5;
  std::size_t k_max = 64;
  SplitCriterion criterion = SplitCriterion::DensityRatio;
  SizeMode size_mode = SizeMode::Full;
  std::size_t min_k = 1;
  std::size_t bootstrap_reps = 200;
  double quantile = 0.95;
  std::size_t mmd_reps = 200;
  KernelSpec kernel;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  // 12 log-spaced values from 3e-3 to 0.3.
  static std::vector<double> default_theta_grid();
  void validate() const;
};

struct SampleSizes {
  std::size_t n0 = 0;  // reference training points
  std::size_t n1 = 0;  // contaminant training points
  std::size_t n = 0;   // test points
};

SampleSizes sample_sizes(const ExperimentPlan& plan, std::size_t n_train);

// Everything fitted on one training draw: the DROP sequence from the part
// samples, per-K estimates and the selected member from the est samples.
struct TrainedModel {
  PartitionSequence seq;
  SequenceEstimate est;
  SizeSelection selection;
  PartitionTree tree{1};
  ThresholdContext ctx;
  ThresholdedHistogram hist;
  PointMatrix reference;  // all reference training points
  PointMatrix est0;
  PointMatrix est1;
  std::vector<int> bins0;
  std::vector<int> bins1;

  std::size_t k_star() const noexcept { return selection.k_star; }
};

TrainedModel train_model(const PointMatrix& reference, const PointMatrix& contaminant, const ExperimentPlan& plan,
                         std::size_t n_test, std::uint64_t seed);
TrainedModel train_model(const GaussianMixture& f0, const GaussianMixture& f1, const ExperimentPlan& plan,
                         std::size_t n_train, std::uint64_t seed);

struct PowerRow {
  std::size_t n_train = 0;
  double theta = 0.0;
  TestKind test = TestKind::EDRT;
  std::size_t reps = 0;  // successful replications
  std::size_t rejects = 0;
  std::size_t failures = 0;
  double reject_rate = 0.0;  // NaN when every replication failed
  double mean_sigma2_hat = 0.0;
  double mean_k_star = 0.0;
};

struct PowerCurve {
  ExperimentPlan plan;
  std::vector<PowerRow> rows;  // n_train, then theta, then test order
  std::vector<std::string> failures;

  bool any_failed() const noexcept;
};

PowerCurve run_plan(const ExperimentPlan& plan);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

// Least squares of ln(theta) on ln(1/n_train) over the rows of `test` whose
// reject rate lies in [lo, hi].
SlopeFit detection_slope(const std::vector<PowerRow>& rows, TestKind test, double lo, double hi);

enum class ShiftDirection { TrainShift, TestShift };

const char* to_string(ShiftDirection d) noexcept;
ShiftDirection parse_shift_direction(const std::string& text);

// Two-component reference law pi g_a + (1 - pi) g_b.
GaussianMixture robustness_reference(double pi);
GaussianMixture robustness_contaminant();

struct RobustnessRow {
  ShiftDirection direction = ShiftDirection::TrainShift;
  double pi = 0.5;
  double theta = 0.0;
  TestKind test = TestKind::EDRT;
  std::size_t reps = 0;
  std::size_t rejects = 0;
  std::size_t failures = 0;
  double reject_rate = 0.0;
};

struct RobustnessTable {
  ExperimentPlan plan;
  std::vector<RobustnessRow> rows;
  std::vector<std::string> failures;
};

// Reference weights differ between training and test: with TrainShift the
// training law uses pi = 0.5 and the test law uses `pi`; TestShift swaps the
// roles. Uses the first n_train of `core`.
RobustnessTable robustness_mixture_study(const std::vector<double>& pis, ShiftDirection direction,
                                         const std::vector<double>& thetas, const ExperimentPlan& core);

enum class ReportFormat { Csv, Json };

ReportFormat parse_report_format(const std::string& text);

std::string format_report(const PowerCurve& curve, ReportFormat format);
std::string format_report(const RobustnessTable& table, ReportFormat format);
std::string format_report(const SlopeFit& fit, TestKind test, double lo, double hi, ReportFormat format);

// Rows of a CSV power-curve report.
std::vector<PowerRow> read_power_rows(const std::string& csv_text);

// Writes the text to `path`, or to stdout when path is empty or "-".
void emit_report(const std::string& text, const std::string& path);

}  // namespace drt
