#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drt/box.hpp"
#include "drt/dataset.hpp"
#include "drt/random.hpp"

namespace drt {

double normal_cdf(double z) noexcept;
double normal_pdf(double z) noexcept;
// Phi(b) - Phi(a) for a <= b, evaluated in whichever tail avoids cancellation.
double normal_interval(double a, double b) noexcept;

// Gaussian with diagonal covariance conditioned on [0,1]^d. The truncation
// region is a box, so the truncated law factorises across axes.
class TruncatedGaussian {
 public:
  TruncatedGaussian(std::vector<double> mean, std::vector<double> variance);

  std::size_t dim() const noexcept { return mean_.size(); }
  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& variance() const noexcept { return var_; }

  // Untruncated Gaussian mass of [0,1]^d, i.e. the rejection acceptance rate.
  double acceptance() const noexcept;
  double axis_mass(std::size_t axis) const noexcept { return axis_mass_[axis]; }

  double density(std::span<const double> x) const;
  // Truncated CDF of a single axis at v.
  double axis_cdf(std::size_t axis, double v) const;
  double axis_density(std::size_t axis, double v) const;
  // Probability of box ∩ [0,1]^d under the truncated law.
  double probability(const Box& box) const;

  void sample_into(Rng& rng, std::span<double> out) const;

 private:
  std::vector<double> mean_;
  std::vector<double> var_;
  std::vector<double> sd_;
  std::vector<double> axis_mass_;  // Phi((1-m)/s) - Phi(-m/s) per axis
};

// Finite mixture of truncated Gaussians.
class GaussianMixture {
 public:
  explicit GaussianMixture(TruncatedGaussian single);
  GaussianMixture(std::vector<double> weights, std::vector<TruncatedGaussian> components);

  std::size_t dim() const noexcept { return components_.front().dim(); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<TruncatedGaussian>& components() const noexcept { return components_; }

  double density(std::span<const double> x) const;
  double probability(const Box& box) const;
  void sample_into(Rng& rng, std::span<double> out) const;
  PointMatrix sample(std::size_t count, Rng& rng) const;

 private:
  std::vector<double> weights_;
  std::vector<TruncatedGaussian> components_;
};

enum class SettingLabel { A, B, C, Null, Custom };

// Pair of truncated Gaussians f0 (reference) and f1 (contaminant) sharing a
// diagonal covariance.
struct GaussianSetting {
  SettingLabel label = SettingLabel::Custom;
  std::vector<double> mean0;
  std::vector<double> mean1;
  std::vector<double> cov_diag;

  // A: (0.3,0.3) vs (0.7,0.7); B: (0.4,0.4) vs (0.6,0.6);
  // C: (0.4,0.4) vs (0.5,0.5); Null: both (0.5,0.5). Variance 1/100 per axis.
  static GaussianSetting named(SettingLabel label);
  static GaussianSetting parse(const std::string& name);

  void validate() const;
  GaussianMixture f0() const;
  GaussianMixture f1() const;
};

std::string to_string(SettingLabel label);

// i.i.d. draws from f0 (which = 0) or f1 (which = 1).
PointMatrix sample_truncated_gaussian(const GaussianSetting& setting, int which, std::size_t count,
                                      std::uint64_t seed);

struct MixtureSample {
  PointMatrix points;
  std::vector<std::uint8_t> from_contaminant;
};

// Each point comes from f1 with probability theta, else from f0.
MixtureSample sample_mixture(const GaussianMixture& f0, const GaussianMixture& f1, double theta, std::size_t n,
                             Rng& rng);
MixtureSample sample_mixture(const GaussianSetting& setting, double theta, std::size_t n, std::uint64_t seed);

}  // namespace drt
