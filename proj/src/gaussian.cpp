#include "drt/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "drt/error.hpp"

namespace drt {

namespace {

constexpr double kMinAcceptance = 1e-6;

}  // namespace

double normal_interval(double a, double b) noexcept {
  if (a >= 0.0) return 0.5 * (std::erfc(a / std::numbers::sqrt2) - std::erfc(b / std::numbers::sqrt2));
  if (b <= 0.0) return 0.5 * (std::erfc(-b / std::numbers::sqrt2) - std::erfc(-a / std::numbers::sqrt2));
  return 1.0 - 0.5 * std::erfc(-a / std::numbers::sqrt2) - 0.5 * std::erfc(b / std::numbers::sqrt2);
}

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) noexcept { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

TruncatedGaussian::TruncatedGaussian(std::vector<double> mean, std::vector<double> variance)
    : mean_(std::move(mean)), var_(std::move(variance)) {
  if (mean_.empty() || mean_.size() != var_.size()) throw PreconditionError("mean and variance must have equal, positive length");
  sd_.resize(var_.size());
  axis_mass_.resize(var_.size());
  for (std::size_t j = 0; j < var_.size(); ++j) {
    if (!(var_[j] > 0.0) || !std::isfinite(var_[j])) throw PreconditionError("variances must be positive");
    if (!std::isfinite(mean_[j])) throw PreconditionError("means must be finite");
    sd_[j] = std::sqrt(var_[j]);
    axis_mass_[j] = normal_interval(-mean_[j] / sd_[j], (1.0 - mean_[j]) / sd_[j]);
  }
  if (acceptance() < kMinAcceptance)
    throw PathologicalSettingError("truncation to [0,1]^d keeps less than 1e-6 of the Gaussian mass");
}

double TruncatedGaussian::acceptance() const noexcept {
  return std::accumulate(axis_mass_.begin(), axis_mass_.end(), 1.0, std::multiplies<>());
}

double TruncatedGaussian::axis_density(std::size_t axis, double v) const {
  if (v < 0.0 || v > 1.0) return 0.0;
  return normal_pdf((v - mean_[axis]) / sd_[axis]) / (sd_[axis] * axis_mass_[axis]);
}

double TruncatedGaussian::density(std::span<const double> x) const {
  if (x.size() != dim()) throw PreconditionError("point dimension mismatch");
  double p = 1.0;
  for (std::size_t j = 0; j < dim(); ++j) p *= axis_density(j, x[j]);
  return p;
}

double TruncatedGaussian::axis_cdf(std::size_t axis, double v) const {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  const double s = sd_[axis];
  return normal_interval(-mean_[axis] / s, (v - mean_[axis]) / s) / axis_mass_[axis];
}

double TruncatedGaussian::probability(const Box& box) const {
  if (box.dim() != dim()) throw PreconditionError("box dimension mismatch");
  double p = 1.0;
  for (std::size_t j = 0; j < dim(); ++j) {
    const double lo = std::max(box.lo[j], 0.0);
    const double hi = std::min(box.hi[j], 1.0);
    if (!(hi > lo)) return 0.0;
    p *= normal_interval((lo - mean_[j]) / sd_[j], (hi - mean_[j]) / sd_[j]) / axis_mass_[j];
  }
  return p;
}

void TruncatedGaussian::sample_into(Rng& rng, std::span<double> out) const {
  // Axes are independent and the acceptance region is a box, so rejecting
  // per axis draws from the same law as rejecting whole points.
  for (std::size_t j = 0; j < dim(); ++j) {
    double v;
    do {
      v = mean_[j] + sd_[j] * standard_normal(rng);
    } while (v < 0.0 || v > 1.0);
    out[j] = v;
  }
}

GaussianMixture::GaussianMixture(TruncatedGaussian single) : weights_{1.0}, components_{std::move(single)} {}

GaussianMixture::GaussianMixture(std::vector<double> weights, std::vector<TruncatedGaussian> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  if (components_.empty() || weights_.size() != components_.size())
    throw PreconditionError("mixture needs one weight per component");
  double total = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0)) throw PreconditionError("mixture weights must be non-negative");
    if (components_[i].dim() != components_.front().dim()) throw PreconditionError("mixture components differ in dimension");
    total += weights_[i];
  }
  if (!(total > 0.0)) throw PreconditionError("mixture weights sum to zero");
  for (double& w : weights_) w /= total;
}

double GaussianMixture::density(std::span<const double> x) const {
  double p = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i)
    if (weights_[i] > 0.0) p += weights_[i] * components_[i].density(x);
  return p;
}

double GaussianMixture::probability(const Box& box) const {
  double p = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i)
    if (weights_[i] > 0.0) p += weights_[i] * components_[i].probability(box);
  return p;
}

void GaussianMixture::sample_into(Rng& rng, std::span<double> out) const {
  std::size_t pick = 0;
  if (components_.size() > 1) {
    double u = uniform01(rng);
    pick = components_.size() - 1;
    for (std::size_t i = 0; i + 1 < weights_.size(); ++i) {
      if (u < weights_[i]) {
        pick = i;
        break;
      }
      u -= weights_[i];
    }
  }
  components_[pick].sample_into(rng, out);
}

PointMatrix GaussianMixture::sample(std::size_t count, Rng& rng) const {
  std::vector<double> values(count * dim());
  for (std::size_t i = 0; i < count; ++i) sample_into(rng, std::span<double>(values.data() + i * dim(), dim()));
  return PointMatrix(dim(), std::move(values));
}

GaussianSetting GaussianSetting::named(SettingLabel label) {
  const std::vector<double> cov{0.01, 0.01};
  switch (label) {
    case SettingLabel::A: return {label, {0.3, 0.3}, {0.7, 0.7}, cov};
    case SettingLabel::B: return {label, {0.4, 0.4}, {0.6, 0.6}, cov};
    case SettingLabel::C: return {label, {0.4, 0.4}, {0.5, 0.5}, cov};
    case SettingLabel::Null: return {label, {0.5, 0.5}, {0.5, 0.5}, cov};
    case SettingLabel::Custom: break;
  }
  throw PreconditionError("custom settings have no predefined parameters");
}

GaussianSetting GaussianSetting::parse(const std::string& name) {
  if (name == "A" || name == "a") return named(SettingLabel::A);
  if (name == "B" || name == "b") return named(SettingLabel::B);
  if (name == "C" || name == "c") return named(SettingLabel::C);
  if (name == "null") return named(SettingLabel::Null);
  throw PreconditionError("unknown setting '" + name + "' (expected A, B, C or null)");
}

std::string to_string(SettingLabel label) {
  switch (label) {
    case SettingLabel::A: return "A";
    case SettingLabel::B: return "B";
    case SettingLabel::C: return "C";
    case SettingLabel::Null: return "null";
    case SettingLabel::Custom: return "custom";
  }
  return "custom";
}

void GaussianSetting::validate() const {
  if (mean0.empty() || mean0.size() != mean1.size() || mean0.size() != cov_diag.size())
    throw PreconditionError("setting vectors must share one positive dimension");
  for (std::size_t j = 0; j < mean0.size(); ++j) {
    if (!(mean0[j] > 0.0 && mean0[j] < 1.0 && mean1[j] > 0.0 && mean1[j] < 1.0))
      throw PreconditionError("setting means must lie strictly inside the unit cube");
    if (!(cov_diag[j] > 0.0)) throw PreconditionError("setting variances must be positive");
  }
}

GaussianMixture GaussianSetting::f0() const {
  validate();
  return GaussianMixture(TruncatedGaussian(mean0, cov_diag));
}

GaussianMixture GaussianSetting::f1() const {
  validate();
  return GaussianMixture(TruncatedGaussian(mean1, cov_diag));
}

PointMatrix sample_truncated_gaussian(const GaussianSetting& setting, int which, std::size_t count,
                                      std::uint64_t seed) {
  if (which != 0 && which != 1) throw PreconditionError("which must be 0 or 1");
  Rng rng = make_rng(seed);
  return (which == 0 ? setting.f0() : setting.f1()).sample(count, rng);
}

MixtureSample sample_mixture(const GaussianMixture& f0, const GaussianMixture& f1, double theta, std::size_t n,
                             Rng& rng) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw PreconditionError("theta must lie in [0, 1]");
  if (f0.dim() != f1.dim()) throw PreconditionError("f0 and f1 differ in dimension");
  MixtureSample out{PointMatrix(f0.dim(), std::vector<double>(n * f0.dim())), std::vector<std::uint8_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const bool contaminated = uniform01(rng) < theta;
    out.from_contaminant[i] = contaminated ? 1 : 0;
    (contaminated ? f1 : f0).sample_into(rng, out.points.row(i));
  }
  return out;
}

MixtureSample sample_mixture(const GaussianSetting& setting, double theta, std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return sample_mixture(setting.f0(), setting.f1(), theta, n, rng);
}

}  // namespace drt
