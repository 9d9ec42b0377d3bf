#include "drt/edrt.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "drt/error.hpp"
#include "json.hpp"

namespace drt {

double statistic(const ThresholdedHistogram& hist, std::span<const std::int64_t> test_counts) {
  if (test_counts.size() != hist.bins())
    throw PreconditionError("test counts have " + std::to_string(test_counts.size()) + " bins, histogram has " +
                            std::to_string(hist.bins()));
  std::int64_t n = 0;
  double s = 0.0;
  for (std::size_t k = 0; k < test_counts.size(); ++k) {
    n += test_counts[k];
    s += (hist.r[k] - 1.0) * static_cast<double>(test_counts[k]);
  }
  if (n == 0) throw PreconditionError("empty test sample");
  return s / static_cast<double>(n);
}

double pointwise_statistic(const ThresholdedHistogram& hist, const PartitionTree& tree, const PointMatrix& test) {
  if (test.rows() == 0) throw PreconditionError("empty test sample");
  double s = 0.0;
  for (std::size_t i = 0; i < test.rows(); ++i) {
    const auto k = static_cast<std::size_t>(tree.locate(test.row(i)));
    s += hist.h1[k] / hist.h0[k] - 1.0;
  }
  return s / static_cast<double>(test.rows());
}

std::array<double, 4> threshold_terms(const ThresholdedHistogram& hist, const ThresholdContext& ctx) {
  if (!ctx.valid) throw InvalidHypothesisError("threshold undefined: " + ctx.violations);
  const double sd = std::sqrt(hist.sigma2_hat);
  const double K = static_cast<double>(hist.bins());
  const double n = static_cast<double>(ctx.n);
  return {sd * std::sqrt(10.0 * ctx.u * K / static_cast<double>(ctx.n0)), sd * std::sqrt(6.0 * ctx.t / n),
          ctx.t / (3.0 * n) * hist.max_abs_r_minus_1(), 3.0 * ctx.eps1 * static_cast<double>(hist.K1)};
}

double threshold(const ThresholdedHistogram& hist, const ThresholdContext& ctx) {
  const auto a = threshold_terms(hist, ctx);
  return a[0] + a[1] + a[2] + a[3];
}

DetectableTheta theta_detectable(const ThresholdedHistogram& hist, const ThresholdContext& ctx) {
  DetectableTheta d;
  const double s2 = hist.sigma2_hat;
  if (!(s2 > 0.0)) {
    d.infinite = d.undetectable = true;
    d.terms.fill(std::numeric_limits<double>::infinity());
    d.total = std::numeric_limits<double>::infinity();
    return d;
  }
  const double n = static_cast<double>(ctx.n);
  const double n0 = static_cast<double>(ctx.n0);
  const double n1 = static_cast<double>(ctx.n1);
  const double K = static_cast<double>(hist.bins());
  d.terms = {353.0 * std::sqrt(ctx.t / (n * s2)),
             400.0 * std::sqrt(ctx.u) * static_cast<double>(hist.K1) / (s2 * std::sqrt(n1)),
             30.0 * ctx.eps0 * static_cast<double>(hist.K0) / s2, 64.0 * std::sqrt(ctx.u * K / (n0 * s2))};
  d.total = d.terms[0] + d.terms[1] + d.terms[2] + d.terms[3];
  d.undetectable = d.total > 1.0;
  return d;
}

TestReport run_test(const ThresholdedHistogram& hist, const ThresholdContext& ctx,
                    std::span<const std::int64_t> test_counts) {
  TestReport rep;
  rep.ctx = ctx;
  rep.statistic = statistic(hist, test_counts);
  rep.threshold_terms = threshold_terms(hist, ctx);
  rep.threshold = rep.threshold_terms[0] + rep.threshold_terms[1] + rep.threshold_terms[2] + rep.threshold_terms[3];
  rep.sigma2_hat = hist.sigma2_hat;
  rep.reject = hist.sigma2_hat > 0.0 ? rep.statistic >= rep.threshold : rep.statistic > rep.threshold;
  rep.K = hist.bins();
  rep.K0 = hist.K0;
  rep.K1 = hist.K1;
  rep.max_abs_r_minus_1 = hist.max_abs_r_minus_1();
  const auto d = theta_detectable(hist, ctx);
  rep.theta_terms = d.terms;
  rep.theta_detectable = d.total;
  rep.theta_infinite = d.infinite;
  rep.theta_undetectable = d.undetectable;
  return rep;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw PreconditionError("normal quantile needs p in (0,1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

TestReport oracle_lr_test(const DensityFn& f0, const DensityFn& f1, double sigma2, const PointMatrix& test,
                          double alpha) {
  if (test.rows() == 0) throw PreconditionError("empty test sample");
  TestReport rep;
  rep.method = "oracle_lr";
  double s = 0.0;
  for (std::size_t i = 0; i < test.rows(); ++i) {
    const auto x = test.row(i);
    const double p0 = f0(x);
    if (!(p0 > 0.0)) throw PreconditionError("reference density vanishes at test point " + std::to_string(i));
    s += f1(x) / p0 - 1.0;
  }
  const double n = static_cast<double>(test.rows());
  rep.statistic = s / n;
  rep.threshold = std::sqrt(sigma2) * normal_quantile(1.0 - alpha) / std::sqrt(n);
  rep.sigma2_hat = sigma2;
  rep.reject = sigma2 > 0.0 ? rep.statistic >= rep.threshold : rep.statistic > rep.threshold;
  rep.ctx.alpha = alpha;
  rep.ctx.n = static_cast<std::int64_t>(test.rows());
  return rep;
}

bool oracle_region_test(const Box& region, const PointMatrix& test) {
  for (std::size_t i = 0; i < test.rows(); ++i)
    if (region.contains(test.row(i))) return true;
  return false;
}

std::string TestReport::to_json(bool with_null) const {
  nlohmann::json j{{"method", method},
                   {"statistic", statistic},
                   {"threshold", threshold},
                   {"reject", reject},
                   {"sigma2_hat", sigma2_hat},
                   {"K", K},
                   {"K0", K0},
                   {"K1", K1},
                   {"max_abs_r_minus_1", max_abs_r_minus_1}};
  j["threshold_terms"] = {{"signal_ref", threshold_terms[0]},
                          {"signal_test", threshold_terms[1]},
                          {"ratio_range", threshold_terms[2]},
                          {"contaminant_floor", threshold_terms[3]}};
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  j["theta_detectable"] = {{"terms", {num(theta_terms[0]), num(theta_terms[1]), num(theta_terms[2]), num(theta_terms[3])}},
                           {"total", num(theta_detectable)},
                           {"infinite", theta_infinite},
                           {"undetectable", theta_undetectable}};
  j["context"] = {{"alpha", ctx.alpha}, {"u", ctx.u},       {"t", ctx.t},       {"n", ctx.n},
                  {"n0", ctx.n0},       {"n1", ctx.n1},     {"eps0", ctx.eps0}, {"eps1", ctx.eps1},
                  {"valid", ctx.valid}, {"violations", ctx.violations}};
  if (method == "mmd") j["kernel_bandwidth"] = kernel_bandwidth;
  if (with_null) j["null_statistics"] = null_statistics;
  return j.dump(2);
}

}  // namespace drt
