#include "drt/thresholded_histogram.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "drt/error.hpp"
#include "drt/gaussian.hpp"
#include "json.hpp"

namespace drt {

ThresholdContext make_context(double alpha, std::size_t K, std::int64_t n, std::int64_t n0, std::int64_t n1,
                              std::optional<double> u_override, std::optional<double> t_override) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("alpha must lie in (0, 1)");
  if (K < 1 || n < 1 || n0 < 1 || n1 < 1) throw PreconditionError("K, n, n0 and n1 must be at least 1");
  ThresholdContext ctx;
  ctx.alpha = alpha;
  ctx.K = K;
  ctx.n = n;
  ctx.n0 = n0;
  ctx.n1 = n1;
  ctx.u = u_override.value_or(std::log(4.0 * static_cast<double>(K) / alpha));
  ctx.t = t_override.value_or(std::log(2.0 / alpha));
  if (!(ctx.u > 0.0) || !(ctx.t > 0.0)) throw PreconditionError("u and t must be positive");
  ctx.eps0 = std::max(3.0 * ctx.u / static_cast<double>(n0), ctx.t / static_cast<double>(n));
  ctx.eps1 = std::sqrt(3.0 * ctx.u / static_cast<double>(n1));

  std::vector<std::string> broken;
  if (!(3.0 * ctx.eps0 <= ctx.eps1)) broken.emplace_back("3*eps0 <= eps1");
  if (!(ctx.eps1 <= 1.0)) broken.emplace_back("eps1 <= 1");
  if (!(n1 <= n0)) broken.emplace_back("n1 <= n0");
  ctx.valid = broken.empty();
  for (std::size_t i = 0; i < broken.size(); ++i) ctx.violations += (i ? ", " : "") + broken[i];
  return ctx;
}

double sequence_u(double alpha, std::size_t k_max) { return std::log(8.0 * static_cast<double>(k_max) / alpha); }

const char* to_string(Omega w) noexcept {
  switch (w) {
    case Omega::Plain: return "plain";
    case Omega::Omega0: return "omega0";
    case Omega::Omega1: return "omega1";
    case Omega::Omega01: return "omega01";
  }
  return "plain";
}

BinEstimate estimate_bin(const ThresholdContext& ctx, std::int64_t count0, std::int64_t count1) noexcept {
  const double f0 = static_cast<double>(count0) / static_cast<double>(ctx.n0);
  const double f1 = static_cast<double>(count1) / static_cast<double>(ctx.n1);
  BinEstimate e;
  if (f1 > ctx.eps1 && f0 <= ctx.eps0) {
    e.omega = Omega::Omega0;
    e.h0 = 3.0 * ctx.eps0;
    e.h1 = f1;
  } else if (f1 <= ctx.eps1 && f0 <= ctx.eps1) {
    e.omega = Omega::Omega01;
    e.h0 = 3.0 * ctx.eps1;
    e.h1 = 3.0 * ctx.eps1;
  } else if (f1 <= ctx.eps1 && f0 > ctx.eps1) {
    e.omega = Omega::Omega1;
    e.h0 = f0;
    e.h1 = 3.0 * ctx.eps1;
  } else {
    // f1 > eps1 and f0 > eps0: raw frequencies on both sides.
    e.omega = Omega::Plain;
    e.h0 = f0;
    e.h1 = f1;
  }
  assert(e.h0 > 0.0);
  return e;
}

double ThresholdedHistogram::max_abs_r_minus_1() const noexcept {
  double m = 0.0;
  for (double v : r) m = std::max(m, std::abs(v - 1.0));
  return m;
}

double ThresholdedHistogram::sum_h1() const noexcept { return std::accumulate(h1.begin(), h1.end(), 0.0); }

ThresholdedHistogram estimate(const ThresholdContext& ctx, std::span<const std::int64_t> n0,
                              std::span<const std::int64_t> n1) {
  if (n0.size() != ctx.K || n1.size() != ctx.K)
    throw PreconditionError("bin table has " + std::to_string(n0.size()) + " bins but the context expects " +
                            std::to_string(ctx.K));
  if (std::accumulate(n0.begin(), n0.end(), std::int64_t{0}) != ctx.n0 ||
      std::accumulate(n1.begin(), n1.end(), std::int64_t{0}) != ctx.n1)
    throw PreconditionError("bin counts do not sum to the context sample sizes");

  ThresholdedHistogram h;
  h.h0.resize(ctx.K);
  h.h1.resize(ctx.K);
  h.r.resize(ctx.K);
  h.omega.resize(ctx.K);
  for (std::size_t k = 0; k < ctx.K; ++k) {
    if (n0[k] < 0 || n1[k] < 0) throw PreconditionError("bin counts must be non-negative");
    const BinEstimate e = estimate_bin(ctx, n0[k], n1[k]);
    h.h0[k] = e.h0;
    h.h1[k] = e.h1;
    h.omega[k] = e.omega;
    // On Omega01 both heights are the same 3*eps1, so this is exactly 1.
    h.r[k] = e.h1 / e.h0;
    h.sigma2_hat += e.signal();
    if (e.omega == Omega::Omega0) ++h.K0;
    if (e.omega == Omega::Omega1 || e.omega == Omega::Omega01) ++h.K1;
  }
  return h;
}

ThresholdedHistogram estimate(const ThresholdContext& ctx, const BinTable& counts) {
  return estimate(ctx, counts.n0, counts.n1);
}

std::string to_json(const ThresholdedHistogram& hist, const ThresholdContext& ctx) {
  nlohmann::json omega = nlohmann::json::array();
  for (Omega w : hist.omega) omega.push_back(to_string(w));
  nlohmann::json doc{{"h0", hist.h0},
                     {"h1", hist.h1},
                     {"r", hist.r},
                     {"omega", omega},
                     {"sigma2_hat", hist.sigma2_hat},
                     {"K", hist.bins()},
                     {"K0", hist.K0},
                     {"K1", hist.K1},
                     {"eps0", ctx.eps0},
                     {"eps1", ctx.eps1},
                     {"u", ctx.u},
                     {"t", ctx.t}};
  return doc.dump();
}

double discretized_signal(std::span<const double> p0, std::span<const double> p1) {
  if (p0.size() != p1.size()) throw PreconditionError("bin mass vectors differ in length");
  double s = 0.0;
  for (std::size_t k = 0; k < p0.size(); ++k) {
    if (p0[k] > 0.0) {
      const double d = p1[k] - p0[k];
      s += d * d / p0[k];
    } else if (p1[k] > 0.0) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return s;
}

double population_signal(const DensityFn& f0, const DensityFn& f1, std::size_t dim, const PartitionTree* tree,
                         std::size_t resolution) {
  if (resolution == 0) throw PreconditionError("quadrature resolution must be positive");
  if (tree && tree->dim() != dim) throw PreconditionError("tree dimension mismatch");
  const double h = 1.0 / static_cast<double>(resolution);
  const double cell = std::pow(h, static_cast<double>(dim));
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> x(dim);
  const std::size_t bins = tree ? tree->bin_count() : 0;
  std::vector<double> p0(bins, 0.0), p1(bins, 0.0);
  double integral = 0.0;
  while (true) {
    for (std::size_t j = 0; j < dim; ++j) x[j] = (static_cast<double>(idx[j]) + 0.5) * h;
    const double a = f0(x);
    const double b = f1(x);
    if (tree) {
      const auto k = static_cast<std::size_t>(tree->locate(x));
      p0[k] += a * cell;
      p1[k] += b * cell;
    } else {
      if (!(a > 0.0)) throw Error("f0 vanishes inside the unit cube; sigma^2 is undefined");
      const double d = b / a - 1.0;
      integral += d * d * a * cell;
    }
    std::size_t j = 0;
    while (j < dim && ++idx[j] == resolution) idx[j++] = 0;
    if (j == dim) break;
  }
  const double out = tree ? discretized_signal(p0, p1) : integral;
  if (!std::isfinite(out)) throw Error("population signal quadrature is not finite");
  return out;
}

namespace {

bool single_equal_variance(const GaussianMixture& f0, const GaussianMixture& f1) {
  return f0.components().size() == 1 && f1.components().size() == 1 &&
         f0.components()[0].variance() == f1.components()[0].variance();
}

}  // namespace

double population_signal(const GaussianMixture& f0, const GaussianMixture& f1, const PartitionTree* tree,
                         std::size_t resolution) {
  if (f0.dim() != f1.dim()) throw PreconditionError("f0 and f1 differ in dimension");
  if (tree) {
    if (tree->dim() != f0.dim()) throw PreconditionError("tree dimension mismatch");
    std::vector<double> p0(tree->bin_count()), p1(tree->bin_count());
    for (std::size_t k = 0; k < tree->bin_count(); ++k) {
      const Box box = tree->bin_box(static_cast<int>(k));
      p0[k] = f0.probability(box);
      p1[k] = f1.probability(box);
    }
    const double s = discretized_signal(p0, p1);
    if (!std::isfinite(s)) throw Error("population signal is not finite");
    return s;
  }
  if (!single_equal_variance(f0, f1)) {
    return population_signal([&](std::span<const double> x) { return f0.density(x); },
                             [&](std::span<const double> x) { return f1.density(x); }, f0.dim(), nullptr,
                             resolution);
  }
  // ∫ f1^2/f0 factorises over axes; per axis, with c = 2 m1 - m0 and
  // d = m1 - m0, phi1^2/phi0 is a Gaussian centred at c scaled by exp(d^2/s^2).
  const auto& g0 = f0.components()[0];
  const auto& g1 = f1.components()[0];
  double log_prod = 0.0;
  for (std::size_t j = 0; j < f0.dim(); ++j) {
    const double s = std::sqrt(g0.variance()[j]);
    const double m0 = g0.mean()[j];
    const double m1 = g1.mean()[j];
    const double c = 2.0 * m1 - m0;
    const double d = m1 - m0;
    const double z0 = g0.axis_mass(j);
    const double z1 = g1.axis_mass(j);
    // c may sit far outside [0,1].
    const double mass_c = normal_interval(-c / s, (1.0 - c) / s);
    log_prod += d * d / (s * s) + std::log(mass_c) + std::log(z0) - 2.0 * std::log(z1);
  }
  const double out = std::exp(log_prod) - 1.0;
  if (!std::isfinite(out)) throw Error("population signal is not finite");
  return std::max(out, 0.0);
}

}  // namespace drt
