#include "drt/mmd.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "drt/bootstrap.hpp"
#include "drt/error.hpp"
#include "drt/random.hpp"

namespace drt {

KernelSpec KernelSpec::parse(const std::string& text) {
  KernelSpec k;
  if (text == "median") return k;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(v > 0.0) || !std::isfinite(v))
    throw PreconditionError("kernel bandwidth must be a positive number or 'median', got '" + text + "'");
  k.bandwidth = v;
  return k;
}

double rbf_kernel(std::span<const double> x, std::span<const double> y, double bandwidth) noexcept {
  double d2 = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - y[j];
    d2 += d * d;
  }
  return std::exp(-d2 / (2.0 * bandwidth * bandwidth));
}

namespace {

// Pairs are read through index maps so permutations need no copies.
template <class MapX, class MapY>
double linear_statistic(const PointMatrix& Z, std::size_t m, MapX ix, MapY iy, double bw) {
  const std::size_t pairs = m / 2;
  double s = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto x1 = Z.row(ix(2 * i)), x2 = Z.row(ix(2 * i + 1));
    const auto y1 = Z.row(iy(2 * i)), y2 = Z.row(iy(2 * i + 1));
    s += rbf_kernel(x1, x2, bw) + rbf_kernel(y1, y2, bw) - rbf_kernel(x1, y2, bw) - rbf_kernel(x2, y1, bw);
  }
  return s / static_cast<double>(pairs);
}

}  // namespace

double mmd_linear(const PointMatrix& X, const PointMatrix& Y, double bandwidth) {
  const std::size_t m = std::min(X.rows(), Y.rows());
  if (m < 2) throw PreconditionError("linear MMD needs at least two points per sample");
  if (X.dim() != Y.dim()) throw PreconditionError("samples differ in dimension");
  if (!(bandwidth > 0.0)) throw PreconditionError("kernel bandwidth must be positive");
  PointMatrix Z(X.dim());
  Z.reserve(2 * m);
  for (std::size_t i = 0; i < m; ++i) Z.push_back(X.row(i));
  for (std::size_t i = 0; i < m; ++i) Z.push_back(Y.row(i));
  return linear_statistic(Z, m, [](std::size_t i) { return i; }, [m](std::size_t i) { return m + i; }, bandwidth);
}

double median_heuristic(const PointMatrix& Z, std::size_t cap, std::uint64_t seed) {
  const std::size_t n = Z.rows();
  if (n < 2) throw PreconditionError("median heuristic needs at least two points");
  const std::size_t m = std::min(n, std::max<std::size_t>(cap, 2));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (m < n) {
    Rng rng = make_rng(seed, {0x6d6d64});
    for (std::size_t i = 0; i < m; ++i) std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
  }
  std::vector<double> dist;
  dist.reserve(m * (m - 1) / 2);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) {
      const auto x = Z.row(idx[a]), y = Z.row(idx[b]);
      double d2 = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) d2 += (x[j] - y[j]) * (x[j] - y[j]);
      dist.push_back(std::sqrt(d2));
    }
  auto median = [](std::vector<double>& v) {
    const std::size_t h = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
    const double hi = v[h];
    if (v.size() % 2 == 1) return hi;
    return 0.5 * (*std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h)) + hi);
  };
  double med = median(dist);
  if (med == 0.0) {
    // Heavy ties: fall back to the median of the non-zero distances.
    std::erase(dist, 0.0);
    if (dist.empty()) throw PreconditionError("median heuristic undefined: all points identical");
    med = median(dist);
  }
  return med;
}

TestReport mmd_test(const PointMatrix& reference, const PointMatrix& test, const MmdConfig& cfg) {
  if (reference.rows() < 2 || test.rows() < 2) throw PreconditionError("MMD test needs at least two points per sample");
  if (cfg.replicates < 1) throw PreconditionError("MMD test needs at least one replicate");
  PointMatrix Z(reference.dim());
  Z.reserve(reference.rows() + test.rows());
  Z.append(reference);
  Z.append(test);
  const std::size_t nr = reference.rows(), nt = test.rows(), N = Z.rows();
  const std::size_t m = std::min(nr, nt);
  const double bw = cfg.kernel.bandwidth ? *cfg.kernel.bandwidth : median_heuristic(Z, cfg.kernel.median_cap, cfg.seed);

  TestReport rep;
  rep.method = "mmd";
  rep.statistic = linear_statistic(Z, m, [](std::size_t i) { return i; }, [nr](std::size_t i) { return nr + i; }, bw);
  rep.null_statistics.resize(cfg.replicates);
  std::vector<std::size_t> perm(N);
  for (std::size_t b = 0; b < cfg.replicates; ++b) {
    Rng rng = make_rng(cfg.seed, {b});
    std::iota(perm.begin(), perm.end(), 0);
    // Only the slots read by the statistic need to be drawn.
    const std::size_t need = std::min(N, nr + m);
    for (std::size_t i = 0; i < need; ++i) std::swap(perm[i], perm[i + uniform_index(rng, N - i)]);
    rep.null_statistics[b] = linear_statistic(
        Z, m, [&perm](std::size_t i) { return perm[i]; }, [&perm, nr](std::size_t i) { return perm[nr + i]; }, bw);
  }
  rep.threshold = empirical_quantile(rep.null_statistics, 1.0 - cfg.alpha);
  rep.reject = rep.statistic > rep.threshold;
  rep.ctx.alpha = cfg.alpha;
  rep.ctx.n = static_cast<std::int64_t>(nt);
  rep.kernel_bandwidth = bw;
  return rep;
}

}  // namespace drt
