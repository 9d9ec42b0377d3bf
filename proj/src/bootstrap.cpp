#include "drt/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "drt/error.hpp"
#include "drt/parallel.hpp"
#include "drt/random.hpp"

namespace drt {

void BootstrapConfig::validate() const {
  if (replicates < 1) throw PreconditionError("bootstrap needs at least one replicate");
  if (!(quantile_level > 0.0 && quantile_level < 1.0)) throw PreconditionError("quantile level must lie in (0,1)");
}

double empirical_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw PreconditionError("quantile of an empty sample");
  if (!(level > 0.0 && level <= 1.0)) throw PreconditionError("quantile level must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = std::ceil(level * static_cast<double>(values.size()) - 1e-9);
  const auto idx = static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(values.size())));
  return values[idx - 1];
}

BootstrapResult bootstrap_threshold(std::span<const int> bins0, std::span<const int> bins1,
                                    const ThresholdContext& ctx, const BootstrapConfig& cfg) {
  cfg.validate();
  const std::size_t n0 = bins0.size();
  const std::size_t n1 = bins1.size();
  const auto n = static_cast<std::size_t>(ctx.n);
  if (n1 == 0) throw PreconditionError("bootstrap needs contaminant estimation points");
  if (n0 <= n)
    throw PreconditionError("bootstrap needs more reference estimation points (" + std::to_string(n0) +
                            ") than test points (" + std::to_string(n) + ")");
  if (static_cast<std::int64_t>(n0) != ctx.n0 || static_cast<std::int64_t>(n1) != ctx.n1)
    throw PreconditionError("context sample sizes do not match the estimation points");
  const std::size_t K = ctx.K;

  BootstrapResult out;
  out.statistics.assign(cfg.replicates, 0.0);
  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t b) {
    Rng rng = make_rng(cfg.seed, {b});
    std::vector<std::uint32_t> order(n0);
    for (std::size_t i = 0; i < n0; ++i) order[i] = static_cast<std::uint32_t>(i);
    // The first n slots become the held-out sample, the rest the pool.
    for (std::size_t i = 0; i < n; ++i) std::swap(order[i], order[i + uniform_index(rng, n0 - i)]);

    std::vector<std::int64_t> test(K, 0), c0(K, 0), c1(K, 0);
    for (std::size_t i = 0; i < n; ++i) ++test[static_cast<std::size_t>(bins0[order[i]])];
    const std::size_t pool = n0 - n;
    for (std::size_t i = 0; i < n0; ++i) ++c0[static_cast<std::size_t>(bins0[order[n + uniform_index(rng, pool)]])];
    for (std::size_t i = 0; i < n1; ++i) ++c1[static_cast<std::size_t>(bins1[uniform_index(rng, n1)])];
    out.statistics[b] = statistic(estimate(ctx, c0, c1), test);
  });
  out.tau = empirical_quantile(out.statistics, cfg.quantile_level);
  return out;
}

BootstrapResult bootstrap_threshold(const PartitionTree& tree, const PointMatrix& est0, const PointMatrix& est1,
                                    const ThresholdContext& ctx, const BootstrapConfig& cfg) {
  return bootstrap_threshold(locate_all(tree, est0), locate_all(tree, est1), ctx, cfg);
}

TestReport bedrt_decision(const ThresholdedHistogram& hist, const ThresholdContext& ctx,
                          std::span<const std::int64_t> test_counts, const BootstrapResult& boot) {
  TestReport rep;
  rep.method = "bedrt";
  rep.ctx = ctx;
  rep.statistic = statistic(hist, test_counts);
  rep.threshold = boot.tau;
  rep.reject = rep.statistic > boot.tau;
  rep.sigma2_hat = hist.sigma2_hat;
  rep.K = hist.bins();
  rep.K0 = hist.K0;
  rep.K1 = hist.K1;
  rep.max_abs_r_minus_1 = hist.max_abs_r_minus_1();
  const auto d = theta_detectable(hist, ctx);
  rep.theta_terms = d.terms;
  rep.theta_detectable = d.total;
  rep.theta_infinite = d.infinite;
  rep.theta_undetectable = d.undetectable;
  rep.null_statistics = boot.statistics;
  return rep;
}

TestReport run_bedrt(const PartitionTree& tree, const PointMatrix& est0, const PointMatrix& est1,
                     const PointMatrix& test, const ThresholdContext& ctx, const BootstrapConfig& cfg,
                     BootstrapResult* boot_out) {
  const auto bins0 = locate_all(tree, est0);
  const auto bins1 = locate_all(tree, est1);
  auto boot = bootstrap_threshold(bins0, bins1, ctx, cfg);
  const auto hist = estimate(ctx, histogram_of(bins0, tree.bin_count()), histogram_of(bins1, tree.bin_count()));
  auto rep = bedrt_decision(hist, ctx, count_bins(tree, test), boot);
  if (boot_out) *boot_out = std::move(boot);
  return rep;
}

}  // namespace drt
