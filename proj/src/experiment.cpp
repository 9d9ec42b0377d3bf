#include "drt/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drt/error.hpp"
#include "drt/parallel.hpp"

namespace drt {

const char* to_string(TestKind k) noexcept {
  switch (k) {
    case TestKind::EDRT: return "edrt";
    case TestKind::BEDRT: return "bedrt";
    case TestKind::MMD: return "mmd";
    case TestKind::OracleLR: return "oracle_lr";
  }
  return "?";
}

TestKind parse_test_kind(const std::string& text) {
  std::string s = text;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "edrt") return TestKind::EDRT;
  if (s == "bedrt") return TestKind::BEDRT;
  if (s == "mmd") return TestKind::MMD;
  if (s == "oracle_lr" || s == "oraclelr" || s == "oracle") return TestKind::OracleLR;
  throw PreconditionError("unknown test '" + text + "' (expected edrt, bedrt, mmd or oracle_lr)");
}

std::vector<double> ExperimentPlan::default_theta_grid() {
  std::vector<double> g(12);
  const double lo = std::log(3e-3), hi = std::log(0.3);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / 11.0);
  g.back() = 0.3;
  g.front() = 3e-3;
  return g;
}

void ExperimentPlan::validate() const {
  setting.validate();
  if (n_train.empty() || theta.empty()) throw PreconditionError("plan grids must be non-empty");
  if (reps < 1) throw PreconditionError("plan needs at least one replication");
  if (tests.empty()) throw PreconditionError("plan needs at least one test");
  for (double t : theta)
    if (!(t >= 0.0 && t <= 1.0)) throw PreconditionError("theta values must lie in [0,1]");
  if (!(frac_n0 > 0.0 && frac_n0 < 1.0)) throw PreconditionError("frac_n0 must lie in (0,1)");
  if (!(frac_test > 0.0)) throw PreconditionError("frac_test must be positive");
  if (!(frac_part > 0.0 && frac_part < 1.0)) throw PreconditionError("frac_part must lie in (0,1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("alpha must lie in (0,1)");
  if (k_max < 1) throw PreconditionError("k_max must be at least 1");
}

SampleSizes sample_sizes(const ExperimentPlan& plan, std::size_t n_train) {
  SampleSizes s;
  s.n0 = static_cast<std::size_t>(std::llround(plan.frac_n0 * static_cast<double>(n_train)));
  s.n1 = n_train - s.n0;
  s.n = static_cast<std::size_t>(std::llround(plan.frac_test * static_cast<double>(n_train)));
  if (s.n0 < 2 || s.n1 < 2 || s.n < 1) throw PreconditionError("n_train " + std::to_string(n_train) + " is too small");
  return s;
}

TrainedModel train_model(const PointMatrix& reference, const PointMatrix& contaminant, const ExperimentPlan& plan,
                         std::size_t n_test, std::uint64_t seed) {
  LabeledDataset ds(reference.dim());
  ds.append(reference, Source::Reference);
  ds.append(contaminant, Source::Contaminant);
  const auto split = split_training(ds, plan.frac_part, derive_seed(seed, {1}));

  TrainedModel m;
  const auto part = PartSample::from(ds, split.part_reference, split.part_contaminant);
  const auto n = static_cast<std::int64_t>(n_test);
  m.seq = grow_sequence(part, {plan.alpha, plan.k_max, n, plan.criterion});
  m.est0 = ds.select(split.est_reference.indices);
  m.est1 = ds.select(split.est_contaminant.indices);
  m.est = estimate_sequence(m.seq, m.est0, m.est1, plan.alpha, n);
  m.selection = select_size(m.est.hist, m.est.ctx, plan.size_mode, plan.min_k);
  m.tree = m.seq.partition(m.selection.k_star);
  m.ctx = m.est.ctx[m.selection.k_star - 1];
  m.hist = m.est.hist[m.selection.k_star - 1];
  m.bins0 = locate_all(m.tree, m.est0);
  m.bins1 = locate_all(m.tree, m.est1);
  m.reference = reference;
  return m;
}

TrainedModel train_model(const GaussianMixture& f0, const GaussianMixture& f1, const ExperimentPlan& plan,
                         std::size_t n_train, std::uint64_t seed) {
  const auto sz = sample_sizes(plan, n_train);
  Rng rng = make_rng(seed, {0});
  const auto x0 = f0.sample(sz.n0, rng);
  const auto x1 = f1.sample(sz.n1, rng);
  return train_model(x0, x1, plan, sz.n, seed);
}

bool PowerCurve::any_failed() const noexcept {
  return std::any_of(rows.begin(), rows.end(), [](const PowerRow& r) { return r.failures > 0; });
}

namespace {

constexpr std::int8_t kFailed = -1;

struct RepOutcome {
  bool trained = false;
  double sigma2 = 0.0;
  double k_star = 0.0;
  std::vector<std::int8_t> decision;  // [theta][test]
  std::vector<std::string> errors;
};

std::string describe(const char* what, std::size_t n_train, std::size_t rep, const std::exception& e) {
  return std::string(what) + " failed (n_train=" + std::to_string(n_train) + ", rep=" + std::to_string(rep) +
         "): " + e.what();
}

// Decisions of every requested test on every theta for one training draw.
// `f0_test` is the reference law of the test sample.
RepOutcome evaluate_rep(const ExperimentPlan& plan, const GaussianMixture& f0_train, const GaussianMixture& f0_test,
                        const GaussianMixture& f1, const std::vector<double>& thetas, std::size_t n_train,
                        std::size_t rep, std::uint64_t seed, double oracle_sigma2) {
  RepOutcome out;
  const std::size_t T = plan.tests.size();
  out.decision.assign(thetas.size() * T, kFailed);
  TrainedModel model;
  SampleSizes sz;
  try {
    sz = sample_sizes(plan, n_train);
    model = train_model(f0_train, f1, plan, n_train, seed);
    out.trained = true;
    out.sigma2 = model.hist.sigma2_hat;
    out.k_star = static_cast<double>(model.k_star());
  } catch (const Error& e) {
    out.errors.push_back(describe("training", n_train, rep, e));
    return out;
  }

  std::optional<BootstrapResult> boot;
  std::string boot_error;
  auto bootstrap = [&]() -> const BootstrapResult& {
    if (!boot && boot_error.empty()) {
      try {
        boot = bootstrap_threshold(model.bins0, model.bins1, model.ctx,
                                   {plan.bootstrap_reps, plan.quantile, derive_seed(seed, {3}), 1});
      } catch (const Error& e) {
        boot_error = e.what();
      }
    }
    if (!boot) throw PreconditionError(boot_error);
    return *boot;
  };
  const DensityFn d0 = [&f0_train](std::span<const double> x) { return f0_train.density(x); };
  const DensityFn d1 = [&f1](std::span<const double> x) { return f1.density(x); };

  for (std::size_t j = 0; j < thetas.size(); ++j) {
    Rng rng = make_rng(seed, {2, j});
    const auto test = sample_mixture(f0_test, f1, thetas[j], sz.n, rng);
    const auto counts = count_bins(model.tree, test.points);
    for (std::size_t k = 0; k < T; ++k) {
      try {
        bool reject = false;
        switch (plan.tests[k]) {
          case TestKind::EDRT: reject = run_test(model.hist, model.ctx, counts).reject; break;
          case TestKind::BEDRT: reject = bedrt_decision(model.hist, model.ctx, counts, bootstrap()).reject; break;
          case TestKind::MMD: {
            PointMatrix ref(model.reference.dim());
            const std::size_t m = std::min(sz.n, model.reference.rows());
            ref.reserve(m);
            for (std::size_t i = 0; i < m; ++i) ref.push_back(model.reference.row(i));
            reject = mmd_test(ref, test.points, {plan.kernel, plan.mmd_reps, plan.alpha, derive_seed(seed, {4, j})})
                         .reject;
            break;
          }
          case TestKind::OracleLR: reject = oracle_lr_test(d0, d1, oracle_sigma2, test.points, plan.alpha).reject; break;
        }
        out.decision[j * T + k] = reject ? 1 : 0;
      } catch (const Error& e) {
        out.errors.push_back(describe(to_string(plan.tests[k]), n_train, rep, e) + " at theta=" +
                             std::to_string(thetas[j]));
      }
    }
  }
  return out;
}

bool wants(const ExperimentPlan& plan, TestKind k) {
  return std::find(plan.tests.begin(), plan.tests.end(), k) != plan.tests.end();
}

}  // namespace

PowerCurve run_plan(const ExperimentPlan& plan) {
  plan.validate();
  const auto f0 = plan.setting.f0();
  const auto f1 = plan.setting.f1();
  const double oracle_sigma2 = wants(plan, TestKind::OracleLR) ? population_signal(f0, f1, nullptr) : 0.0;
  const std::size_t R = plan.reps, T = plan.tests.size();

  std::vector<RepOutcome> outcomes(plan.n_train.size() * R);
  parallel_for(outcomes.size(), plan.threads, [&](std::size_t c) {
    const std::size_t i = c / R, rep = c % R;
    outcomes[c] = evaluate_rep(plan, f0, f0, f1, plan.theta, plan.n_train[i], rep, derive_seed(plan.seed, {i, rep}),
                               oracle_sigma2);
  });

  PowerCurve curve;
  curve.plan = plan;
  for (std::size_t i = 0; i < plan.n_train.size(); ++i) {
    double s2 = 0.0, ks = 0.0;
    std::size_t trained = 0;
    for (std::size_t rep = 0; rep < R; ++rep) {
      const auto& o = outcomes[i * R + rep];
      if (o.trained) {
        s2 += o.sigma2;
        ks += o.k_star;
        ++trained;
      }
      curve.failures.insert(curve.failures.end(), o.errors.begin(), o.errors.end());
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 0; j < plan.theta.size(); ++j)
      for (std::size_t k = 0; k < T; ++k) {
        PowerRow row;
        row.n_train = plan.n_train[i];
        row.theta = plan.theta[j];
        row.test = plan.tests[k];
        for (std::size_t rep = 0; rep < R; ++rep) {
          const auto d = outcomes[i * R + rep].decision[j * T + k];
          if (d == kFailed) {
            ++row.failures;
          } else {
            ++row.reps;
            row.rejects += static_cast<std::size_t>(d);
          }
        }
        row.reject_rate = row.reps ? static_cast<double>(row.rejects) / static_cast<double>(row.reps) : nan;
        row.mean_sigma2_hat = trained ? s2 / static_cast<double>(trained) : nan;
        row.mean_k_star = trained ? ks / static_cast<double>(trained) : nan;
        curve.rows.push_back(row);
      }
  }
  return curve;
}

SlopeFit detection_slope(const std::vector<PowerRow>& rows, TestKind test, double lo, double hi) {
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (r.test != test || !(r.theta > 0.0) || !(r.reject_rate >= lo && r.reject_rate <= hi)) continue;
    xs.push_back(std::log(1.0 / static_cast<double>(r.n_train)));
    ys.push_back(std::log(r.theta));
  }
  const std::string band = "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
  if (xs.size() < 3)
    throw PreconditionError("detection slope needs at least 3 points with reject rate in " + band + ", found " +
                            std::to_string(xs.size()));
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw PreconditionError("in-band points in " + band + " share a single n_train");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = xs.size();
  return fit;
}

const char* to_string(ShiftDirection d) noexcept { return d == ShiftDirection::TrainShift ? "train_shift" : "test_shift"; }

ShiftDirection parse_shift_direction(const std::string& text) {
  if (text == "train_shift" || text == "train") return ShiftDirection::TrainShift;
  if (text == "test_shift" || text == "test") return ShiftDirection::TestShift;
  throw PreconditionError("unknown shift direction '" + text + "' (expected train_shift or test_shift)");
}

GaussianMixture robustness_reference(double pi) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw PreconditionError("mixture weight must lie in [0,1]");
  const std::vector<double> var{0.01, 0.01};
  return GaussianMixture({pi, 1.0 - pi}, {TruncatedGaussian({0.3, 0.6}, var), TruncatedGaussian({0.6, 0.3}, var)});
}

GaussianMixture robustness_contaminant() { return GaussianMixture(TruncatedGaussian({0.6, 0.6}, {0.01, 0.01})); }

RobustnessTable robustness_mixture_study(const std::vector<double>& pis, ShiftDirection direction,
                                         const std::vector<double>& thetas, const ExperimentPlan& core) {
  if (pis.empty() || thetas.empty()) throw PreconditionError("robustness grids must be non-empty");
  if (core.n_train.empty() || core.reps < 1 || core.tests.empty()) throw PreconditionError("invalid core plan");
  const auto f1 = robustness_contaminant();
  const std::size_t R = core.reps, T = core.tests.size();
  const std::size_t n_train = core.n_train.front();

  std::vector<RepOutcome> outcomes(pis.size() * R);
  parallel_for(outcomes.size(), core.threads, [&](std::size_t c) {
    const std::size_t i = c / R, rep = c % R;
    const auto shifted = robustness_reference(pis[i]);
    const auto balanced = robustness_reference(0.5);
    const auto& f0_train = direction == ShiftDirection::TrainShift ? balanced : shifted;
    const auto& f0_test = direction == ShiftDirection::TrainShift ? shifted : balanced;
    const double s2 = std::find(core.tests.begin(), core.tests.end(), TestKind::OracleLR) != core.tests.end()
                          ? population_signal(f0_train, f1, nullptr)
                          : 0.0;
    outcomes[c] = evaluate_rep(core, f0_train, f0_test, f1, thetas, n_train, rep, derive_seed(core.seed, {i, rep}), s2);
  });

  RobustnessTable table;
  table.plan = core;
  for (std::size_t i = 0; i < pis.size(); ++i)
    for (std::size_t j = 0; j < thetas.size(); ++j)
      for (std::size_t k = 0; k < T; ++k) {
        RobustnessRow row{direction, pis[i], thetas[j], core.tests[k]};
        for (std::size_t rep = 0; rep < R; ++rep) {
          const auto d = outcomes[i * R + rep].decision[j * T + k];
          if (d == kFailed) {
            ++row.failures;
          } else {
            ++row.reps;
            row.rejects += static_cast<std::size_t>(d);
          }
        }
        row.reject_rate = row.reps ? static_cast<double>(row.rejects) / static_cast<double>(row.reps)
                                   : std::numeric_limits<double>::quiet_NaN();
        table.rows.push_back(row);
      }
  for (const auto& o : outcomes) table.failures.insert(table.failures.end(), o.errors.begin(), o.errors.end());
  return table;
}

}  // namespace drt
