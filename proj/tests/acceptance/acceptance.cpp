// End-to-end checks of the test suite at desk scale. Prints one PASS/FAIL line
// per criterion and exits non-zero when any criterion fails.
//
// usage: acceptance [--cli path/to/drt] [--only N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "../support/split_oracle.hpp"
#include "drt/bootstrap.hpp"
#include "drt/drop.hpp"
#include "drt/edrt.hpp"
#include "drt/experiment.hpp"
#include "drt/gaussian.hpp"
#include "drt/mmd.hpp"
#include "drt/random.hpp"

namespace {

using namespace drt;
using Clock = std::chrono::steady_clock;

// One seed for every criterion, fixed before any run.
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

ExperimentPlan null_plan(SettingLabel label, TestKind test) {
  ExperimentPlan p;
  p.setting = GaussianSetting::named(label);
  p.n_train = {10000};  // n = 0.1 n_train = 1000
  p.theta = {0.0};
  p.reps = 100;
  p.tests = {test};
  p.bootstrap_reps = 200;
  p.seed = kSeed;
  p.threads = 0;
  return p;
}

Outcome edrt_conservative() {
  Outcome o{true, ""};
  for (auto label : {SettingLabel::A, SettingLabel::B, SettingLabel::C}) {
    const auto t0 = Clock::now();
    const auto row = run_plan(null_plan(label, TestKind::EDRT)).rows.at(0);
    const double secs = seconds_since(t0);
    const bool ok = row.failures == 0 && row.rejects <= 2 && secs < 120;
    o.pass = o.pass && ok;
    o.detail += to_string(label) + ": " + std::to_string(row.rejects) + "/" + std::to_string(row.reps) +
                " rejections, " + fmt("%.1fs", secs) + "; ";
  }
  return o;
}

Outcome bedrt_calibrated() {
  Outcome o{true, ""};
  const auto t0 = Clock::now();
  for (auto label : {SettingLabel::A, SettingLabel::B, SettingLabel::C}) {
    const auto row = run_plan(null_plan(label, TestKind::BEDRT)).rows.at(0);
    const bool ok = row.failures == 0 && row.reject_rate >= 0.01 && row.reject_rate <= 0.12;
    o.pass = o.pass && ok;
    o.detail += to_string(label) + ": type I " + fmt("%.3f", row.reject_rate) + (ok ? "" : " (outside [0.01, 0.12])") +
                "; ";
  }
  const double secs = seconds_since(t0);
  o.pass = o.pass && secs < 600;
  o.detail += fmt("%.1fs", secs);
  return o;
}

Outcome power_ordering() {
  ExperimentPlan p;
  p.setting = GaussianSetting::named(SettingLabel::B);
  p.n_train = {10000};
  p.theta = {0.03, 0.1};
  p.reps = 100;
  p.tests = {TestKind::EDRT, TestKind::BEDRT};
  p.seed = kSeed;
  p.threads = 0;
  const auto curve = run_plan(p);
  auto rate = [&](double theta, TestKind t) {
    for (const auto& r : curve.rows)
      if (r.theta == theta && r.test == t) return r.reject_rate;
    return std::nan("");
  };
  const double e03 = rate(0.03, TestKind::EDRT), e10 = rate(0.1, TestKind::EDRT);
  const double b03 = rate(0.03, TestKind::BEDRT), b10 = rate(0.1, TestKind::BEDRT);
  Outcome o;
  o.pass = !curve.any_failed() && b10 >= e10 && e10 >= e03 && b10 >= b03;
  o.detail = "theta=0.1: BEDRT " + fmt("%.2f", b10) + " EDRT " + fmt("%.2f", e10) + "; theta=0.03: BEDRT " +
             fmt("%.2f", b03) + " EDRT " + fmt("%.2f", e03);
  return o;
}

Outcome drop_beats_gini() {
  const auto s = GaussianSetting::named(SettingLabel::A);
  const auto f0 = s.f0(), f1 = s.f1();
  const std::vector<std::size_t> sizes{10000, 100000};
  Outcome o;
  double drop_big = 0, gini_big = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    std::vector<double> drop, gini;
    for (std::size_t rep = 0; rep < 20; ++rep) {
      ExperimentPlan p;
      p.seed = kSeed;
      const auto seed = derive_seed(kSeed, {i, rep});
      p.criterion = SplitCriterion::DensityRatio;
      drop.push_back(train_model(f0, f1, p, sizes[i], seed).hist.sigma2_hat);
      p.criterion = SplitCriterion::Gini;
      gini.push_back(train_model(f0, f1, p, sizes[i], seed).hist.sigma2_hat);
    }
    const double md = median(drop), mg = median(gini);
    o.detail += "n_train=" + std::to_string(sizes[i]) + ": median sigma2 DROP " + fmt("%.4g", md) + " Gini " +
                fmt("%.4g", mg) + "; ";
    if (sizes[i] == 100000) {
      drop_big = md;
      gini_big = mg;
    }
  }
  o.pass = drop_big > gini_big;
  return o;
}

std::vector<double> geomspace(double lo, double hi, std::size_t count) {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i)
    v[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * static_cast<double>(i) / (count - 1.0));
  return v;
}

Outcome detection_slopes() {
  ExperimentPlan p;
  p.setting = GaussianSetting::named(SettingLabel::A);
  p.n_train = {1000, 3000, 10000, 30000, 100000};
  // wide enough that every n_train crosses the power band for both tests
  p.theta = geomspace(1e-4, 1.0, 17);
  p.reps = 100;
  p.tests = {TestKind::BEDRT, TestKind::MMD};
  p.seed = kSeed;
  p.threads = 0;
  const auto t0 = Clock::now();
  const auto curve = run_plan(p);
  const double secs = seconds_since(t0);
  Outcome o{secs < 3600 && !curve.any_failed(), ""};
  const std::pair<TestKind, std::pair<double, double>> targets[] = {{TestKind::BEDRT, {0.8, 1.1}},
                                                                    {TestKind::MMD, {0.35, 0.65}}};
  for (const auto& [test, band] : targets) {
    try {
      const auto fit = detection_slope(curve.rows, test, 0.2, 0.8);
      const bool ok = fit.slope >= band.first && fit.slope <= band.second;
      o.pass = o.pass && ok;
      o.detail += std::string(to_string(test)) + " slope " + fmt("%.3f", fit.slope) + " over " +
                  std::to_string(fit.points) + " points (target [" + fmt("%.2f", band.first) + ", " +
                  fmt("%.2f", band.second) + "]); ";
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail += std::string(to_string(test)) + ": " + e.what() + "; ";
    }
  }
  o.detail += fmt("%.0fs", secs);
  return o;
}

PartitionTree random_refinement(PartitionTree tree, std::size_t splits, Rng& rng) {
  for (std::size_t s = 0; s < splits; ++s) {
    const int bin = static_cast<int>(uniform_index(rng, tree.bin_count()));
    const auto box = tree.bin_box(bin);
    const std::size_t d = uniform_index(rng, tree.dim());
    const double v = box.lo[d] + (0.05 + 0.9 * uniform01(rng)) * (box.hi[d] - box.lo[d]);
    tree.split_leaf_in_place(bin, d, v);
  }
  return tree;
}

Outcome signal_hierarchy() {
  const auto s = GaussianSetting::named(SettingLabel::A);
  const auto f0 = s.f0(), f1 = s.f1();
  const double sigma2 = population_signal(f0, f1, nullptr);
  Rng rng = make_rng(kSeed, {6});
  int bad = 0;
  double worst = -1e300;
  for (int pair = 0; pair < 50; ++pair) {
    const auto coarse = random_refinement(PartitionTree(2), 1 + uniform_index(rng, 12), rng);
    const auto fine = random_refinement(coarse, 1 + uniform_index(rng, 12), rng);
    const double a = population_signal(f0, f1, &coarse), b = population_signal(f0, f1, &fine);
    const double tol = 1e-9 * std::max(1.0, b);
    worst = std::max({worst, (a - b) / std::max(1.0, b), (b - sigma2) / sigma2});
    if (!(a <= b + tol) || !(b <= sigma2 + 1e-9 * sigma2)) ++bad;
  }
  return {bad == 0, std::to_string(50 - bad) + "/50 nested pairs ordered; largest relative excess " +
                        fmt("%.3g", worst)};
}

Outcome oracle_equivalences() {
  Outcome o{true, ""};
  // (a) bin-wise and pointwise statistic
  {
    Rng rng = make_rng(kSeed, {7, 1});
    double worst = 0;
    for (int f = 0; f < 100; ++f) {
      const auto label = std::array{SettingLabel::A, SettingLabel::B, SettingLabel::C}[uniform_index(rng, 3)];
      const auto s = GaussianSetting::named(label);
      const auto tree = random_refinement(PartitionTree(2), 1 + uniform_index(rng, 20), rng);
      const std::size_t n0 = 2000 + uniform_index(rng, 8000), n1 = 200 + uniform_index(rng, 1800);
      const std::size_t n = 100 + uniform_index(rng, 1000);
      const auto e0 = sample_truncated_gaussian(s, 0, n0, rng()), e1 = sample_truncated_gaussian(s, 1, n1, rng());
      const auto ctx = make_context(0.05, tree.bin_count(), static_cast<std::int64_t>(n), static_cast<std::int64_t>(n0),
                                    static_cast<std::int64_t>(n1));
      const auto h = estimate(ctx, count_bins(tree, e0), count_bins(tree, e1));
      const auto test = sample_mixture(s, 0.5 * uniform01(rng), n, rng()).points;
      worst = std::max(worst, std::abs(pointwise_statistic(h, tree, test) - statistic(h, count_bins(tree, test))));
    }
    const bool ok = worst <= 1e-12;
    o.pass = o.pass && ok;
    o.detail += "(a) max |binwise - pointwise| " + fmt("%.2g", worst) + "; ";
  }
  // (b) linear MMD mean on a three-atom space
  {
    const double atoms[3] = {0.0, 0.5, 1.5};
    const double p[3] = {0.5, 0.3, 0.2}, q[3] = {0.2, 0.3, 0.5};
    const double population = 0.16187959804087848, bracket_var = 0.5659288341980767;
    const std::size_t m = 100, seeds = 10000;
    auto draw = [&](const double* w, Rng& rng) {
      const double u = uniform01(rng);
      return u < w[0] ? atoms[0] : (u < w[0] + w[1] ? atoms[1] : atoms[2]);
    };
    double sum = 0;
    for (std::size_t sd = 0; sd < seeds; ++sd) {
      Rng rng = make_rng(kSeed, {7, 2, sd});
      PointMatrix X(1), Y(1);
      for (std::size_t i = 0; i < m; ++i) X.push_back(std::vector<double>{draw(p, rng)});
      for (std::size_t i = 0; i < m; ++i) Y.push_back(std::vector<double>{draw(q, rng)});
      sum += mmd_linear(X, Y, 0.7);
    }
    const double mean = sum / seeds;
    const double sigma = std::sqrt(bracket_var / (static_cast<double>(seeds) * (m / 2)));
    const bool ok = std::abs(mean - population) <= 3 * sigma;
    o.pass = o.pass && ok;
    o.detail += "(b) mean " + fmt("%.6f", mean) + " vs " + fmt("%.6f", population) + " (3 sd " +
                fmt("%.2g", 3 * sigma) + "); ";
  }
  // (c) best split against a brute-force scan
  {
    Rng rng = make_rng(kSeed, {7, 3});
    int agree = 0;
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t d = 1 + uniform_index(rng, 3);
      const std::size_t levels = 5 + uniform_index(rng, 40);
      auto coord = [&] { return static_cast<double>(uniform_index(rng, levels)) / static_cast<double>(levels); };
      PointMatrix a(d), b(d);
      const std::size_t n0 = 10 + uniform_index(rng, 90), n1 = 5 + uniform_index(rng, 40);
      std::vector<double> x(d);
      for (std::size_t i = 0; i < n0; ++i) {
        for (auto& v : x) v = coord();
        a.push_back(x);
      }
      for (std::size_t i = 0; i < n1; ++i) {
        for (auto& v : x) v = std::sqrt(coord());
        b.push_back(x);
      }
      const auto part = PartSample::from(a, b);
      std::vector<std::size_t> rows(part.points.rows());
      std::iota(rows.begin(), rows.end(), 0);
      const auto ctx = make_context(0.05, 16, 20 + uniform_index(rng, 500), part.n0, part.n1, 0.5 + 2 * uniform01(rng));
      const auto crit = trial % 2 ? SplitCriterion::Gini : SplitCriterion::DensityRatio;
      const auto got = best_split(part, rows, 0, ctx, crit, 0);
      const auto want = drt::testing::exhaustive_split(part, rows, ctx, crit, 0);
      const bool same = got.has_value() == want.has_value() &&
                        (!got || (got->dim == want->dim && got->value == want->value &&
                                  std::abs(got->gain(crit) - want->gain) <= 1e-12 * std::max(1.0, std::abs(want->gain))));
      agree += same;
    }
    o.pass = o.pass && agree == 30;
    o.detail += "(c) " + std::to_string(agree) + "/30 splits identical";
  }
  return o;
}

Outcome golden_fixture() {
  const auto ctx = make_context(0.05, 2, 500, 1000, 100);
  const BinTable table{{990, 10}, {5, 95}, {400, 100}};
  const auto h = estimate(ctx, table);
  const auto r = run_test(h, ctx, table.n_test);
  const bool labels = h.omega[0] == Omega::Omega1 && h.omega[1] == Omega::Omega0;
  const double dS = std::abs(r.statistic - 4.1056192127012679);
  const double dT = std::abs(r.threshold - 3.4596863367955862);
  return {labels && r.reject && dS <= 1e-9 && dT <= 1e-9,
          "labels {" + std::string(to_string(h.omega[0])) + ", " + to_string(h.omega[1]) + "}, S " +
              fmt("%.12f", r.statistic) + ", threshold " + fmt("%.12f", r.threshold) +
              ", reject=" + (r.reject ? "true" : "false")};
}

Outcome sampler_ks() {
  Outcome o{true, ""};
  double worst = 0;
  std::uint64_t stream = 0;
  for (auto label : {SettingLabel::A, SettingLabel::B, SettingLabel::C, SettingLabel::Null}) {
    const auto s = GaussianSetting::named(label);
    double setting_worst = 0;
    for (int which : {0, 1}) {
      const auto law = (which ? s.f1() : s.f0()).components().front();
      const auto x = sample_truncated_gaussian(s, which, 100000, derive_seed(kSeed, {9, stream++}));
      for (std::size_t d = 0; d < x.dim(); ++d) {
        std::vector<double> v(x.rows());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = x(i, d);
        std::sort(v.begin(), v.end());
        const double n = static_cast<double>(v.size());
        double ks = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
          const double F = law.axis_cdf(d, v[i]);
          ks = std::max({ks, (i + 1) / n - F, F - i / n});
        }
        setting_worst = std::max(setting_worst, ks);
      }
    }
    worst = std::max(worst, setting_worst);
    o.detail += to_string(label) + " " + fmt("%.4f", setting_worst) + "; ";
  }
  o.pass = worst < 0.01;
  o.detail = "max axis KS per setting: " + o.detail;
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome cli_determinism(const std::string& cli) {
  if (cli.empty()) return {false, "no --cli path given"};
  const auto dir = std::filesystem::temp_directory_path() / ("drt_acceptance_" + std::to_string(kSeed));
  std::filesystem::create_directories(dir);
  const auto data = (dir / "data.csv").string();
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"simulate", "--format csv simulate --setting B --n-train 4000 --theta 0.1"},
      {"fit", "fit-partition --setting A --n-train 6000 --k-max 16"},
      {"fit_data", "fit-partition --data " + data + " --k-max 8"},
      {"edrt", "edrt --setting B --n-train 6000 --theta 0.05"},
      {"bedrt", "bedrt --setting B --n-train 6000 --theta 0.05 --bootstrap-reps 50 --with-replicates"},
      {"mmd", "mmd-test --setting A --n-train 4000 --theta 0.1 --bootstrap-reps 50"},
      {"power", "--format csv power-curve --n-train 2000,4000 --theta 0,0.1 --reps 3 --tests edrt,bedrt,mmd "
                "--bootstrap-reps 20 --mmd-reps 20 --threads 2"},
      {"robust", "robustness --pi 0.5,0.9 --n-train 4000 --reps 2 --bootstrap-reps 20"},
  };
  std::size_t identical = 0;
  std::string detail;
  for (const auto& [name, args] : runs) {
    std::string first;
    bool ok = true;
    for (int round = 0; round < 2 && ok; ++round) {
      const auto out = (dir / (name + std::to_string(round))).string();
      const std::string cmd = "\"" + cli + "\" --seed 5 --out \"" + out + "\" " + args + " > /dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      if (status != 0) {
        ok = false;
        detail += name + " exited with " + std::to_string(status) + "; ";
        break;
      }
      const auto text = slurp(out);
      if (text.empty()) {
        ok = false;
        detail += name + " wrote nothing; ";
      } else if (round == 0) {
        first = text;
      } else if (text != first) {
        ok = false;
        detail += name + " differs between runs; ";
      }
    }
    if (name == "simulate" && ok) std::filesystem::copy_file(dir / "simulate0", data,
                                                             std::filesystem::copy_options::overwrite_existing);
    identical += ok;
  }
  std::filesystem::remove_all(dir);
  return {identical == runs.size(),
          std::to_string(identical) + "/" + std::to_string(runs.size()) + " invocations byte-identical. " + detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc) cli = argv[++i];
    else if (a == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
    else {
      std::cerr << "usage: acceptance [--cli path] [--only N]\n";
      return 64;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"EDRT conservative under H0", edrt_conservative},
      {"BEDRT type I within [0.01, 0.12]", bedrt_calibrated},
      {"power ordering BEDRT >= EDRT and monotone in theta", power_ordering},
      {"DROP signal above Gini at n_train=1e5", drop_beats_gini},
      {"detection slopes BEDRT [0.8, 1.1] and MMD [0.35, 0.65]", detection_slopes},
      {"signal hierarchy on nested partitions", signal_hierarchy},
      {"oracle equivalences", oracle_equivalences},
      {"golden two-bin fixture", golden_fixture},
      {"truncated Gaussian sampler KS < 0.01", sampler_ks},
      {"CLI determinism", [&] { return cli_determinism(cli); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i + 1) != only) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " | " << o.detail
              << " [" << fmt("%.1f", seconds_since(t0)) << "s]" << std::endl;
  }
  return failed ? 1 : 0;
}
