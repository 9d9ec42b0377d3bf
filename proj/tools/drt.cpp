// drt: command-line front end for contamination detection experiments.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "drt/bootstrap.hpp"
#include "drt/dataset.hpp"
#include "drt/drop.hpp"
#include "drt/edrt.hpp"
#include "drt/error.hpp"
#include "drt/experiment.hpp"
#include "drt/gaussian.hpp"
#include "drt/mmd.hpp"

using namespace drt;

namespace {

struct Global {
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::string out = "-";
  std::string format = "json";
};

// Training and test points, either read from a tagged CSV or simulated.
struct DataOptions {
  std::string data;
  bool preprocess = false;
  std::string setting = "A";
  std::size_t n_train = 10000;
  std::optional<std::size_t> n_test;
  double theta = 0.0;
};

struct FitOptions {
  std::size_t k_max = 64;
  std::string criterion = "drop";
  std::string size_mode = "full";
  std::size_t min_k = 1;
  double frac_n0 = 0.7;
  double frac_part = 0.5;
};

struct Problem {
  PointMatrix reference, contaminant, test;
};

void add_data_options(CLI::App* app, DataOptions& d, bool with_theta = true) {
  app->add_option("--data", d.data, "CSV with x columns and a source column (0, 1 or test)");
  app->add_flag("--preprocess", d.preprocess, "centre, arcsinh and rescale every coordinate to [0,1]");
  app->add_option("--setting", d.setting, "simulated setting when no --data: A, B, C or null")->capture_default_str();
  app->add_option("--n-train", d.n_train, "simulated training size")->capture_default_str();
  app->add_option("--n-test", d.n_test, "simulated test size (default 0.1 n_train)");
  if (with_theta) app->add_option("--theta", d.theta, "simulated contamination fraction")->capture_default_str();
}

void add_fit_options(CLI::App* app, FitOptions& f) {
  app->add_option("--k-max", f.k_max, "largest partition size")->capture_default_str();
  app->add_option("--criterion", f.criterion, "split criterion: drop or gini")->capture_default_str();
  app->add_option("--size-mode", f.size_mode, "size criterion: full or simplified")->capture_default_str();
  app->add_option("--force-min-K", f.min_k, "smallest admissible K*")->capture_default_str();
  app->add_option("--frac-n0", f.frac_n0, "reference share of simulated training points")->capture_default_str();
  app->add_option("--frac-part", f.frac_part, "share of each training sample used to grow the partition")
      ->capture_default_str();
}

Problem load_problem(const DataOptions& d, const FitOptions& f, const Global& g) {
  Problem p;
  if (!d.data.empty()) {
    auto ds = load_csv(d.data);
    if (d.preprocess) ds = preprocess(ds);
    p.reference = ds.select(ds.indices_of(Source::Reference));
    p.contaminant = ds.select(ds.indices_of(Source::Contaminant));
    p.test = ds.select(ds.indices_of(Source::Test));
    return p;
  }
  ExperimentPlan plan;
  plan.frac_n0 = f.frac_n0;
  const auto setting = GaussianSetting::parse(d.setting);
  auto sz = sample_sizes(plan, d.n_train);
  if (d.n_test) sz.n = *d.n_test;
  p.reference = sample_truncated_gaussian(setting, 0, sz.n0, derive_seed(g.seed, {10}));
  p.contaminant = sample_truncated_gaussian(setting, 1, sz.n1, derive_seed(g.seed, {11}));
  p.test = sample_mixture(setting, d.theta, sz.n, derive_seed(g.seed, {12})).points;
  return p;
}

ExperimentPlan fit_plan(const FitOptions& f, const Global& g) {
  ExperimentPlan plan;
  plan.alpha = g.alpha;
  plan.k_max = f.k_max;
  plan.criterion = parse_criterion(f.criterion);
  plan.size_mode = parse_size_mode(f.size_mode);
  plan.min_k = f.min_k;
  plan.frac_n0 = f.frac_n0;
  plan.frac_part = f.frac_part;
  plan.seed = g.seed;
  return plan;
}

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string format_test(const TestReport& r, const Global& g, bool with_null) {
  if (g.format == "json") return r.to_json(with_null) + "\n";
  std::ostringstream os;
  os << "method,statistic,threshold,reject,sigma2_hat,K,K0,K1,theta_detectable,seed\n"
     << r.method << ',' << g6(r.statistic) << ',' << g6(r.threshold) << ',' << (r.reject ? 1 : 0) << ','
     << g6(r.sigma2_hat) << ',' << r.K << ',' << r.K0 << ',' << r.K1 << ',' << g6(r.theta_detectable) << ','
     << g.seed << '\n';
  return os.str();
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& s : items) {
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supervised contamination detection with density-ratio tests"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--alpha", g.alpha, "test level")->capture_default_str();
  app.add_option("--out", g.out, "output file (- for stdout)")->capture_default_str();
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  DataOptions data;
  FitOptions fit;

  auto* simulate = app.add_subcommand("simulate", "write a simulated tagged dataset");
  add_data_options(simulate, data);
  simulate->add_option("--frac-n0", fit.frac_n0, "reference share of training points")->capture_default_str();

  auto* fit_cmd = app.add_subcommand("fit-partition", "grow a DROP sequence and select K*");
  add_data_options(fit_cmd, data, false);
  add_fit_options(fit_cmd, fit);

  auto* edrt_cmd = app.add_subcommand("edrt", "estimated density ratio test");
  add_data_options(edrt_cmd, data);
  add_fit_options(edrt_cmd, fit);

  std::size_t boot_reps = 200;
  double quantile = 0.95;
  bool with_replicates = false;
  auto* bedrt_cmd = app.add_subcommand("bedrt", "bootstrap-calibrated density ratio test");
  add_data_options(bedrt_cmd, data);
  add_fit_options(bedrt_cmd, fit);
  bedrt_cmd->add_option("--bootstrap-reps", boot_reps, "bootstrap replicates")->capture_default_str();
  bedrt_cmd->add_option("--quantile", quantile, "null quantile level")->capture_default_str();
  bedrt_cmd->add_flag("--with-replicates", with_replicates, "include the replicate statistics in JSON output");

  std::string bandwidth = "median";
  auto* mmd_cmd = app.add_subcommand("mmd-test", "linear-time MMD two-sample test");
  add_data_options(mmd_cmd, data);
  mmd_cmd->add_option("--frac-n0", fit.frac_n0, "reference share of simulated training points")->capture_default_str();
  mmd_cmd->add_option("--kernel-bandwidth", bandwidth, "RBF bandwidth or 'median'")->capture_default_str();
  mmd_cmd->add_option("--bootstrap-reps", boot_reps, "permutation replicates")->capture_default_str();
  mmd_cmd->add_flag("--with-replicates", with_replicates, "include the replicate statistics in JSON output");

  std::vector<std::string> n_grid, theta_grid, tests{"edrt"};
  std::size_t reps = 100, mmd_reps = 200, threads = 1;
  double frac_test = 0.1;
  auto add_grid_options = [&](CLI::App* c, const char* theta_default) {
    c->add_option("--setting", data.setting, "A, B, C or null")->capture_default_str();
    c->add_option("--theta", theta_grid, std::string("comma-separated contamination grid (default ") + theta_default + ")");
    c->add_option("--reps", reps, "replications per cell")->capture_default_str();
    c->add_option("--tests", tests, "comma-separated subset of edrt,bedrt,mmd,oracle_lr");
    c->add_option("--frac-test", frac_test, "test size as a share of n_train")->capture_default_str();
    c->add_option("--bootstrap-reps", boot_reps, "BEDRT replicates")->capture_default_str();
    c->add_option("--quantile", quantile, "BEDRT null quantile level")->capture_default_str();
    c->add_option("--mmd-reps", mmd_reps, "MMD permutation replicates")->capture_default_str();
    c->add_option("--kernel-bandwidth", bandwidth, "RBF bandwidth or 'median'")->capture_default_str();
    c->add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();
    add_fit_options(c, fit);
  };

  auto* power = app.add_subcommand("power-curve", "rejection rates over an (n_train, theta) grid");
  power->add_option("--n-train", n_grid, "comma-separated training sizes (default 1e3,3e3,1e4,3e4,1e5)");
  add_grid_options(power, "12 log-spaced points in [3e-3, 0.3]");

  std::string input, test_name = "bedrt";
  std::vector<double> band{0.2, 0.8};
  auto* slope = app.add_subcommand("slope", "fit the detection-rate slope of a power-curve CSV");
  slope->add_option("--input", input, "power-curve CSV report")->required();
  slope->add_option("--test", test_name, "test whose rows are fitted")->capture_default_str();
  slope->add_option("--band", band, "inclusive reject-rate band")->expected(2)->capture_default_str();

  std::vector<std::string> pi_grid;
  std::string direction = "train_shift";
  std::size_t robust_n = 100000;
  auto* robust = app.add_subcommand("robustness", "reject rates when the reference mixture weights shift");
  robust->add_option("--pi", pi_grid, "comma-separated mixture weights (default 0.5..0.9)");
  robust->add_option("--direction", direction, "train_shift or test_shift")->capture_default_str();
  robust->add_option("--n-train", robust_n, "training size")->capture_default_str();
  add_grid_options(robust, "0 and 0.015");

  CLI11_PARSE(app, argc, argv);

  try {
    auto kernel = KernelSpec::parse(bandwidth);
    if (simulate->parsed()) {
      if (g.format != "csv" && app.get_option("--format")->count() > 0)
        throw PreconditionError("simulate writes csv only");
      const auto p = load_problem(data, fit, g);
      LabeledDataset ds(p.reference.dim());
      ds.append(p.reference, Source::Reference);
      ds.append(p.contaminant, Source::Contaminant);
      ds.append(p.test, Source::Test);
      if (g.out.empty() || g.out == "-") throw PreconditionError("simulate needs --out");
      write_csv(g.out, ds);
      return 0;
    }
    if (fit_cmd->parsed() || edrt_cmd->parsed() || bedrt_cmd->parsed()) {
      const auto p = load_problem(data, fit, g);
      const auto plan = fit_plan(fit, g);
      std::size_t n_test = p.test.rows();
      if (fit_cmd->parsed() && n_test == 0) n_test = data.n_test.value_or(p.reference.rows() / 7);
      if (n_test == 0) throw PreconditionError("no test rows");
      const auto model = train_model(p.reference, p.contaminant, plan, n_test, g.seed);
      std::string text;
      if (fit_cmd->parsed()) {
        if (g.format != "json") throw PreconditionError("fit-partition writes json only");
        text = to_json(model.seq, &model.est, &model.selection) + "\n";
      } else if (edrt_cmd->parsed()) {
        text = format_test(run_test(model.hist, model.ctx, count_bins(model.tree, p.test)), g, false);
      } else {
        const auto boot =
            bootstrap_threshold(model.bins0, model.bins1, model.ctx, {boot_reps, quantile, derive_seed(g.seed, {3}), 1});
        text = format_test(bedrt_decision(model.hist, model.ctx, count_bins(model.tree, p.test), boot), g,
                           with_replicates);
      }
      emit_report(text, g.out);
      return 0;
    }
    if (mmd_cmd->parsed()) {
      const auto p = load_problem(data, fit, g);
      const auto rep = mmd_test(p.reference, p.test, {kernel, boot_reps, g.alpha, derive_seed(g.seed, {4})});
      emit_report(format_test(rep, g, with_replicates), g.out);
      return 0;
    }
    auto make_plan = [&]() {
      ExperimentPlan plan = fit_plan(fit, g);
      plan.setting = GaussianSetting::parse(data.setting);
      if (!theta_grid.empty()) {
        plan.theta.clear();
        for (const auto& s : split_list(theta_grid)) plan.theta.push_back(std::stod(s));
      }
      plan.reps = reps;
      plan.tests.clear();
      for (const auto& s : split_list(tests)) plan.tests.push_back(parse_test_kind(s));
      plan.frac_test = frac_test;
      plan.bootstrap_reps = boot_reps;
      plan.quantile = quantile;
      plan.mmd_reps = mmd_reps;
      plan.kernel = kernel;
      plan.threads = threads;
      return plan;
    };
    const auto format = parse_report_format(g.format);
    if (power->parsed()) {
      auto plan = make_plan();
      if (!n_grid.empty()) {
        plan.n_train.clear();
        for (const auto& s : split_list(n_grid)) plan.n_train.push_back(static_cast<std::size_t>(std::stod(s)));
      }
      const auto curve = run_plan(plan);
      emit_report(format_report(curve, format), g.out);
      for (const auto& f : curve.failures) std::cerr << "warning: " << f << '\n';
      return curve.any_failed() ? 2 : 0;
    }
    if (slope->parsed()) {
      std::ifstream in(input, std::ios::binary);
      if (!in) throw Error("cannot read '" + input + "'");
      std::stringstream buf;
      buf << in.rdbuf();
      const auto kind = parse_test_kind(test_name);
      const auto fit_result = detection_slope(read_power_rows(buf.str()), kind, band[0], band[1]);
      emit_report(format_report(fit_result, kind, band[0], band[1], format), g.out);
      return 0;
    }
    if (robust->parsed()) {
      auto plan = make_plan();
      plan.n_train = {robust_n};
      if (theta_grid.empty()) plan.theta = {0.0, 0.015};
      std::vector<double> pis{0.5, 0.6, 0.7, 0.8, 0.9};
      if (!pi_grid.empty()) {
        pis.clear();
        for (const auto& s : split_list(pi_grid)) pis.push_back(std::stod(s));
      }
      const auto table = robustness_mixture_study(pis, parse_shift_direction(direction), plan.theta, plan);
      emit_report(format_report(table, format), g.out);
      for (const auto& f : table.failures) std::cerr << "warning: " << f << '\n';
      bool failed = false;
      for (const auto& r : table.rows) failed = failed || r.failures > 0;
      return failed ? 2 : 0;
    }
  } catch (const drt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: bad number in a list option\n";
    return 1;
  }
  return 0;
}
