#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <iostream>
#include <map>
#include <sstream>

#include "drt/error.hpp"
#include "drt/experiment.hpp"
#include "json.hpp"

namespace drt {

namespace {

using nlohmann::json;

std::string g6(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(g6(v));
}

json plan_echo(const ExperimentPlan& p) {
  json tests = json::array();
  for (auto t : p.tests) tests.push_back(to_string(t));
  json theta = json::array();
  for (double t : p.theta) theta.push_back(num(t));
  json mean0 = json::array(), mean1 = json::array(), var = json::array();
  for (double v : p.setting.mean0) mean0.push_back(num(v));
  for (double v : p.setting.mean1) mean1.push_back(num(v));
  for (double v : p.setting.cov_diag) var.push_back(num(v));
  return {{"setting", {{"label", to_string(p.setting.label)}, {"mean0", mean0}, {"mean1", mean1}, {"cov_diag", var}}},
          {"n_train", p.n_train},
          {"theta", theta},
          {"reps", p.reps},
          {"tests", tests},
          {"alpha", num(p.alpha)},
          {"frac_n0", num(p.frac_n0)},
          {"frac_test", num(p.frac_test)},
          {"frac_part", num(p.frac_part)},
          {"k_max", p.k_max},
          {"criterion", to_string(p.criterion)},
          {"size_mode", to_string(p.size_mode)},
          {"min_k", p.min_k},
          {"bootstrap_reps", p.bootstrap_reps},
          {"quantile", num(p.quantile)},
          {"mmd_reps", p.mmd_reps},
          {"kernel_bandwidth", p.kernel.bandwidth ? num(*p.kernel.bandwidth) : json("median")},
          {"seed", p.seed}};
}

}  // namespace

ReportFormat parse_report_format(const std::string& text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "json") return ReportFormat::Json;
  throw PreconditionError("unknown format '" + text + "' (expected csv or json)");
}

std::string format_report(const PowerCurve& curve, ReportFormat format) {
  if (format == ReportFormat::Csv) {
    std::ostringstream os;
    os << "n_train,theta,test,reps,rejects,failures,reject_rate,mean_sigma2_hat,mean_K_star,seed\n";
    for (const auto& r : curve.rows)
      os << r.n_train << ',' << g6(r.theta) << ',' << to_string(r.test) << ',' << r.reps << ',' << r.rejects << ','
         << r.failures << ',' << g6(r.reject_rate) << ',' << g6(r.mean_sigma2_hat) << ',' << g6(r.mean_k_star) << ','
         << curve.plan.seed << '\n';
    return os.str();
  }
  json rows = json::array();
  for (const auto& r : curve.rows)
    rows.push_back({{"n_train", r.n_train},
                    {"theta", num(r.theta)},
                    {"test", to_string(r.test)},
                    {"reps", r.reps},
                    {"rejects", r.rejects},
                    {"failures", r.failures},
                    {"reject_rate", num(r.reject_rate)},
                    {"mean_sigma2_hat", num(r.mean_sigma2_hat)},
                    {"mean_K_star", num(r.mean_k_star)}});
  return json{{"plan", plan_echo(curve.plan)}, {"rows", rows}, {"failures", curve.failures}}.dump(2) + "\n";
}

std::string format_report(const RobustnessTable& table, ReportFormat format) {
  if (format == ReportFormat::Csv) {
    std::ostringstream os;
    os << "direction,pi,theta,test,reps,rejects,failures,reject_rate,seed\n";
    for (const auto& r : table.rows)
      os << to_string(r.direction) << ',' << g6(r.pi) << ',' << g6(r.theta) << ',' << to_string(r.test) << ','
         << r.reps << ',' << r.rejects << ',' << r.failures << ',' << g6(r.reject_rate) << ',' << table.plan.seed
         << '\n';
    return os.str();
  }
  json rows = json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"direction", to_string(r.direction)},
                    {"pi", num(r.pi)},
                    {"theta", num(r.theta)},
                    {"test", to_string(r.test)},
                    {"reps", r.reps},
                    {"rejects", r.rejects},
                    {"failures", r.failures},
                    {"reject_rate", num(r.reject_rate)}});
  return json{{"plan", plan_echo(table.plan)}, {"rows", rows}, {"failures", table.failures}}.dump(2) + "\n";
}

std::string format_report(const SlopeFit& fit, TestKind test, double lo, double hi, ReportFormat format) {
  if (format == ReportFormat::Csv)
    return "test,band_lo,band_hi,slope,intercept,points\n" + std::string(to_string(test)) + ',' + g6(lo) + ',' +
           g6(hi) + ',' + g6(fit.slope) + ',' + g6(fit.intercept) + ',' + std::to_string(fit.points) + '\n';
  return json{{"test", to_string(test)},
              {"band", {num(lo), num(hi)}},
              {"slope", num(fit.slope)},
              {"intercept", num(fit.intercept)},
              {"points", fit.points}}
             .dump(2) +
         "\n";
}

std::vector<PowerRow> read_power_rows(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> col;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  std::vector<PowerRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (col.empty()) {
      for (std::size_t i = 0; i < cells.size(); ++i) col[cells[i]] = i;
      for (const char* need : {"n_train", "theta", "test", "reject_rate"})
        if (!col.count(need)) throw SchemaError(std::string("power-curve report lacks column '") + need + "'");
      continue;
    }
    if (cells.size() != col.size()) throw ParseError("expected " + std::to_string(col.size()) + " fields", line_no);
    auto cell = [&](const char* name) -> const std::string& { return cells[col.at(name)]; };
    auto real = [&](const char* name) {
      try {
        return cell(name) == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell(name));
      } catch (const std::exception&) {
        throw ParseError(std::string("bad number in column '") + name + "'", line_no);
      }
    };
    PowerRow r;
    r.n_train = static_cast<std::size_t>(real("n_train"));
    r.theta = real("theta");
    r.test = parse_test_kind(cell("test"));
    r.reject_rate = real("reject_rate");
    if (col.count("reps")) r.reps = static_cast<std::size_t>(real("reps"));
    if (col.count("rejects")) r.rejects = static_cast<std::size_t>(real("rejects"));
    if (col.count("failures")) r.failures = static_cast<std::size_t>(real("failures"));
    rows.push_back(r);
  }
  return rows;
}

void emit_report(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace drt
