#include "drt/drop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drt/error.hpp"
#include "json.hpp"

namespace drt {

const char* to_string(SplitCriterion c) noexcept { return c == SplitCriterion::DensityRatio ? "density_ratio" : "gini"; }
const char* to_string(SizeMode m) noexcept { return m == SizeMode::Full ? "full" : "simplified"; }

SplitCriterion parse_criterion(const std::string& text) {
  if (text == "density_ratio" || text == "drop") return SplitCriterion::DensityRatio;
  if (text == "gini") return SplitCriterion::Gini;
  throw PreconditionError("unknown split criterion '" + text + "' (expected drop or gini)");
}

SizeMode parse_size_mode(const std::string& text) {
  if (text == "full") return SizeMode::Full;
  if (text == "simplified") return SizeMode::Simplified;
  throw PreconditionError("unknown size mode '" + text + "' (expected full or simplified)");
}

PartSample PartSample::from(const LabeledDataset& ds, const PartIndices& reference, const PartIndices& contaminant) {
  return from(ds.select(reference.indices), ds.select(contaminant.indices));
}

PartSample PartSample::from(const PointMatrix& reference, const PointMatrix& contaminant) {
  if (!reference.empty() && !contaminant.empty() && reference.dim() != contaminant.dim())
    throw PreconditionError("part samples differ in dimension");
  PartSample s;
  s.points = PointMatrix(reference.empty() ? contaminant.dim() : reference.dim());
  s.points.append(reference);
  s.points.append(contaminant);
  s.label.assign(reference.rows(), 0);
  s.label.insert(s.label.end(), contaminant.rows(), 1);
  s.n0 = static_cast<std::int64_t>(reference.rows());
  s.n1 = static_cast<std::int64_t>(contaminant.rows());
  return s;
}

std::size_t min_split_points(const ThresholdContext& part_ctx) {
  return static_cast<std::size_t>(std::ceil(3.0 * static_cast<double>(part_ctx.n1) * part_ctx.eps1));
}

double signal_gain(const ThresholdContext& ctx, std::int64_t c0, std::int64_t c1, std::int64_t l0, std::int64_t l1) {
  return estimate_bin(ctx, l0, l1).signal() + estimate_bin(ctx, c0 - l0, c1 - l1).signal() -
         estimate_bin(ctx, c0, c1).signal();
}

namespace {

double gini(std::int64_t c0, std::int64_t c1) {
  const double m = static_cast<double>(c0 + c1);
  if (m == 0.0) return 0.0;
  const double p = static_cast<double>(c1) / m;
  return 2.0 * p * (1.0 - p);
}

}  // namespace

double gini_gain(std::int64_t c0, std::int64_t c1, std::int64_t l0, std::int64_t l1) {
  const double m = static_cast<double>(c0 + c1);
  const double ml = static_cast<double>(l0 + l1);
  const double mr = m - ml;
  return gini(c0, c1) - (ml / m) * gini(l0, l1) - (mr / m) * gini(c0 - l0, c1 - l1);
}

std::optional<SplitCandidate> best_split(const PartSample& part, std::span<const std::size_t> members, int bin,
                                         const ThresholdContext& ctx, SplitCriterion criterion,
                                         std::size_t min_points) {
  if (members.size() < 2 || members.size() < min_points) return std::nullopt;
  std::int64_t c0 = 0, c1 = 0;
  for (std::size_t i : members) (part.label[i] ? c1 : c0) += 1;

  std::optional<SplitCandidate> best;
  std::vector<std::pair<double, std::uint8_t>> column(members.size());
  for (std::size_t dim = 0; dim < part.points.dim(); ++dim) {
    for (std::size_t k = 0; k < members.size(); ++k)
      column[k] = {part.points(members[k], dim), part.label[members[k]]};
    std::sort(column.begin(), column.end());
    std::int64_t l0 = 0, l1 = 0;
    for (std::size_t k = 0; k + 1 < column.size(); ++k) {
      (column[k].second ? l1 : l0) += 1;
      const double a = column[k].first;
      const double b = column[k + 1].first;
      if (!(a < b)) continue;
      const double mid = 0.5 * (a + b);
      if (!(a < mid && mid < b)) continue;  // adjacent doubles
      SplitCandidate cand{bin, dim, mid, signal_gain(ctx, c0, c1, l0, l1), gini_gain(c0, c1, l0, l1)};
      if (!best || cand.gain(criterion) > best->gain(criterion)) best = cand;
    }
  }
  if (!best || !(best->gain(criterion) > 0.0)) return std::nullopt;
  return best;
}

std::optional<SplitCandidate> best_split(const PartitionTree& tree, int bin, const PartSample& part,
                                         const ThresholdContext& ctx, SplitCriterion criterion,
                                         std::size_t min_points) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < part.points.rows(); ++i)
    if (tree.locate(part.points.row(i)) == bin) members.push_back(i);
  return best_split(part, members, bin, ctx, criterion, min_points);
}

PartitionSequence grow_sequence(const PartSample& part, const GrowthOptions& options) {
  if (options.k_max < 1) throw PreconditionError("k_max must be at least 1");
  if (part.n0 < 1 || part.n1 < 1) throw PreconditionError("both part samples must be non-empty");
  const std::size_t dim = part.points.dim();

  PartitionSequence seq{PartitionTree(dim), {}, options.k_max, options.criterion, {}, 0};
  seq.part_ctx = make_context(options.alpha, options.k_max, options.n_test, part.n0, part.n1,
                              sequence_u(options.alpha, options.k_max));
  seq.min_points = min_split_points(seq.part_ctx);

  std::vector<std::vector<std::size_t>> members(1);
  members[0].resize(part.points.rows());
  for (std::size_t i = 0; i < members[0].size(); ++i) members[0][i] = i;

  auto search = [&](int bin) {
    return best_split(part, members[static_cast<std::size_t>(bin)], bin, seq.part_ctx, options.criterion,
                      seq.min_points);
  };
  std::vector<std::optional<SplitCandidate>> cache{search(0)};

  while (seq.tree.bin_count() < options.k_max) {
    const SplitCandidate* chosen = nullptr;
    for (const auto& c : cache)
      if (c && (!chosen || c->gain(options.criterion) > chosen->gain(options.criterion))) chosen = &*c;
    if (!chosen) break;
    const SplitCandidate split = *chosen;
    const auto b = static_cast<std::size_t>(split.bin);
    seq.steps.push_back({split, members[b].size()});
    seq.tree.split_leaf_in_place(split.bin, split.dim, split.value);

    std::vector<std::size_t> left, right;
    for (std::size_t i : members[b]) (part.points(i, split.dim) < split.value ? left : right).push_back(i);
    members[b] = std::move(left);
    members.push_back(std::move(right));
    cache[b] = search(split.bin);
    cache.push_back(search(static_cast<int>(members.size() - 1)));
  }
  return seq;
}

std::vector<BinTable> sequence_tables(const PartitionSequence& seq, const PointMatrix& est0, const PointMatrix& est1) {
  const auto& nodes = seq.tree.nodes();
  // Points passing through each arena node of the final tree.
  auto pass_counts = [&](const PointMatrix& pts) {
    std::vector<std::int64_t> pass(nodes.size(), 0);
    for (std::size_t i = 0; i < pts.rows(); ++i) {
      const auto x = pts.row(i);
      int v = 0;
      while (true) {
        ++pass[static_cast<std::size_t>(v)];
        const auto& n = nodes[static_cast<std::size_t>(v)];
        if (n.is_leaf()) break;
        v = x[static_cast<std::size_t>(n.split_dim)] < n.split_value ? n.left : n.right;
      }
    }
    return pass;
  };
  const auto pass0 = pass_counts(est0);
  const auto pass1 = pass_counts(est1);

  std::vector<BinTable> tables;
  tables.reserve(seq.size());
  BinTable t;
  t.n0 = {pass0[0]};
  t.n1 = {pass1[0]};
  tables.push_back(t);
  // Step i appended arena nodes 2i+1 (left, keeps the bin id) and 2i+2.
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    const std::size_t l = 2 * i + 1, r = 2 * i + 2;
    const auto bin = static_cast<std::size_t>(nodes[l].bin);
    t.n0[bin] = pass0[l];
    t.n1[bin] = pass1[l];
    t.n0.push_back(pass0[r]);
    t.n1.push_back(pass1[r]);
    tables.push_back(t);
  }
  return tables;
}

std::vector<double> SequenceEstimate::sigma2() const {
  std::vector<double> out;
  out.reserve(hist.size());
  for (const auto& h : hist) out.push_back(h.sigma2_hat);
  return out;
}

SequenceEstimate estimate_sequence(const PartitionSequence& seq, const PointMatrix& est0, const PointMatrix& est1,
                                   double alpha, std::int64_t n_test) {
  const auto tables = sequence_tables(seq, est0, est1);
  const double u = sequence_u(alpha, seq.k_max);
  SequenceEstimate out;
  out.ctx.reserve(tables.size());
  out.hist.reserve(tables.size());
  for (std::size_t k = 0; k < tables.size(); ++k) {
    out.ctx.push_back(make_context(alpha, k + 1, n_test, static_cast<std::int64_t>(est0.rows()),
                                   static_cast<std::int64_t>(est1.rows()), u));
    out.hist.push_back(estimate(out.ctx.back(), tables[k]));
  }
  return out;
}

double size_criterion(const ThresholdedHistogram& hist, const ThresholdContext& ctx, SizeMode mode) {
  const double s2 = hist.sigma2_hat;
  if (!(s2 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(ctx.n);
  const double n0 = static_cast<double>(ctx.n0);
  const double n1 = static_cast<double>(ctx.n1);
  const double K = static_cast<double>(hist.bins());
  if (mode == SizeMode::Simplified) return std::max(std::sqrt(1.0 / (n * s2)), std::sqrt(K / (n0 * s2)));
  const double K0 = static_cast<double>(hist.K0);
  const double K1 = static_cast<double>(hist.K1);
  const double a = std::sqrt(ctx.t / (n * s2));
  const double b = std::sqrt(ctx.u / (n0 * s2));
  return a * (1.0 + K0 * a) + std::sqrt(ctx.u) * K1 / (s2 * std::sqrt(n1)) + b * (std::sqrt(K) + K0 * b);
}

SizeSelection select_size(std::span<const ThresholdedHistogram> hists, std::span<const ThresholdContext> ctxs,
                          SizeMode mode, std::size_t min_k) {
  if (hists.size() != ctxs.size()) throw PreconditionError("one context per histogram is required");
  if (hists.empty()) throw PreconditionError("empty partition sequence");
  SizeSelection sel;
  sel.criterion.assign(hists.size(), std::numeric_limits<double>::quiet_NaN());
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < hists.size(); ++i) {
    if (i + 1 < min_k) continue;
    const double c = size_criterion(hists[i], ctxs[i], mode);
    sel.criterion[i] = c;
    if (std::isnan(c)) continue;
    if (!found || c < best) {
      best = c;
      sel.k_star = i + 1;
      found = true;
    }
  }
  if (!found) {
    sel.zero_signal = true;
    sel.k_star = std::min(std::max<std::size_t>(min_k, 1), hists.size());
  }
  return sel;
}

std::string to_json(const PartitionSequence& seq, const SequenceEstimate* est, const SizeSelection* selection) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : seq.steps)
    steps.push_back({{"bin", s.split.bin},
                     {"dim", s.split.dim},
                     {"value", s.split.value},
                     {"delta", s.split.delta},
                     {"gini_gain", s.split.gini_gain},
                     {"bin_points", s.bin_points}});
  nlohmann::json doc{{"tree", nlohmann::json::parse(seq.tree.to_json())},
                     {"k_max", seq.k_max},
                     {"k_reached", seq.size()},
                     {"criterion", to_string(seq.criterion)},
                     {"min_split_points", seq.min_points},
                     {"steps", steps}};
  if (est) {
    doc["per_k_signal"] = est->sigma2();
    nlohmann::json k0 = nlohmann::json::array(), k1 = nlohmann::json::array();
    for (const auto& h : est->hist) {
      k0.push_back(h.K0);
      k1.push_back(h.K1);
    }
    doc["per_k_K0"] = k0;
    doc["per_k_K1"] = k1;
  }
  if (selection) {
    doc["k_star"] = selection->k_star;
    nlohmann::json crit = nlohmann::json::array();
    for (double c : selection->criterion) crit.push_back(std::isnan(c) ? nlohmann::json(nullptr) : nlohmann::json(c));
    doc["size_criterion"] = crit;
    doc["zero_signal_warning"] = selection->zero_signal;
  }
  return doc.dump();
}

}  // namespace drt
