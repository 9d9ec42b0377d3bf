#pragma once

// Brute-force split search used as a reference for best_split. Counts are
// recomputed from scratch for every candidate and the thresholded heights
// are re-derived here, so nothing is shared with the library's sweep.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "drt/drop.hpp"

namespace drt::testing {

inline double reference_bin_signal(const ThresholdContext& c, std::int64_t a, std::int64_t b) {
  const double f0 = static_cast<double>(a) / static_cast<double>(c.n0);
  const double f1 = static_cast<double>(b) / static_cast<double>(c.n1);
  double h0 = f0, h1 = f1;
  if (f1 > c.eps1 && f0 <= c.eps0) {
    h0 = 3 * c.eps0;
  } else if (f1 <= c.eps1 && f0 <= c.eps1) {
    h0 = h1 = 3 * c.eps1;
  } else if (f1 <= c.eps1 && f0 > c.eps1) {
    h1 = 3 * c.eps1;
  }
  return (h1 / h0 - 1) * (h1 / h0 - 1) * h0;
}

inline double reference_gini(double a, double b) {
  if (a + b == 0) return 0;
  const double p = b / (a + b);
  return 2 * p * (1 - p);
}

struct ReferenceSplit {
  std::size_t dim;
  double value;
  double gain;
};

inline std::optional<ReferenceSplit> exhaustive_split(const PartSample& part, const std::vector<std::size_t>& members,
                                                      const ThresholdContext& ctx, SplitCriterion crit,
                                                      std::size_t min_points) {
  if (members.size() < 2 || members.size() < min_points) return std::nullopt;
  std::optional<ReferenceSplit> best;
  for (std::size_t d = 0; d < part.points.dim(); ++d) {
    std::set<double> values;
    for (auto i : members) values.insert(part.points(i, d));
    std::vector<double> sorted(values.begin(), values.end());
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
      const double v = 0.5 * (sorted[k] + sorted[k + 1]);
      if (!(sorted[k] < v && v < sorted[k + 1])) continue;
      std::int64_t l0 = 0, l1 = 0, r0 = 0, r1 = 0;
      for (auto i : members) {
        const bool left = part.points(i, d) < v;
        if (part.label[i]) (left ? l1 : r1)++;
        else (left ? l0 : r0)++;
      }
      double gain;
      if (crit == SplitCriterion::DensityRatio) {
        gain = reference_bin_signal(ctx, l0, l1) + reference_bin_signal(ctx, r0, r1) -
               reference_bin_signal(ctx, l0 + r0, l1 + r1);
      } else {
        const double m = static_cast<double>(l0 + l1 + r0 + r1);
        gain = reference_gini(l0 + r0, l1 + r1) - (l0 + l1) / m * reference_gini(l0, l1) -
               (r0 + r1) / m * reference_gini(r0, r1);
      }
      if (!best || gain > best->gain) best = ReferenceSplit{d, v, gain};
    }
  }
  if (!best || !(best->gain > 0)) return std::nullopt;
  return best;
}

}  // namespace drt::testing
