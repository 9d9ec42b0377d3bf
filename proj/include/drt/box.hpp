#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace drt {

// Axis-aligned rectangle [lo, hi) in each coordinate; faces lying on the
// upper boundary of the unit cube are closed so the cube itself is covered.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  static Box unit(std::size_t dim) { return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)}; }

  std::size_t dim() const noexcept { return lo.size(); }

  double volume() const noexcept {
    double v = 1.0;
    for (std::size_t j = 0; j < lo.size(); ++j) v *= hi[j] - lo[j];
    return v;
  }

  bool contains(std::span<const double> x) const noexcept {
    for (std::size_t j = 0; j < lo.size(); ++j) {
      if (x[j] < lo[j]) return false;
      if (x[j] >= hi[j] && !(hi[j] == 1.0 && x[j] == 1.0)) return false;
    }
    return true;
  }
};

}  // namespace drt
