#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace idfield {

using Point = std::vector<double>;

// Axis-aligned box [lo_1, hi_1) x ... x [lo_d, hi_d).
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  static Box cube(double halfwidth, std::size_t dim);

  std::size_t dim() const noexcept { return lo.size(); }
  double volume() const noexcept;
  Point center() const;
  bool contains(std::span<const double> x) const noexcept;
  // True when this box lies inside `outer` up to an absolute slack.
  bool inside(const Box& outer, double slack = 0.0) const noexcept;
  // Positive-volume intersection test (shared interior).
  bool overlaps(const Box& other) const noexcept;
};

}  // namespace idfield
