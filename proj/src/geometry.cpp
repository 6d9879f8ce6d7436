#include "idfield/geometry.hpp"

#include <algorithm>

namespace idfield {

Box Box::cube(double halfwidth, std::size_t dim) {
  return Box{std::vector<double>(dim, -halfwidth), std::vector<double>(dim, halfwidth)};
}

double Box::volume() const noexcept {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
  return v;
}

Point Box::center() const {
  Point c(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

bool Box::contains(std::span<const double> x) const noexcept {
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (x[i] < lo[i] || x[i] >= hi[i]) return false;
  return true;
}

bool Box::inside(const Box& outer, double slack) const noexcept {
  if (outer.dim() != dim()) return false;
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (lo[i] < outer.lo[i] - slack || hi[i] > outer.hi[i] + slack) return false;
  return true;
}

bool Box::overlaps(const Box& other) const noexcept {
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (std::min(hi[i], other.hi[i]) <= std::max(lo[i], other.lo[i])) return false;
  return true;
}

}  // namespace idfield
