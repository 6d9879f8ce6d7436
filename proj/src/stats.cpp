#include "idfield/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace idfield {

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto n = static_cast<double>(x.size());
  const auto m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  KsResult r;
  r.statistic = d;
  r.critical = 1.628 * std::sqrt((n + m) / (n * m));
  return r;
}

void Welford::add(double x) noexcept {
  ++count;
  const double delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (x - mean);
}

void Welford::merge(const Welford& other) noexcept {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const auto n = static_cast<double>(count + other.count);
  const double delta = other.mean - mean;
  mean += delta * static_cast<double>(other.count) / n;
  m2 += other.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(other.count) / n;
  count += other.count;
}

double Welford::variance() const noexcept {
  return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
}

}  // namespace idfield
