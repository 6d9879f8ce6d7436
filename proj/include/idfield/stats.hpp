#pragma once

#include <cstddef>
#include <span>

namespace idfield {

struct KsResult {
  double statistic = 0.0;
  double critical = 0.0;  // two-sample critical value at the 1% level
  bool passes() const noexcept { return statistic < critical; }
};

// Two-sample Kolmogorov-Smirnov test (asymptotic 1% critical value).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Running mean/variance with an associative merge.
struct Welford {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) noexcept;
  void merge(const Welford& other) noexcept;
  double variance() const noexcept;  // unbiased
};

}  // namespace idfield
