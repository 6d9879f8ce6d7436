#include "idfield/step_approx.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "idfield/errors.hpp"

namespace idfield {

GridPartition::GridPartition(double A, int n, int d) : A_(A), n_(n), d_(d), count_(1) {
  if (!(A > 0.0) || !std::isfinite(A)) throw UsageError("build_grid: A must be positive and finite");
  if (n < 1) throw UsageError("build_grid: n must be at least 1");
  if (d < 1) throw UsageError("build_grid: d must be at least 1");
  for (int i = 0; i < d; ++i) count_ *= static_cast<std::size_t>(2 * n);
}

double GridPartition::cell_volume() const noexcept { return std::pow(cell_side(), d_); }

std::vector<int> GridPartition::multi_index(std::size_t cell) const {
  std::vector<int> k(static_cast<std::size_t>(d_));
  const auto side = static_cast<std::size_t>(2 * n_);
  for (int i = d_ - 1; i >= 0; --i) {
    k[static_cast<std::size_t>(i)] = static_cast<int>(cell % side) - n_;
    cell /= side;
  }
  return k;
}

Point GridPartition::node(std::size_t cell) const {
  const auto k = multi_index(cell);
  Point x(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) x[i] = k[i] * A_ / n_;
  return x;
}

Box GridPartition::cell(std::size_t cell) const {
  const auto k = multi_index(cell);
  Box b{std::vector<double>(k.size()), std::vector<double>(k.size())};
  for (std::size_t i = 0; i < k.size(); ++i) {
    b.lo[i] = k[i] * A_ / n_;
    b.hi[i] = (k[i] + 1) * A_ / n_;
  }
  return b;
}

std::size_t GridPartition::locate(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(d_)) throw UsageError("locate: dimension mismatch");
  std::size_t index = 0;
  const auto side = static_cast<std::size_t>(2 * n_);
  for (int i = 0; i < d_; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    if (!(xi >= -A_ && xi < A_)) return count_;
    auto k = static_cast<long>(std::floor(xi * n_ / A_));
    // Guard against rounding at cell edges so that lo <= x < hi holds.
    if (k * A_ / n_ > xi) --k;
    else if ((k + 1) * A_ / n_ <= xi) ++k;
    k = std::clamp<long>(k, -n_, n_ - 1);
    index = index * side + static_cast<std::size_t>(k + n_);
  }
  return index;
}

GridPartition build_grid(double A, int n, int d) { return GridPartition(A, n, d); }

struct StepPlan::Rows {
  explicit Rows(std::size_t n) : flags(new std::once_flag[n]), data(n) {}
  std::unique_ptr<std::once_flag[]> flags;
  std::vector<std::vector<double>> data;
};

StepPlan::StepPlan(GridPartition grid, KernelSpec kernel, std::vector<Point> targets)
    : grid_(std::move(grid)),
      kernel_(std::move(kernel)),
      targets_(std::move(targets)),
      rows_(std::make_shared<Rows>(targets_.size())) {
  if (kernel_.dim_domain != grid_.dim())
    throw UsageError("StepPlan: kernel and grid dimensions differ");
  for (const auto& t : targets_)
    if (t.size() != static_cast<std::size_t>(kernel_.dim_index))
      throw UsageError("StepPlan: target dimension mismatch");
}

const std::vector<double>& StepPlan::weights(std::size_t target) const {
  std::call_once(rows_->flags[target], [&] {
    auto& row = rows_->data[target];
    row.resize(grid_.size());
    for (std::size_t c = 0; c < grid_.size(); ++c) {
      const Point x = grid_.node(c);
      row[c] = eval_kernel(kernel_, targets_[target], x);
    }
  });
  return rows_->data[target];
}

void StepPlan::prepare() const {
  for (std::size_t i = 0; i < targets_.size(); ++i) weights(i);
}

double StepPlan::approximant(std::size_t target, std::span<const double> x) const {
  const std::size_t c = grid_.locate(x);
  if (c == grid_.size()) return 0.0;
  return weights(target)[c];
}

std::vector<double> combine_step(const StepPlan& plan, std::span<const double> increments) {
  if (increments.size() != plan.grid().size())
    throw UsageError("combine_step: one increment per cell expected");
  std::vector<double> values(plan.targets().size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& w = plan.weights(i);
    double acc = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) acc += w[c] * increments[c];
    values[i] = acc;
  }
  return values;
}

FieldRealization synthesize_step(const StepPlan& plan, const MeasureSpec& m, const RngStream& rng) {
  using clock = std::chrono::steady_clock;
  FieldRealization out;
  const auto t0 = clock::now();
  plan.prepare();
  const auto t1 = clock::now();
  const auto increments =
      sample_equal_cells(m, plan.grid().size(), plan.grid().cell_volume(), rng);
  out.values = combine_step(plan, increments);
  const auto t2 = clock::now();
  out.method = "step";
  out.measure = describe(m);
  out.kernel = plan.kernel().id;
  out.n = plan.grid().resolution();
  out.seed = rng.seed();
  out.stream = rng.stream_id();
  out.counters.summands = plan.grid().size();
  out.counters.random_variables = plan.grid().size();
  out.coefficient_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  out.synthesis_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
  return out;
}

namespace {

void check_bound_args(double C, double gamma, double A, int d, double s, int n) {
  if (!(s > 0.0 && s <= 2.0)) throw UsageError("step bound: s must lie in (0, 2]");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw UsageError("step bound: gamma must lie in (0, 1]");
  if (!(C > 0.0) || !(A > 0.0)) throw UsageError("step bound: C and A must be positive");
  if (d < 1 || n < 1) throw UsageError("step bound: d and n must be at least 1");
}

}  // namespace

double bound_holder(double C, double gamma, double A, int d, double s, int n,
                    const BoundOptions& options) {
  check_bound_args(C, gamma, A, d, s, n);
  const double base = std::ldexp(C * d, d) / (1.0 + gamma * s);
  return std::sqrt(options.control_factor) * std::pow(base, 1.0 / s) *
         std::pow(A, gamma + d / s) * std::pow(1.0 / n, gamma);
}

double polar_constant(int d, double s) {
  using boost::math::tgamma;
  constexpr double pi = std::numbers::pi;
  switch (d) {
    case 2: return 1.0;
    case 3: return std::pow(2.0, 1.0 / s);
    case 4: return std::pow(pi, 1.0 / s);
    default: break;
  }
  if (d < 2) throw UsageError("polar bound needs d >= 2");
  const double g32 = tgamma(1.5);
  if (d % 2 == 1) return std::pow(std::pow(pi, d - 3) * g32 / tgamma(d / 2.0), 1.0 / s);
  return std::pow(std::pow(pi, d - 3.5) * g32 / tgamma((d - 1) / 2.0), 1.0 / s);
}

double bound_polar(double C, double gamma, double A, int d, double s, int n,
                   const BoundOptions& options) {
  if (d < 2) throw UsageError("bound_polar: unsupported for d = 1");
  check_bound_args(C, gamma, A, d, s, n);
  const double gs = gamma * s;
  const double base =
      std::ldexp(C, d) * (std::numbers::pi / 2.0) * std::pow(d, (gs + d) / 2.0) / (gs + d);
  return std::sqrt(options.control_factor) * std::pow(base, 1.0 / s) *
         std::pow(A, gamma + d / s) * std::pow(1.0 / n, gamma) * polar_constant(d, s);
}

bool holder_beats_polar(int d, double gamma, double s) {
  const double gs = gamma * s;
  const double lhs = (std::numbers::pi / 2.0) * std::pow(d, (gs + d) / 2.0 - 1.0) *
                     std::pow(polar_constant(d, s), s) * (1.0 + gs) / (gs + d);
  return lhs >= 1.0;
}

int min_n_for_eps(double C, double gamma, double A, int d, double s, double eps,
                  const BoundOptions& options) {
  if (!(eps > 0.0)) throw UsageError("min_n_for_eps: eps must be positive");
  const double K = bound_holder(C, gamma, A, d, s, 1, options);
  const double guess = std::ceil(std::pow(K / eps, 1.0 / gamma));
  if (guess > 1e9) throw UsageError("min_n_for_eps: resolution would exceed 1e9 cells per axis");
  int n = std::max(1, static_cast<int>(guess));
  while (bound_holder(C, gamma, A, d, s, n, options) > eps) ++n;
  while (n > 1 && bound_holder(C, gamma, A, d, s, n - 1, options) <= eps) --n;
  return n;
}

}  // namespace idfield
