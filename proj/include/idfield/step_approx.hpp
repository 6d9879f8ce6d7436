#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "idfield/field.hpp"
#include "idfield/geometry.hpp"
#include "idfield/kernels.hpp"
#include "idfield/measures.hpp"
#include "idfield/rng.hpp"

namespace idfield {

/// Regular partition of [-A, A)^d into (2n)^d half-open cells of side A/n.
///
/// Cells are numbered lexicographically with the first coordinate most
/// significant; multi-index k_i runs over -n..n-1 and the node xi_k is the
/// lower-left corner k * A / n.
class GridPartition {
 public:
  GridPartition(double A, int n, int d);

  double halfwidth() const noexcept { return A_; }
  int resolution() const noexcept { return n_; }
  int dim() const noexcept { return d_; }
  std::size_t size() const noexcept { return count_; }
  double cell_side() const noexcept { return A_ / n_; }
  double cell_volume() const noexcept;

  std::vector<int> multi_index(std::size_t cell) const;
  Point node(std::size_t cell) const;
  Box cell(std::size_t cell) const;
  // Index of the cell containing x, or size() if x is outside [-A, A)^d.
  std::size_t locate(std::span<const double> x) const;

 private:
  double A_;
  int n_;
  int d_;
  std::size_t count_;
};

GridPartition build_grid(double A, int n, int d);

/// Step approximation of one kernel on one grid.
///
/// Weight rows f_t(xi_k) are computed on first use per target and kept for
/// later realizations; rows are immutable once built, so concurrent
/// synthesize_step calls are safe.
class StepPlan {
 public:
  StepPlan(GridPartition grid, KernelSpec kernel, std::vector<Point> targets);

  const GridPartition& grid() const noexcept { return grid_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  const std::vector<Point>& targets() const noexcept { return targets_; }

  const std::vector<double>& weights(std::size_t target) const;
  // Builds every row now (used to time the setup phase separately).
  void prepare() const;
  // The piecewise-constant approximant of f_t.
  double approximant(std::size_t target, std::span<const double> x) const;

 private:
  GridPartition grid_;
  KernelSpec kernel_;
  std::vector<Point> targets_;
  struct Rows;
  std::shared_ptr<Rows> rows_;
};

/// One realization: a single Lambda draw per cell shared by all targets.
FieldRealization synthesize_step(const StepPlan& plan, const MeasureSpec& m, const RngStream& rng);

// Field from precomputed cell increments, in cell order.
std::vector<double> combine_step(const StepPlan& plan, std::span<const double> increments);

struct BoundOptions {
  // Control measure c * Lebesgue scales the bound by sqrt(c).
  double control_factor = 1.0;
};

double bound_holder(double C, double gamma, double A, int d, double s, int n,
                    const BoundOptions& options = {});

// The polar-coordinate constant D(d, s); d >= 2.
double polar_constant(int d, double s);
double bound_polar(double C, double gamma, double A, int d, double s, int n,
                   const BoundOptions& options = {});
// True when the Hoelder bound beats the polar one for these (gamma, s).
bool holder_beats_polar(int d, double gamma, double s);

int min_n_for_eps(double C, double gamma, double A, int d, double s, double eps,
                  const BoundOptions& options = {});

}  // namespace idfield
