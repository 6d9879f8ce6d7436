#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "idfield/geometry.hpp"

namespace idfield {

using KernelFn = std::function<double(std::span<const double> t, std::span<const double> x)>;
using CellRule = std::function<double(std::span<const double> t, const Box& box)>;

struct HolderData {
  double constant;  // C_t
  double exponent;  // gamma_t in (0, 1]
};

/// A kernel family f_t on R^d indexed by t in R^q.
///
/// `eval` may ignore the support box; eval_kernel() enforces it. `id` should
/// change whenever any parameter changes since the coefficient cache keys on
/// it.
struct KernelSpec {
  std::string id;
  KernelFn eval;
  double support_halfwidth = std::numeric_limits<double>::infinity();
  int dim_domain = 2;
  int dim_index = 2;
  std::optional<HolderData> holder;
  std::optional<double> sup_bound;
  std::optional<double> grad_bound;
  CellRule exact_cell_integral;  // empty when no closed form is known

  Box support() const { return Box::cube(support_halfwidth, static_cast<std::size_t>(dim_domain)); }
};

// Kernels below are radial bumps centred at t; q = d.
KernelSpec epanechnikov(double a, double b, double support_halfwidth, int dim = 2);
KernelSpec pyramid(double a, double b, double support_halfwidth, int dim = 2);
// Unbounded support unless `support_halfwidth` is given.
KernelSpec gaussian_bell(double a, double b, int dim = 2,
                         double support_halfwidth = std::numeric_limits<double>::infinity());

// Restricts a kernel to [-A, A]^d.
KernelSpec truncate(KernelSpec kernel, double support_halfwidth);

/// Builds a builtin kernel by config name (`epanechnikov`, `pyramid`,
/// `gaussian_bell`) from keys `a`, `b`, `support_halfwidth`.
KernelSpec make_kernel(const std::string& name, const std::map<std::string, double>& params,
                       int dim = 2);

// f_t(x), zero outside the support box.
double eval_kernel(const KernelSpec& kernel, std::span<const double> t, std::span<const double> x);

enum class CellQuadrature { gauss_kronrod, midpoint_richardson };

struct CellIntegralOptions {
  double tolerance = 1e-10;  // absolute
  bool use_exact = true;
  CellQuadrature method = CellQuadrature::gauss_kronrod;
  int max_depth = 12;                        // midpoint_richardson
  std::size_t max_evaluations = 20'000'000;  // gauss_kronrod
};

/// Integral of f_t over an axis-aligned box inside the support.
///
/// Uses the kernel's closed form when there is one, otherwise adaptive
/// cubature to `tolerance`. The midpoint-Richardson option is cheaper but
/// its error estimate can miss kinks that sit near dyadic sample points.
/// Throws NumericalError when the refinement budget runs out.
double cell_integral(const KernelSpec& kernel, std::span<const double> t, const Box& box,
                     const CellIntegralOptions& options = {});

struct EffectiveBoxOptions {
  double initial_halfwidth = 1.0 / 16.0;
  double ceiling = 1e6;
  int max_shells = 60;
};

struct EffectiveBox {
  double halfwidth;
  double tail;  // (int_{outside} |f_t|^s)^{1/s}
};

/// Doubling search for K with (int_{R^d \ [-K,K]^d} |f_t|^s)^{1/s} <= eps_tail.
///
/// Throws NumericalError carrying the last tail estimate when no K below the
/// ceiling qualifies.
EffectiveBox effective_box(const KernelSpec& kernel, double s, double eps_tail,
                           std::span<const double> t, const EffectiveBoxOptions& options = {});

// L^s norm of the tail outside [-K, K]^d, by shells.
double tail_norm(const KernelSpec& kernel, double s, double halfwidth, std::span<const double> t,
                 int max_shells = 60);

}  // namespace idfield
