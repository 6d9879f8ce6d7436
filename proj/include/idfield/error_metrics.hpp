#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "idfield/geometry.hpp"
#include "idfield/measures.hpp"

namespace idfield {

using Function = std::function<double(std::span<const double>)>;

struct ErrOptions {
  double rel_tol = 1e-6;
  double abs_tol = 0.0;
  // Per-axis pre-split of the box; set it to the approximant's cell count so
  // no quadrature region straddles a jump.
  std::size_t initial_divisions = 1;
  std::size_t max_evaluations = 100'000'000;
};

struct ErrReport {
  double s = 0.0;
  double value = 0.0;
  // Bracket half-width on `value` implied by the quadrature error estimate.
  double achieved_tolerance = 0.0;
  std::size_t evaluations = 0;
  std::optional<double> sigma;        // scale of the error variable (stable)
  std::optional<double> c_constant;   // c_{alpha,beta_t}(p)
  std::optional<double> abs_moment;   // (E|X - X~|^p)^{1/p}
};

/// (int_box |f - g|^s)^{1/s} by adaptive cubature. Throws NumericalError
/// with the best estimate if the tolerance is not met.
ErrReport err_s(const Function& f, const Function& g, double s, const Box& box,
                const ErrOptions& options = {});

// Err_alpha of a stable field is the scale of the error variable.
double stable_error_scale(const ErrReport& err, double alpha);

// int_0^inf u^{-p-1} sin^2(u) du for 0 < p < 2.
double sine_integral(double p);

/// c_{alpha,beta}(p) with E|Z|^p = c^p sigma^p for Z ~ S_alpha(sigma, beta, 0).
double c_constant(double alpha, double beta, double p);

// Skewness of the error variable for constant beta; nullopt when f = g a.e.
std::optional<double> beta_t_effective(const Function& f, const Function& g, double beta,
                                       double alpha, const Box& box,
                                       const ErrOptions& options = {});

// Err_{3/2}, the error measure for alpha = 1 with beta != 0.
ErrReport err_alpha1_skewed(const Function& f, const Function& g, const Box& box,
                            const ErrOptions& options = {});

// max(sqrt(x), x sqrt(x)), which dominates |x ln x| on (0, inf).
double xlogx_envelope(double x);

// E|X - X~| <= intensity * int |f - g| for Poisson shot noise.
double campbell_bound(const Function& f, const Function& g, double intensity, const Box& box,
                      const ErrOptions& options = {});

/// (c1 + c2)^{1/2} * err2 with c1 = sup Var L' and c2 = int (E L')^2 over
/// the box. Throws UsageError when the spot variable has no second moment.
double second_moment_bound(const std::optional<SpotVariable>& spot, const Box& box, double err2);

/// ||sum w_i f_i||_p^p <= sum |w_i|^p ||f_i||_p^p for p <= 1, Minkowski
/// for p > 1. Returns whether the inequality held (with quadrature slack).
bool subadditivity_check(std::span<const Function> fs, std::span<const double> weights, double p,
                         const Box& box, const ErrOptions& options = {});

}  // namespace idfield
