#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "idfield/geometry.hpp"

namespace idfield {

using Integrand = std::function<double(std::span<const double>)>;

struct CubatureOptions {
  double abs_tol = 0.0;
  double rel_tol = 1e-8;
  std::size_t max_evaluations = 50'000'000;
  // Uniform pre-split per axis; use it to align region edges with known
  // breakpoints of the integrand.
  std::size_t initial_divisions = 1;
};

struct CubatureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Globally adaptive tensor Gauss-Kronrod (3/7) cubature over a box.
///
/// Each region's value is the 7-point rule summed over its 2^d halves; its
/// error is the larger of the Gauss-Kronrod differences and the change from
/// the undivided rule. Regions are kept in a max-heap keyed by that error
/// and the worst region is bisected along every axis until the summed error drops
/// below max(abs_tol, rel_tol * |value|) or the evaluation budget runs out.
/// Never throws on non-convergence; check `converged`.
CubatureResult adaptive_cubature(const Integrand& f, const Box& box,
                                 const CubatureOptions& options = {});

struct MidpointResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

/// Locally adaptive midpoint rule with Richardson extrapolation.
///
/// On each box the one-point midpoint value is compared with the 2^d
/// child-midpoint sum; the extrapolated value M2 + (M2 - M1)/3 is accepted
/// when |M2 - M1|/3 is within the box's share of `abs_tol`, otherwise the
/// box is split and each child gets tol / 2^d.
MidpointResult midpoint_richardson(const Integrand& f, const Box& box, double abs_tol,
                                   int max_depth = 12);

// One-dimensional adaptive Gauss-Kronrod (15 point) on [a, b].
double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    double rel_tol = 1e-12, double* error = nullptr);

}  // namespace idfield
