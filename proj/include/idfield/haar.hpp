#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idfield/field.hpp"
#include "idfield/geometry.hpp"
#include "idfield/kernels.hpp"
#include "idfield/measures.hpp"
#include "idfield/rng.hpp"

namespace idfield {

/// Haar basis function on [-A, A]^d.
///
/// A detail function at level k lives on the dyadic box of side 2A / 2^k
/// whose position along axis i is `offset[i]` in 0..2^k-1 (the usual j_i
/// minus 2^k). Bit (d-1-i) of `e` selects the mother wavelet along axis i,
/// so comparing `e` numerically orders it lexicographically.
struct HaarIndex {
  bool father = true;
  std::uint32_t e = 0;
  int level = 0;
  std::vector<int> offset;

  static HaarIndex father_index() { return {}; }
  static HaarIndex detail(std::uint32_t e, int level, std::vector<int> offset) {
    return {false, e, level, std::move(offset)};
  }
  bool operator==(const HaarIndex&) const = default;
};

// Coefficients are stored flat: the Father at 0, then level k occupying
// [2^{kd}, 2^{(k+1)d}) ordered by (e, offset) lexicographically. A position
// therefore does not depend on the finest level.
std::size_t flat_position(const HaarIndex& idx, int d);
HaarIndex index_at(std::size_t position, int d);
// Number of coefficients up to and including detail level n.
std::size_t coefficient_count(int n, int d);

double psi_eval(const HaarIndex& idx, std::span<const double> x, double A, int d);
// ||Psi||_{L^s}; the Father uses level -1 conventions.
double psi_norm(const HaarIndex& idx, double s, double A, int d);
double psi_norm_at_level(int level, double s, double A, int d);
// Support box of a basis function.
Box psi_support(const HaarIndex& idx, double A, int d);

struct CoefficientSet {
  Point target;
  int level = 0;  // finest detail level n
  int dim = 0;
  double halfwidth = 0.0;
  double delta = 0.0;  // precision of the scaled FWT inputs, 0 when exact
  bool exact = false;
  std::vector<double> values;  // flat layout, coefficient_count(level, dim) entries

  double at(const HaarIndex& idx) const { return values.at(flat_position(idx, dim)); }
};

/// Forward transform of 2^{(n+1)d} scaled cell integrals, ordered
/// lexicographically over the finest cells (first axis most significant).
std::vector<double> forward_fwt(std::span<const double> input, int n, int d);
// Inverse of forward_fwt.
std::vector<double> inverse_fwt(std::span<const double> coefficients, int n, int d);

CoefficientSet make_coefficient_set(std::span<const double> input, int n, int d, double A);

// Side length of the finest cells for cut level n.
inline double finest_side(double A, int n) { return 2.0 * A / static_cast<double>(1u << (n + 1)); }
// Finest cell by lexicographic index.
Box finest_cell(std::size_t index, int n, int d, double A);
// 2^{(n+1)d/2} / (2A)^{d/2}: scales a cell integral into an FWT input.
double input_scale(int n, int d, double A);

/// Precision for each scaled FWT input so that the transform error stays
/// below eps2 in L^s. With `conservative`, the s = 1 case takes the smaller
/// of the two published variants.
double fwt_input_precision(double s, int d, int n, double A, double eps2,
                           bool conservative = false);
// Worst-case error of one coefficient at `level` (-1 for the Father) when
// every input carries error delta.
double coefficient_error_budget(int level, int n, int d, double delta);

/// Coefficients of f_t up to level n from cell integrals. Raw integrals are
/// computed to delta * (2A)^{d/2} / 2^{(n+1)d/2}; delta = 0 requires an
/// exact cell rule.
CoefficientSet compute_coefficients(const KernelSpec& kernel, std::span<const double> t, int n,
                                    double A, double delta);

// (f_t, Psi) by adaptive cubature on the 2^d pieces where Psi is constant.
double inner_product(const KernelSpec& kernel, std::span<const double> t, const HaarIndex& idx,
                     double A, double tol);

enum class CutoffMode { bounded, holder, differentiable };
CutoffMode parse_cutoff_mode(const std::string& name);
std::string to_string(CutoffMode mode);

/// Cut-off bound K * ratio^{-k} on ||f_t - f_cut^{(k)}||_{L^s}.
struct CutoffBound {
  double constant = 0.0;
  double ratio = 1.0;
  int level = 0;  // smallest level with bound(level) <= eps1

  double at(int k) const;
};

CutoffBound cutoff_bound(double s, int d, double A, CutoffMode mode, double sup_bound,
                         double holder_constant, double holder_exponent);
// Kernel-metadata front end; also picks the minimal level for eps1.
CutoffBound cutoff_level(const KernelSpec& kernel, double s, double A, double eps1,
                         CutoffMode mode);

struct Selection {
  std::vector<std::size_t> positions;  // flat coefficient positions, largest first
  std::vector<double> coefficients;
  double total = 0.0;      // C (for s < 1: sum of a_i^s)
  double discarded = 0.0;  // sum over dropped a_i (a_i^s for s < 1)
};

/// Minimal prefix of summands sorted by |coef| * ||Psi||_{L^s} whose
/// discarded tail fits into eps1 - eps_star (in s-th powers when s < 1).
Selection nbest_select(const CoefficientSet& coeffs, double s, double eps1, double eps_star);

/// Piecewise-constant function on the 2^{(n+1)d} finest cells.
struct PiecewiseConstant {
  double halfwidth = 0.0;
  int level = 0;
  int dim = 0;
  std::vector<double> values;

  double operator()(std::span<const double> x) const;
};

PiecewiseConstant reconstruct(const CoefficientSet& coeffs,
                              std::span<const std::size_t> positions);
PiecewiseConstant reconstruct_all(const CoefficientSet& coeffs, int max_level);

class CoefficientCache;

struct WaveletOptions {
  double s = 2.0;
  double epsilon = 1.0;
  double split = 0.99;  // eps1 share of eps (of eps^s when s < 1)
  int extra_levels = 0;
  CutoffMode mode = CutoffMode::holder;
  bool conservative_delta = false;
  std::optional<int> fixed_level;  // skip the cut-off rule
};

struct TargetPlan {
  Point target;
  int base_level = 0;  // m_t
  double eps_star = 0.0;
  double delta = 0.0;
  std::shared_ptr<const CoefficientSet> coefficients;
  Selection selection;
};

struct WaveletPlan {
  KernelSpec kernel;
  double halfwidth = 0.0;
  int dim = 0;
  WaveletOptions options;
  double eps1 = 0.0;
  double eps2 = 0.0;
  int finest_level = 0;  // z
  std::vector<TargetPlan> targets;
  double build_ms = 0.0;
};

// eps1, eps2 from eps, split and s.
std::pair<double, double> split_epsilon(double eps, double split, double s);

WaveletPlan build_wavelet_plan(const KernelSpec& kernel, const std::vector<Point>& targets,
                               const WaveletOptions& options, CoefficientCache* cache = nullptr);

// All integrals of basis functions up to level z against the cell increments.
std::vector<double> wavelet_integrals(std::span<const double> increments, int z, int d, double A);

FieldRealization synthesize_wavelet(const WaveletPlan& plan, const MeasureSpec& m,
                                    const RngStream& rng);

}  // namespace idfield
