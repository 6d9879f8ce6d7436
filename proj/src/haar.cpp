#include "idfield/haar.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "idfield/coefficient_cache.hpp"
#include "idfield/errors.hpp"
#include "idfield/quadrature.hpp"

namespace idfield {
namespace {

void check_dim(int d) {
  if (d < 1 || d > 8) throw UsageError("haar: dimension must lie in 1..8");
}

int level_of(std::size_t position, int d) {
  if (position == 0) return -1;
  int k = 0;
  while ((std::size_t{1} << ((k + 1) * d)) <= position) ++k;
  return k;
}

// In-place Walsh-Hadamard butterfly: h[e] = sum_b (-1)^{popcount(e & b)} h[b].
void walsh_hadamard(std::span<double> h) {
  for (std::size_t half = 1; half < h.size(); half <<= 1) {
    for (std::size_t i = 0; i < h.size(); i += 2 * half) {
      for (std::size_t j = i; j < i + half; ++j) {
        const double x = h[j];
        const double y = h[j + half];
        h[j] = x + y;
        h[j + half] = x - y;
      }
    }
  }
}

// Offsets of the 2^d children of a parent block in a grid with `side`
// cells per axis, indexed by the child bitmask b.
std::vector<std::size_t> child_offsets(std::size_t side, int d) {
  std::vector<std::size_t> offsets(std::size_t{1} << d, 0);
  for (std::size_t b = 0; b < offsets.size(); ++b) {
    std::size_t off = 0;
    for (int i = 0; i < d; ++i) off = off * side + ((b >> (d - 1 - i)) & 1u);
    offsets[b] = off;
  }
  return offsets;
}

// Lexicographic index of the first child of parent P in the child grid.
std::size_t first_child(std::size_t parent, std::size_t parent_side, int d) {
  std::size_t index = 0;
  std::size_t stride = 1;
  for (int i = d - 1; i >= 0; --i) {
    const std::size_t p = parent % parent_side;
    parent /= parent_side;
    index += 2 * p * stride;
    stride *= 2 * parent_side;
  }
  return index;
}

}  // namespace

std::size_t coefficient_count(int n, int d) {
  check_dim(d);
  if (n < 0) return 1;
  return std::size_t{1} << ((n + 1) * d);
}

std::size_t flat_position(const HaarIndex& idx, int d) {
  check_dim(d);
  if (idx.father) return 0;
  const std::size_t side = std::size_t{1} << idx.level;
  if (idx.level < 0 || idx.e == 0 || idx.e >= (1u << d) ||
      idx.offset.size() != static_cast<std::size_t>(d)) {
    throw UsageError("HaarIndex: invalid detail index");
  }
  std::size_t lin = 0;
  for (int j : idx.offset) {
    if (j < 0 || static_cast<std::size_t>(j) >= side)
      throw UsageError("HaarIndex: translation out of range");
    lin = lin * side + static_cast<std::size_t>(j);
  }
  return (static_cast<std::size_t>(idx.e) << (idx.level * d)) + lin;
}

HaarIndex index_at(std::size_t position, int d) {
  check_dim(d);
  if (position == 0) return HaarIndex::father_index();
  const int k = level_of(position, d);
  const std::size_t side = std::size_t{1} << k;
  const auto e = static_cast<std::uint32_t>(position >> (k * d));
  std::size_t lin = position & ((std::size_t{1} << (k * d)) - 1);
  std::vector<int> offset(static_cast<std::size_t>(d));
  for (int i = d - 1; i >= 0; --i) {
    offset[static_cast<std::size_t>(i)] = static_cast<int>(lin % side);
    lin /= side;
  }
  return HaarIndex::detail(e, k, std::move(offset));
}

double psi_eval(const HaarIndex& idx, std::span<const double> x, double A, int d) {
  check_dim(d);
  if (x.size() != static_cast<std::size_t>(d)) throw UsageError("psi_eval: dimension mismatch");
  const double base = std::pow(2.0 * A, -d / 2.0);
  if (idx.father) return base;
  flat_position(idx, d);  // validates
  const double side = 2.0 * A / static_cast<double>(1u << idx.level);
  double sign = 1.0;
  for (int i = 0; i < d; ++i) {
    const double u = (x[static_cast<std::size_t>(i)] + A) / side - idx.offset[static_cast<std::size_t>(i)];
    if (!(u >= 0.0 && u < 1.0)) return 0.0;
    if (((idx.e >> (d - 1 - i)) & 1u) && u >= 0.5) sign = -sign;
  }
  return sign * std::pow(2.0, idx.level * d / 2.0) * base;
}

double psi_norm_at_level(int level, double s, double A, int d) {
  const int k = std::max(level, 0);
  return std::pow(2.0, k * d / 2.0) * std::pow(2.0 * A, d / s - d / 2.0) *
         std::pow(2.0, -k * d / s);
}

double psi_norm(const HaarIndex& idx, double s, double A, int d) {
  return psi_norm_at_level(idx.father ? -1 : idx.level, s, A, d);
}

Box psi_support(const HaarIndex& idx, double A, int d) {
  if (idx.father) return Box::cube(A, static_cast<std::size_t>(d));
  const double side = 2.0 * A / static_cast<double>(1u << idx.level);
  Box b{std::vector<double>(static_cast<std::size_t>(d)), std::vector<double>(static_cast<std::size_t>(d))};
  for (std::size_t i = 0; i < b.lo.size(); ++i) {
    b.lo[i] = -A + side * idx.offset[i];
    b.hi[i] = b.lo[i] + side;
  }
  return b;
}

std::vector<double> forward_fwt(std::span<const double> input, int n, int d) {
  check_dim(d);
  if (n < 0) throw UsageError("forward_fwt: level must be nonnegative");
  const std::size_t total = coefficient_count(n, d);
  if (input.size() != total) throw UsageError("forward_fwt: input length must be 2^{(n+1)d}");
  const std::size_t children = std::size_t{1} << d;
  const double norm = std::pow(2.0, -d / 2.0);
  std::vector<double> out(total);
  std::vector<double> cur(input.begin(), input.end());
  std::vector<double> next;
  std::vector<double> block(children);
  for (int k = n; k >= 0; --k) {
    const std::size_t parent_side = std::size_t{1} << k;
    const std::size_t parents = std::size_t{1} << (k * d);
    const auto offsets = child_offsets(2 * parent_side, d);
    next.assign(parents, 0.0);
    for (std::size_t p = 0; p < parents; ++p) {
      const std::size_t base = first_child(p, parent_side, d);
      for (std::size_t b = 0; b < children; ++b) block[b] = cur[base + offsets[b]];
      walsh_hadamard(block);
      next[p] = norm * block[0];
      for (std::size_t e = 1; e < children; ++e) out[(e << (k * d)) + p] = norm * block[e];
    }
    cur.swap(next);
  }
  out[0] = cur[0];
  return out;
}

std::vector<double> inverse_fwt(std::span<const double> coefficients, int n, int d) {
  check_dim(d);
  if (n < 0) throw UsageError("inverse_fwt: level must be nonnegative");
  const std::size_t total = coefficient_count(n, d);
  if (coefficients.size() != total) throw UsageError("inverse_fwt: length must be 2^{(n+1)d}");
  const std::size_t children = std::size_t{1} << d;
  const double norm = std::pow(2.0, -d / 2.0);
  std::vector<double> cur{coefficients[0]};
  std::vector<double> next;
  std::vector<double> block(children);
  for (int k = 0; k <= n; ++k) {
    const std::size_t parent_side = std::size_t{1} << k;
    const std::size_t parents = std::size_t{1} << (k * d);
    const auto offsets = child_offsets(2 * parent_side, d);
    next.assign(parents * children, 0.0);
    for (std::size_t p = 0; p < parents; ++p) {
      block[0] = cur[p];
      for (std::size_t e = 1; e < children; ++e) block[e] = coefficients[(e << (k * d)) + p];
      walsh_hadamard(block);
      const std::size_t base = first_child(p, parent_side, d);
      for (std::size_t b = 0; b < children; ++b) next[base + offsets[b]] = norm * block[b];
    }
    cur.swap(next);
  }
  return cur;
}

CoefficientSet make_coefficient_set(std::span<const double> input, int n, int d, double A) {
  CoefficientSet c;
  c.level = n;
  c.dim = d;
  c.halfwidth = A;
  c.values = forward_fwt(input, n, d);
  return c;
}

Box finest_cell(std::size_t index, int n, int d, double A) {
  const std::size_t side_count = std::size_t{1} << (n + 1);
  const double side = finest_side(A, n);
  Box b{std::vector<double>(static_cast<std::size_t>(d)), std::vector<double>(static_cast<std::size_t>(d))};
  for (int i = d - 1; i >= 0; --i) {
    const auto k = static_cast<double>(index % side_count);
    index /= side_count;
    b.lo[static_cast<std::size_t>(i)] = -A + k * side;
    b.hi[static_cast<std::size_t>(i)] = -A + (k + 1.0) * side;
  }
  return b;
}

double input_scale(int n, int d, double A) {
  return std::pow(2.0, (n + 1) * d / 2.0) / std::pow(2.0 * A, d / 2.0);
}

double fwt_input_precision(double s, int d, int n, double A, double eps2, bool conservative) {
  if (!(eps2 > 0.0)) throw UsageError("fwt_input_precision: eps2 must be positive");
  if (!(s > 0.0)) throw UsageError("fwt_input_precision: s must be positive");
  const double cells = std::pow(2.0, (n + 1) * d / 2.0);
  const double details = std::ldexp(1.0, d) - 1.0;
  const double m = n + 1.0;
  if (s > 1.0) {
    const double r = d - d / s;
    const double bracket = 1.0 + details * (std::pow(2.0, r * m) - 1.0) / (std::pow(2.0, r) - 1.0);
    return eps2 / (std::pow(2.0 * A, d / s - d / 2.0) * cells * bracket);
  }
  if (s == 1.0) {
    const double eq = eps2 / (std::pow(2.0 * A, d / 2.0) * cells * (1.0 + details * m));
    if (!conservative) return eq;
    const double r = -d / 2.0;
    const double bracket = 1.0 + details * (std::pow(2.0, r * m) - 1.0) / (std::pow(2.0, r) - 1.0);
    const double table = eps2 / (std::pow(2.0 * A, d) * cells * bracket);
    return std::min(eq, table);
  }
  const double r = d * s - d;
  const double bracket = 1.0 + details * (std::pow(2.0, r * m) - 1.0) / (std::pow(2.0, r) - 1.0);
  return eps2 / (std::pow(2.0 * A, d / s - d / 2.0) * cells * std::pow(bracket, 1.0 / s));
}

double coefficient_error_budget(int level, int n, int d, double delta) {
  const int k = std::max(level, 0);
  return std::pow(2.0, (n + 1) * d / 2.0) * std::pow(2.0, k * d / 2.0) * delta;
}

CoefficientSet compute_coefficients(const KernelSpec& kernel, std::span<const double> t, int n,
                                    double A, double delta) {
  const int d = kernel.dim_domain;
  check_dim(d);
  if (n < 0) throw UsageError("compute_coefficients: level must be nonnegative");
  const bool exact = static_cast<bool>(kernel.exact_cell_integral);
  if (!exact && !(delta > 0.0))
    throw UsageError("compute_coefficients: positive delta required without an exact cell rule");
  const std::size_t count = coefficient_count(n, d);
  const double scale = input_scale(n, d, A);
  CellIntegralOptions opt;
  opt.tolerance = exact ? 0.0 : delta / scale;
  std::vector<double> input(count);
  for (std::size_t c = 0; c < count; ++c)
    input[c] = scale * cell_integral(kernel, t, finest_cell(c, n, d, A), opt);
  CoefficientSet set = make_coefficient_set(input, n, d, A);
  set.target.assign(t.begin(), t.end());
  set.delta = delta;
  set.exact = exact;
  return set;
}

double inner_product(const KernelSpec& kernel, std::span<const double> t, const HaarIndex& idx,
                     double A, double tol) {
  const int d = kernel.dim_domain;
  const Box support = psi_support(idx, A, d);
  const double height = std::abs(psi_eval(idx, support.center(), A, d));
  const Integrand f = [&](std::span<const double> x) { return eval_kernel(kernel, t, x); };
  CubatureOptions opt;
  opt.rel_tol = 0.0;
  opt.abs_tol = tol / height;
  if (idx.father) return height * adaptive_cubature(f, support, opt).value;
  const std::size_t pieces = std::size_t{1} << d;
  opt.abs_tol /= static_cast<double>(pieces);
  double sum = 0.0;
  for (std::size_t b = 0; b < pieces; ++b) {
    Box piece = support;
    int sign = 1;
    for (int i = 0; i < d; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const double mid = 0.5 * (support.lo[ui] + support.hi[ui]);
      const bool right = (b >> (d - 1 - i)) & 1u;
      if (right) piece.lo[ui] = mid;
      else piece.hi[ui] = mid;
      if (right && ((idx.e >> (d - 1 - i)) & 1u)) sign = -sign;
    }
    const CubatureResult r = adaptive_cubature(f, piece, opt);
    if (!r.converged) throw NumericalError("inner_product: cubature did not converge", r.value, r.error);
    sum += sign * r.value;
  }
  return height * sum;
}

CutoffMode parse_cutoff_mode(const std::string& name) {
  if (name == "bounded") return CutoffMode::bounded;
  if (name == "holder") return CutoffMode::holder;
  if (name == "differentiable") return CutoffMode::differentiable;
  throw UsageError("unknown cut-off mode '" + name + "'");
}

std::string to_string(CutoffMode mode) {
  switch (mode) {
    case CutoffMode::bounded: return "bounded";
    case CutoffMode::holder: return "holder";
    case CutoffMode::differentiable: return "differentiable";
  }
  return "?";
}

double CutoffBound::at(int k) const { return constant * std::pow(ratio, -static_cast<double>(k)); }

CutoffBound cutoff_bound(double s, int d, double A, CutoffMode mode, double sup_bound,
                         double holder_constant, double holder_exponent) {
  if (!(s > 0.0)) throw UsageError("cut-off bound: s must be positive");
  const double details = std::ldexp(1.0, d) - 1.0;
  CutoffBound b;
  if (mode == CutoffMode::bounded) {
    if (!(d > s)) throw UsageError("cut-off bound: bounded mode requires d > s");
    b.ratio = std::pow(2.0, d / s - 1.0);
    if (s >= 1.0) {
      b.constant = details / (b.ratio - 1.0) * d * sup_bound * std::pow(2.0 * A, d / s);
    } else {
      b.constant = std::pow(details / (std::pow(2.0, d - s) - 1.0), 1.0 / s) *
                   std::pow(d, 1.0 / s) * sup_bound * std::pow(2.0 * A, d / s);
    }
    return b;
  }
  const double C = holder_constant;
  const double g = mode == CutoffMode::differentiable ? 1.0 : holder_exponent;
  if (!(g > 0.0 && g <= 1.0)) throw UsageError("cut-off bound: Hoelder exponent must lie in (0, 1]");
  b.ratio = std::pow(2.0, d / s + g);
  if (s >= 1.0) {
    b.constant = details / (std::pow(2.0, d / s + g + 1.0) - 2.0) * std::pow(d, 1.0 + g / 2.0) *
                 C * std::pow(2.0 * A, d / s + g);
  } else {
    b.constant = 0.5 * std::pow(details / (std::pow(2.0, d + s * g) - 1.0), 1.0 / s) *
                 std::pow(d, 1.0 / s + g / (2.0 * s)) * C * std::pow(2.0 * A, d / s + g);
  }
  return b;
}

CutoffBound cutoff_level(const KernelSpec& kernel, double s, double A, double eps1,
                         CutoffMode mode) {
  if (!(eps1 > 0.0)) throw UsageError("cutoff_level: eps1 must be positive");
  const int d = kernel.dim_domain;
  CutoffBound b;
  switch (mode) {
    case CutoffMode::bounded:
      if (!kernel.sup_bound) throw UsageError("cutoff_level: kernel has no sup bound");
      b = cutoff_bound(s, d, A, mode, *kernel.sup_bound, 0.0, 1.0);
      break;
    case CutoffMode::holder:
      if (!kernel.holder) throw UsageError("cutoff_level: kernel has no Hoelder data");
      b = cutoff_bound(s, d, A, mode, 0.0, kernel.holder->constant, kernel.holder->exponent);
      break;
    case CutoffMode::differentiable:
      if (!kernel.grad_bound) throw UsageError("cutoff_level: kernel has no gradient bound");
      b = cutoff_bound(s, d, A, mode, 0.0, *kernel.grad_bound, 1.0);
      break;
  }
  const double guess = std::ceil(std::log(b.constant / eps1) / std::log(b.ratio));
  int m = guess > 0.0 ? static_cast<int>(guess) : 0;
  while (b.at(m) > eps1) ++m;
  while (m > 0 && b.at(m - 1) <= eps1) --m;
  b.level = m;
  return b;
}

Selection nbest_select(const CoefficientSet& coeffs, double s, double eps1, double eps_star) {
  if (!(eps1 > eps_star)) throw UsageError("nbest_select: eps1 must exceed eps_star");
  const int d = coeffs.dim;
  const std::size_t count = coeffs.values.size();
  std::vector<double> weight(count);
  for (std::size_t p = 0; p < count; ++p) {
    const double a =
        std::abs(coeffs.values[p]) * psi_norm_at_level(level_of(p, d), s, coeffs.halfwidth, d);
    weight[p] = s < 1.0 ? std::pow(a, s) : a;
  }
  const double budget = s < 1.0 ? std::pow(eps1, s) - std::pow(eps_star, s) : eps1 - eps_star;
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return weight[x] > weight[y]; });
  // Tail sums from the small end for accuracy.
  std::vector<double> tail(count + 1, 0.0);
  for (std::size_t i = count; i-- > 0;) tail[i] = tail[i + 1] + weight[order[i]];
  std::size_t keep = 0;
  while (tail[keep] > budget) ++keep;
  Selection sel;
  sel.total = tail[0];
  sel.discarded = tail[keep];
  sel.positions.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
  sel.coefficients.reserve(keep);
  for (std::size_t p : sel.positions) sel.coefficients.push_back(coeffs.values[p]);
  return sel;
}

double PiecewiseConstant::operator()(std::span<const double> x) const {
  const std::size_t side_count = std::size_t{1} << (level + 1);
  const double side = finest_side(halfwidth, level);
  std::size_t index = 0;
  for (int i = 0; i < dim; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    if (!(xi >= -halfwidth && xi < halfwidth)) return 0.0;
    auto k = static_cast<std::size_t>(std::floor((xi + halfwidth) / side));
    k = std::min(k, side_count - 1);
    index = index * side_count + k;
  }
  return values[index];
}

PiecewiseConstant reconstruct(const CoefficientSet& coeffs,
                              std::span<const std::size_t> positions) {
  std::vector<double> sparse(coeffs.values.size(), 0.0);
  for (std::size_t p : positions) sparse.at(p) = coeffs.values[p];
  PiecewiseConstant pc;
  pc.halfwidth = coeffs.halfwidth;
  pc.level = coeffs.level;
  pc.dim = coeffs.dim;
  pc.values = inverse_fwt(sparse, coeffs.level, coeffs.dim);
  const double scale = input_scale(coeffs.level, coeffs.dim, coeffs.halfwidth);
  for (double& v : pc.values) v *= scale;
  return pc;
}

PiecewiseConstant reconstruct_all(const CoefficientSet& coeffs, int max_level) {
  std::vector<std::size_t> positions(
      std::min(coefficient_count(max_level, coeffs.dim), coeffs.values.size()));
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  return reconstruct(coeffs, positions);
}

std::pair<double, double> split_epsilon(double eps, double split, double s) {
  if (!(eps > 0.0)) throw UsageError("epsilon must be positive");
  if (!(split > 0.0 && split < 1.0)) throw UsageError("epsilon_split must lie in (0, 1)");
  if (s >= 1.0) return {split * eps, (1.0 - split) * eps};
  const double es = std::pow(eps, s);
  return {std::pow(split * es, 1.0 / s), std::pow((1.0 - split) * es, 1.0 / s)};
}

WaveletPlan build_wavelet_plan(const KernelSpec& kernel, const std::vector<Point>& targets,
                               const WaveletOptions& options, CoefficientCache* cache) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const double A = kernel.support_halfwidth;
  if (!std::isfinite(A)) throw UsageError("wavelet plan: kernel needs a finite support window");
  if (options.extra_levels < 0) throw UsageError("wavelet plan: extra_levels must be >= 0");
  WaveletPlan plan;
  plan.kernel = kernel;
  plan.halfwidth = A;
  plan.dim = kernel.dim_domain;
  plan.options = options;
  std::tie(plan.eps1, plan.eps2) = split_epsilon(options.epsilon, options.split, options.s);

  std::vector<int> base(targets.size());
  std::vector<double> eps_star(targets.size(), 0.0);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (options.fixed_level) {
      base[i] = *options.fixed_level;
    } else {
      const CutoffBound b = cutoff_level(kernel, options.s, A, plan.eps1, options.mode);
      base[i] = b.level;
      eps_star[i] = b.at(b.level + options.extra_levels);
    }
  }
  plan.finest_level = targets.empty() ? 0 : *std::max_element(base.begin(), base.end());
  plan.finest_level += options.extra_levels;

  plan.targets.resize(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    TargetPlan& tp = plan.targets[i];
    tp.target = targets[i];
    tp.base_level = base[i];
    tp.eps_star = eps_star[i];
    const int level = base[i] + options.extra_levels;
    tp.delta = fwt_input_precision(options.s, plan.dim, level, A, plan.eps2,
                                   options.conservative_delta);
    auto compute = [&] { return compute_coefficients(kernel, tp.target, level, A, tp.delta); };
    if (cache != nullptr) {
      tp.coefficients = cache->get_or_compute(kernel.id, tp.target, level, tp.delta, compute);
    } else {
      tp.coefficients = std::make_shared<const CoefficientSet>(compute());
    }
    if (options.fixed_level) {
      tp.selection.positions.resize(tp.coefficients->values.size());
      std::iota(tp.selection.positions.begin(), tp.selection.positions.end(), std::size_t{0});
      tp.selection.coefficients = tp.coefficients->values;
    } else {
      tp.selection = nbest_select(*tp.coefficients, options.s, plan.eps1, tp.eps_star);
    }
  }
  plan.build_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
  return plan;
}

std::vector<double> wavelet_integrals(std::span<const double> increments, int z, int d, double A) {
  std::vector<double> scaled(increments.begin(), increments.end());
  const double scale = input_scale(z, d, A);
  for (double& v : scaled) v *= scale;
  return forward_fwt(scaled, z, d);
}

FieldRealization synthesize_wavelet(const WaveletPlan& plan, const MeasureSpec& m,
                                    const RngStream& rng) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const int z = plan.finest_level;
  const int d = plan.dim;
  const std::size_t cells = coefficient_count(z, d);
  const double volume = std::pow(finest_side(plan.halfwidth, z), d);
  const auto increments = sample_equal_cells(m, cells, volume, rng);
  const auto integrals = wavelet_integrals(increments, z, d, plan.halfwidth);
  FieldRealization out;
  out.values.resize(plan.targets.size());
  std::size_t summands = 0;
  for (std::size_t i = 0; i < plan.targets.size(); ++i) {
    const Selection& sel = plan.targets[i].selection;
    double acc = 0.0;
    for (std::size_t j = 0; j < sel.positions.size(); ++j)
      acc += sel.coefficients[j] * integrals[sel.positions[j]];
    out.values[i] = acc;
    summands = std::max(summands, sel.positions.size());
  }
  out.method = "wavelet";
  out.measure = describe(m);
  out.kernel = plan.kernel.id;
  out.n = z;
  out.epsilon = plan.options.fixed_level ? 0.0 : plan.options.epsilon;
  out.seed = rng.seed();
  out.stream = rng.stream_id();
  out.counters.summands = summands;
  out.counters.random_variables = cells;
  out.synthesis_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
  return out;
}

}  // namespace idfield
