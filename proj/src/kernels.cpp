#include "idfield/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "idfield/errors.hpp"
#include "idfield/quadrature.hpp"

namespace idfield {
namespace {

std::string make_id(const char* name, double a, double b, double halfwidth, int dim) {
  std::ostringstream os;
  os.precision(17);
  os << name << "(a=" << a << ",b=" << b << ",A=" << halfwidth << ",d=" << dim << ")";
  return os.str();
}

void check_params(double a, double b, int dim) {
  if (!(a > 0.0) || !(b > 0.0)) throw UsageError("kernel parameters a and b must be positive");
  if (dim < 1) throw UsageError("kernel dimension must be at least 1");
}

double squared_distance(std::span<const double> t, std::span<const double> x) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = x[i] - t[i];
    r2 += u * u;
  }
  return r2;
}

// Antiderivative of the tent max(0, a - |v|), zero at -infinity.
double tent_antiderivative(double v, double a) {
  if (v <= -a) return 0.0;
  if (v <= 0.0) return 0.5 * (a + v) * (a + v);
  if (v < a) return a * a - 0.5 * (a - v) * (a - v);
  return a * a;
}

}  // namespace

KernelSpec epanechnikov(double a, double b, double support_halfwidth, int dim) {
  check_params(a, b, dim);
  KernelSpec k;
  k.id = make_id("epanechnikov", a, b, support_halfwidth, dim);
  k.eval = [a, b](std::span<const double> t, std::span<const double> x) {
    return b * std::max(0.0, a * a - squared_distance(t, x));
  };
  k.support_halfwidth = support_halfwidth;
  k.dim_domain = k.dim_index = dim;
  k.holder = HolderData{2.0 * a * b, 1.0};
  k.sup_bound = a * a * b;
  k.grad_bound = 2.0 * a * b;
  return k;
}

KernelSpec pyramid(double a, double b, double support_halfwidth, int dim) {
  check_params(a, b, dim);
  KernelSpec k;
  k.id = make_id("pyramid", a, b, support_halfwidth, dim);
  k.eval = [a, b](std::span<const double> t, std::span<const double> x) {
    double v = b;
    for (std::size_t i = 0; i < x.size(); ++i) v *= std::max(0.0, a - std::abs(x[i] - t[i]));
    return v;
  };
  k.support_halfwidth = support_halfwidth;
  k.dim_domain = k.dim_index = dim;
  const double edge = std::pow(a, dim - 1) * b;
  k.holder = HolderData{std::sqrt(static_cast<double>(dim)) * edge, 1.0};
  k.sup_bound = std::pow(a, dim) * b;
  k.grad_bound = std::sqrt(static_cast<double>(dim)) * edge;
  k.exact_cell_integral = [a, b](std::span<const double> t, const Box& box) {
    double v = b;
    for (std::size_t i = 0; i < box.dim(); ++i)
      v *= tent_antiderivative(box.hi[i] - t[i], a) - tent_antiderivative(box.lo[i] - t[i], a);
    return v;
  };
  return k;
}

KernelSpec gaussian_bell(double a, double b, int dim, double support_halfwidth) {
  check_params(a, b, dim);
  KernelSpec k;
  k.id = make_id("gaussian_bell", a, b, support_halfwidth, dim);
  k.eval = [a, b](std::span<const double> t, std::span<const double> x) {
    return b * std::exp(-squared_distance(t, x) / a);
  };
  k.support_halfwidth = support_halfwidth;
  k.dim_domain = k.dim_index = dim;
  k.sup_bound = b;
  k.grad_bound = b * std::sqrt(2.0 / (a * std::numbers::e));
  // Lipschitz on the box interior; truncation adds a jump that the tail
  // budget has to absorb.
  k.holder = HolderData{*k.grad_bound, 1.0};
  const double root = std::sqrt(a);
  k.exact_cell_integral = [a, b, root](std::span<const double> t, const Box& box) {
    double v = b;
    for (std::size_t i = 0; i < box.dim(); ++i) {
      v *= 0.5 * std::sqrt(std::numbers::pi * a) *
           (std::erf((box.hi[i] - t[i]) / root) - std::erf((box.lo[i] - t[i]) / root));
    }
    return v;
  };
  return k;
}

KernelSpec truncate(KernelSpec kernel, double support_halfwidth) {
  if (!(support_halfwidth > 0.0)) throw UsageError("truncate: halfwidth must be positive");
  std::ostringstream os;
  os.precision(17);
  os << kernel.id << "|A=" << support_halfwidth;
  kernel.id = os.str();
  kernel.support_halfwidth = support_halfwidth;
  return kernel;
}

KernelSpec make_kernel(const std::string& name, const std::map<std::string, double>& params,
                       int dim) {
  double a = 0.0, b = 1.0;
  std::optional<double> halfwidth;
  for (const auto& [key, value] : params) {
    if (key == "a") a = value;
    else if (key == "b") b = value;
    else if (key == "support_halfwidth") halfwidth = value;
    else throw UsageError("kernel: unknown key '" + key + "'");
  }
  if (name == "gaussian_bell") {
    return gaussian_bell(a, b, dim,
                         halfwidth.value_or(std::numeric_limits<double>::infinity()));
  }
  if (name == "epanechnikov" || name == "pyramid") {
    const double A = halfwidth.value_or(a);
    return name == "pyramid" ? pyramid(a, b, A, dim) : epanechnikov(a, b, A, dim);
  }
  throw UsageError("kernel: unknown name '" + name + "'");
}

double eval_kernel(const KernelSpec& kernel, std::span<const double> t, std::span<const double> x) {
  if (t.size() != static_cast<std::size_t>(kernel.dim_index) ||
      x.size() != static_cast<std::size_t>(kernel.dim_domain)) {
    throw UsageError("eval_kernel: dimension mismatch");
  }
  for (double xi : x)
    if (std::abs(xi) > kernel.support_halfwidth) return 0.0;
  return kernel.eval(t, x);
}

double cell_integral(const KernelSpec& kernel, std::span<const double> t, const Box& box,
                     const CellIntegralOptions& options) {
  if (box.dim() != static_cast<std::size_t>(kernel.dim_domain) ||
      t.size() != static_cast<std::size_t>(kernel.dim_index)) {
    throw UsageError("cell_integral: dimension mismatch");
  }
  const double A = kernel.support_halfwidth;
  if (std::isfinite(A) && !box.inside(kernel.support(), 1e-12 * A)) {
    throw UsageError("cell_integral: box leaves the support window");
  }
  if (box.volume() == 0.0) return 0.0;
  if (options.use_exact && kernel.exact_cell_integral) return kernel.exact_cell_integral(t, box);
  const Integrand f = [&](std::span<const double> x) { return kernel.eval(t, x); };
  if (options.method == CellQuadrature::midpoint_richardson) {
    const MidpointResult r = midpoint_richardson(f, box, options.tolerance, options.max_depth);
    if (!r.converged) {
      throw NumericalError("cell_integral: tolerance not reached at maximum depth", r.value,
                           r.error);
    }
    return r.value;
  }
  CubatureOptions opt;
  opt.abs_tol = options.tolerance;
  opt.rel_tol = 0.0;
  opt.max_evaluations = options.max_evaluations;
  const CubatureResult r = adaptive_cubature(f, box, opt);
  if (!r.converged)
    throw NumericalError("cell_integral: tolerance not reached", r.value, r.error);
  return r.value;
}

double tail_norm(const KernelSpec& kernel, double s, double halfwidth, std::span<const double> t,
                 int max_shells) {
  const auto d = static_cast<std::size_t>(kernel.dim_domain);
  const double A = kernel.support_halfwidth;
  if (halfwidth >= A) return 0.0;
  const Integrand f = [&](std::span<const double> x) {
    return std::pow(std::abs(eval_kernel(kernel, t, x)), s);
  };
  std::size_t pieces = 1;
  for (std::size_t i = 0; i < d; ++i) pieces *= 3;
  const double abs_floor = 1e-14 * std::pow(kernel.sup_bound.value_or(1.0), s);
  double total = 0.0;
  double inner = halfwidth;
  for (int shell = 0; shell < max_shells && inner < A; ++shell) {
    const double outer = std::min(2.0 * inner, A);
    // Split [-outer, outer]^d \ [-inner, inner]^d into 3^d - 1 boxes.
    double shell_sum = 0.0;
    std::vector<int> idx(d, 0);
    for (std::size_t p = 0; p < pieces; ++p) {
      bool all_mid = true;
      Box piece{std::vector<double>(d), std::vector<double>(d)};
      for (std::size_t i = 0; i < d; ++i) {
        if (idx[i] != 1) all_mid = false;
        const double edges[4] = {-outer, -inner, inner, outer};
        piece.lo[i] = edges[idx[i]];
        piece.hi[i] = edges[idx[i] + 1];
      }
      if (!all_mid) {
        CubatureOptions opt;
        opt.rel_tol = 1e-8;
        opt.abs_tol = abs_floor;
        opt.max_evaluations = 400'000;
        shell_sum += adaptive_cubature(f, piece, opt).value;
      }
      for (std::size_t i = 0; i < d; ++i) {
        if (++idx[i] < 3) break;
        idx[i] = 0;
      }
    }
    total += shell_sum;
    if (!std::isfinite(A) && shell > 0 && shell_sum <= 1e-12 * total) break;
    if (!std::isfinite(A) && total == 0.0 && shell > 2) break;
    inner = outer;
  }
  return std::pow(total, 1.0 / s);
}

EffectiveBox effective_box(const KernelSpec& kernel, double s, double eps_tail,
                           std::span<const double> t, const EffectiveBoxOptions& options) {
  if (!(s > 0.0)) throw UsageError("effective_box: s must be positive");
  double K = options.initial_halfwidth;
  if (std::isinf(eps_tail)) return {K, tail_norm(kernel, s, K, t, options.max_shells)};
  double tail = 0.0;
  while (K <= options.ceiling) {
    tail = tail_norm(kernel, s, K, t, options.max_shells);
    if (tail <= eps_tail) return {K, tail};
    K *= 2.0;
  }
  throw NumericalError("effective_box: no halfwidth below the ceiling meets the tail tolerance",
                       tail, tail);
}

}  // namespace idfield
