#include "idfield/error_metrics.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/sinc.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "idfield/errors.hpp"
#include "idfield/quadrature.hpp"

namespace idfield {
namespace {

CubatureResult integrate_power(const Function& h, double s, const Box& box,
                               const ErrOptions& options) {
  const Integrand integrand = [&](std::span<const double> x) { return std::pow(std::abs(h(x)), s); };
  CubatureOptions opt;
  // Relative accuracy on the s-th power translates to rel/s on the root.
  opt.rel_tol = options.rel_tol * std::min(1.0, s);
  opt.abs_tol = options.abs_tol > 0.0 ? std::pow(options.abs_tol, s) : 0.0;
  opt.initial_divisions = options.initial_divisions;
  opt.max_evaluations = options.max_evaluations;
  return adaptive_cubature(integrand, box, opt);
}

}  // namespace

ErrReport err_s(const Function& f, const Function& g, double s, const Box& box,
                const ErrOptions& options) {
  if (!(s > 0.0)) throw UsageError("err_s: s must be positive");
  const Function diff = [&](std::span<const double> x) { return f(x) - g(x); };
  const CubatureResult r = integrate_power(diff, s, box, options);
  ErrReport rep;
  rep.s = s;
  rep.value = std::pow(std::max(r.value, 0.0), 1.0 / s);
  const double hi = std::pow(std::max(r.value + r.error, 0.0), 1.0 / s);
  const double lo = std::pow(std::max(r.value - r.error, 0.0), 1.0 / s);
  rep.achieved_tolerance = std::max(hi - rep.value, rep.value - lo);
  rep.evaluations = r.evaluations;
  if (!r.converged) {
    throw NumericalError("err_s: quadrature tolerance not reached", rep.value,
                         rep.achieved_tolerance);
  }
  return rep;
}

double stable_error_scale(const ErrReport& err, double alpha) {
  if (std::abs(err.s - alpha) > 1e-12) throw UsageError("stable_error_scale: needs s = alpha");
  return err.value;
}

double sine_integral(double p) {
  if (!(p > 0.0 && p < 2.0)) throw UsageError("sine_integral: p must lie in (0, 2)");
  // [0, 1]: the integrand behaves like u^{1-p}; tanh-sinh copes with the
  // endpoint singularity for p > 1.
  boost::math::quadrature::tanh_sinh<double> ts;
  const double head = ts.integrate(
      [p](double u) {
        // Written as u^{1-p} sinc^2 u so tiny nodes neither overflow nor hit 0 * inf.
        const double sc = boost::math::sinc_pi(u);
        return std::pow(u, 1.0 - p) * sc * sc;
      },
      0.0, 1.0);
  // [1, inf): sin^2 u = (1 - cos 2u) / 2. The cosine part is integrated
  // period by period up to U = K pi; beyond U integration by parts gives
  // (p+1) U^{-p-2} / 4 + O(U^{-p-4}).
  constexpr int kPeriods = 400;
  const double U = kPeriods * std::numbers::pi;
  auto osc = [p](double u) { return std::pow(u, -p - 1.0) * std::cos(2.0 * u); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double cos_part = GK::integrate(osc, 1.0, std::numbers::pi, 10, 1e-14);
  for (int k = 1; k < kPeriods; ++k)
    cos_part += GK::integrate(osc, k * std::numbers::pi, (k + 1) * std::numbers::pi, 10, 1e-14);
  cos_part += (p + 1.0) * std::pow(U, -p - 2.0) / 4.0;
  return head + 0.5 / p - 0.5 * cos_part;
}

double c_constant(double alpha, double beta, double p) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw UsageError("c_constant: alpha must lie in (0, 2]");
  if (alpha == 2.0) throw UsageError("c_constant: alpha = 2 is the Gaussian case");
  if (!(p > 0.0)) throw UsageError("c_constant: p must be positive");
  if (p >= alpha) throw UsageError("c_constant: E|X|^p is infinite for p >= alpha");
  if (alpha == 1.0 && beta != 0.0) throw UsageError("c_constant: alpha = 1 requires beta = 0");
  double cp = std::pow(2.0, p - 1.0) * boost::math::tgamma(1.0 - p / alpha) / (p * sine_integral(p));
  if (beta != 0.0) {
    const double z = beta * std::tan(alpha * std::numbers::pi / 2.0);
    cp *= std::pow(1.0 + z * z, p / (2.0 * alpha)) * std::cos(p / alpha * std::atan(z));
  }
  return std::pow(cp, 1.0 / p);
}

std::optional<double> beta_t_effective(const Function& f, const Function& g, double beta,
                                       double alpha, const Box& box, const ErrOptions& options) {
  if (beta == 0.0) return 0.0;
  const Function diff = [&](std::span<const double> x) { return f(x) - g(x); };
  const CubatureResult den = integrate_power(diff, alpha, box, options);
  if (!(den.value > 0.0)) return std::nullopt;
  CubatureOptions opt;
  opt.rel_tol = 0.0;
  opt.abs_tol = std::max(options.rel_tol * den.value, 1e-300);
  opt.initial_divisions = options.initial_divisions;
  opt.max_evaluations = options.max_evaluations;
  const Integrand signed_power = [&](std::span<const double> x) {
    const double v = diff(x);
    return std::copysign(std::pow(std::abs(v), alpha), v);
  };
  const CubatureResult num = adaptive_cubature(signed_power, box, opt);
  return beta * num.value / den.value;
}

ErrReport err_alpha1_skewed(const Function& f, const Function& g, const Box& box,
                            const ErrOptions& options) {
  return err_s(f, g, 1.5, box, options);
}

double xlogx_envelope(double x) { return std::max(std::sqrt(x), x * std::sqrt(x)); }

double campbell_bound(const Function& f, const Function& g, double intensity, const Box& box,
                      const ErrOptions& options) {
  if (!(intensity >= 0.0)) throw UsageError("campbell_bound: intensity must be nonnegative");
  return intensity * err_s(f, g, 1.0, box, options).value;
}

double second_moment_bound(const std::optional<SpotVariable>& spot, const Box& box, double err2) {
  if (!spot) throw UsageError("second_moment_bound: spot variable has no second moment");
  const Point c = box.center();
  const double c1 = spot->variance(c);
  const double mean = spot->mean(c);
  const double c2 = mean * mean * box.volume();
  return std::sqrt(c1 + c2) * err2;
}

bool subadditivity_check(std::span<const Function> fs, std::span<const double> weights, double p,
                         const Box& box, const ErrOptions& options) {
  if (fs.size() != weights.size()) throw UsageError("subadditivity_check: size mismatch");
  if (!(p > 0.0)) throw UsageError("subadditivity_check: p must be positive");
  const Function sum = [&](std::span<const double> x) {
    double v = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) v += weights[i] * fs[i](x);
    return v;
  };
  const Function zero = [](std::span<const double>) { return 0.0; };
  const ErrReport lhs = err_s(sum, zero, p, box, options);
  double rhs = 0.0;
  double slack = lhs.achieved_tolerance;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const ErrReport term = err_s(fs[i], zero, p, box, options);
    slack += std::abs(weights[i]) * term.achieved_tolerance;
    rhs += p <= 1.0 ? std::pow(std::abs(weights[i]), p) * std::pow(term.value, p)
                    : std::abs(weights[i]) * term.value;
  }
  const double left = p <= 1.0 ? std::pow(lhs.value, p) : lhs.value;
  return left <= rhs + 1e-9 * rhs + slack;
}

}  // namespace idfield
