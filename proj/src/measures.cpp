#include "idfield/measures.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/special_functions/expint.hpp>

#include "idfield/errors.hpp"

namespace idfield {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::function<double(std::span<const double>)> constant(double v) {
  return [v](std::span<const double>) { return v; };
}

double standard_normal(RngStream& rng) {
  // Box-Muller; one variate per call keeps the stream layout simple.
  const double u = rng.uniform_open();
  const double v = rng.uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

}  // namespace

void validate(const MeasureSpec& m) {
  std::visit(overloaded{
                 [](const Stable& s) {
                   if (!(s.alpha > 0.0 && s.alpha <= 2.0))
                     throw UsageError("stable: alpha must lie in (0, 2]");
                   if (!(s.beta >= -1.0 && s.beta <= 1.0))
                     throw UsageError("stable: beta must lie in [-1, 1]");
                 },
                 [](const Gaussian&) {},
                 [](const Poisson& p) {
                   if (!(p.intensity >= 0.0) || !std::isfinite(p.intensity))
                     throw UsageError("poisson: intensity must be nonnegative");
                 },
                 [](const GammaLevy& g) {
                   if (!(g.theta > 0.0) || !std::isfinite(g.theta))
                     throw UsageError("gamma_levy: theta must be positive");
                 },
             },
             m);
}

std::string describe(const MeasureSpec& m) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const Stable& s) { os << "stable(alpha=" << s.alpha << ",beta=" << s.beta << ")"; },
                 [&](const Gaussian&) { os << "gaussian"; },
                 [&](const Poisson& p) { os << "poisson(intensity=" << p.intensity << ")"; },
                 [&](const GammaLevy& g) { os << "gamma_levy(theta=" << g.theta << ")"; },
             },
             m);
  return os.str();
}

MeasureSpec make_measure(const std::string& name,
                         const std::vector<std::pair<std::string, double>>& params) {
  auto reject = [&](const std::string& key) {
    throw UsageError("measure '" + name + "': unknown key '" + key + "'");
  };
  MeasureSpec m;
  if (name == "stable") {
    Stable s;
    for (const auto& [k, v] : params) {
      if (k == "alpha") s.alpha = v;
      else if (k == "beta") s.beta = v;
      else reject(k);
    }
    m = s;
  } else if (name == "gaussian") {
    if (!params.empty()) reject(params.front().first);
    m = Gaussian{};
  } else if (name == "poisson") {
    Poisson p;
    for (const auto& [k, v] : params) {
      if (k == "intensity") p.intensity = v;
      else reject(k);
    }
    m = p;
  } else if (name == "gamma_levy") {
    GammaLevy g;
    for (const auto& [k, v] : params) {
      if (k == "theta") g.theta = v;
      else reject(k);
    }
    m = g;
  } else {
    throw UsageError("unknown measure '" + name + "'");
  }
  validate(m);
  return m;
}

std::optional<SpotVariable> spot_descriptor(const MeasureSpec& m) {
  return std::visit(
      overloaded{
          [](const Stable& s) -> std::optional<SpotVariable> {
            if (s.alpha < 2.0) return std::nullopt;
            return SpotVariable{constant(0.0), constant(2.0), constant(2.0)};
          },
          [](const Gaussian&) -> std::optional<SpotVariable> {
            return SpotVariable{constant(0.0), constant(2.0), constant(2.0)};
          },
          [](const Poisson& p) -> std::optional<SpotVariable> {
            return SpotVariable{constant(p.intensity), constant(p.intensity),
                                constant(2.0 * p.intensity)};
          },
          [](const GammaLevy& g) -> std::optional<SpotVariable> {
            const double th = g.theta;
            const double e = std::exp(-th);
            const double density =
                (1.0 + th - 2.0 * th * e - e) / (th * th) + boost::math::expint(1, th);
            return SpotVariable{constant(1.0 / th), constant(1.0 / (th * th)), constant(density)};
          },
      },
      m);
}

double sample_stable(double alpha, double beta, double sigma, RngStream& rng) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (alpha == 2.0) return sigma * std::numbers::sqrt2 * standard_normal(rng);
  const double V = std::numbers::pi * (rng.uniform_open() - 0.5);
  const double W = -std::log(rng.uniform_open());
  if (alpha == 1.0) {
    const double a = half_pi + beta * V;
    const double X = (a * std::tan(V) - beta * std::log(half_pi * W * std::cos(V) / a)) / half_pi;
    return sigma * X + beta * sigma * std::log(sigma) / half_pi;
  }
  const double zeta = beta * std::tan(half_pi * alpha);
  const double B = std::atan(zeta) / alpha;
  const double S = std::pow(1.0 + zeta * zeta, 1.0 / (2.0 * alpha));
  const double X = S * std::sin(alpha * (V + B)) / std::pow(std::cos(V), 1.0 / alpha) *
                   std::pow(std::cos(V - alpha * (V + B)) / W, (1.0 - alpha) / alpha);
  return sigma * X;
}

double sample_cell(const MeasureSpec& m, double volume, RngStream& rng) {
  if (!(volume >= 0.0)) throw UsageError("sample_cell: volume must be nonnegative");
  if (volume == 0.0) return 0.0;
  return std::visit(
      overloaded{
          [&](const Stable& s) {
            return sample_stable(s.alpha, s.beta, std::pow(volume, 1.0 / s.alpha), rng);
          },
          [&](const Gaussian&) { return std::sqrt(2.0 * volume) * standard_normal(rng); },
          [&](const Poisson& p) {
            const double mean = p.intensity * volume;
            if (mean == 0.0) return 0.0;
            std::poisson_distribution<long long> dist(mean);
            return static_cast<double>(dist(rng));
          },
          [&](const GammaLevy& g) {
            std::gamma_distribution<double> dist(volume, 1.0 / g.theta);
            return dist(rng);
          },
      },
      m);
}

std::vector<double> sample_partition(const MeasureSpec& m, std::span<const Box> cells,
                                     const RngStream& rng) {
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (std::size_t j = i + 1; j < cells.size(); ++j)
      if (cells[i].overlaps(cells[j]))
        throw UsageError("sample_partition: cells overlap");
  std::vector<double> out(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    RngStream cell_rng = rng.substream(i);
    out[i] = sample_cell(m, cells[i].volume(), cell_rng);
  }
  return out;
}

std::vector<double> sample_equal_cells(const MeasureSpec& m, std::size_t count, double volume,
                                       const RngStream& rng) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    RngStream cell_rng = rng.substream(i);
    out[i] = sample_cell(m, volume, cell_rng);
  }
  return out;
}

}  // namespace idfield
