#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "idfield/geometry.hpp"
#include "idfield/rng.hpp"

namespace idfield {

struct Stable {
  double alpha = 2.0;
  double beta = 0.0;
};
// S_2(sigma, 0, 0): variance 2 sigma^2.
struct Gaussian {};
struct Poisson {
  double intensity = 1.0;  // expected points per unit volume
};
struct GammaLevy {
  double theta = 1.0;  // rate
};

using MeasureSpec = std::variant<Stable, Gaussian, Poisson, GammaLevy>;

// Validates parameter ranges; throws UsageError.
void validate(const MeasureSpec& m);
std::string describe(const MeasureSpec& m);
// Builds a measure from a config name and keys.
MeasureSpec make_measure(const std::string& name,
                         const std::vector<std::pair<std::string, double>>& params);

/// Moments of the spot variable, per unit Lebesgue volume.
///
/// control_density is the density of the control measure with respect to
/// Lebesgue measure.
struct SpotVariable {
  std::function<double(std::span<const double>)> mean;
  std::function<double(std::span<const double>)> variance;
  std::function<double(std::span<const double>)> control_density;
};

// std::nullopt when second moments do not exist (stable, alpha < 2).
std::optional<SpotVariable> spot_descriptor(const MeasureSpec& m);

/// One S_alpha(sigma, beta, 0) variate by the Chambers-Mallows-Stuck method,
/// in the Samorodnitsky-Taqqu parametrisation.
double sample_stable(double alpha, double beta, double sigma, RngStream& rng);

// One draw of Lambda(Delta) for a cell of the given Lebesgue volume.
double sample_cell(const MeasureSpec& m, double volume, RngStream& rng);

/// Independent draws over disjoint cells; cell i uses rng.substream(i), so
/// the result does not depend on evaluation order.
std::vector<double> sample_partition(const MeasureSpec& m, std::span<const Box> cells,
                                     const RngStream& rng);

// Same, for `count` cells of equal volume (no geometry needed).
std::vector<double> sample_equal_cells(const MeasureSpec& m, std::size_t count, double volume,
                                       const RngStream& rng);

}  // namespace idfield
