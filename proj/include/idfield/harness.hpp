#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "idfield/field.hpp"
#include "idfield/haar.hpp"
#include "idfield/kernels.hpp"
#include "idfield/measures.hpp"
#include "idfield/rng.hpp"
#include "idfield/step_approx.hpp"

namespace idfield {

// Cell-centred grid of m^q points on [-T, T]^q; the first coordinate is the
// slowest-varying index.
struct TargetGrid {
  double window = 1.0;  // T
  int resolution = 50;  // m
  int dim = 2;          // q

  std::size_t size() const;
  double spacing() const { return 2.0 * window / resolution; }
  double coordinate(int i) const { return -window + (i + 0.5) * spacing(); }
  std::vector<Point> points() const;
};

struct Config {
  // [kernel]
  std::string kernel = "pyramid";
  std::map<std::string, double> kernel_params;
  int dim = 2;
  // [measure]
  std::string measure = "gaussian";
  std::vector<std::pair<std::string, double>> measure_params;
  // [method]
  std::string method = "step";
  std::optional<int> n;
  std::optional<double> epsilon;
  double epsilon_split = 0.99;
  int extra_levels = 0;
  CutoffMode mode = CutoffMode::holder;
  std::optional<double> s;
  std::optional<double> tail_epsilon;
  bool conservative_delta = false;
  // [field]
  TargetGrid grid;
  // [run]
  std::uint64_t seed = 1;
  std::size_t realizations = 1;
  int threads = 1;
  // [output]
  std::string out;
  std::string format = "csv";
};

// Parses the sectioned key = value format; unknown keys throw UsageError
// naming section and key.
Config parse_config(const std::string& text);
Config load_config(const std::filesystem::path& path);

// Default error exponent for a measure (alpha for stable laws, 3/2 for
// alpha = 1 skewed, 2 for Gaussian and gamma, 1 for Poisson).
double default_s(const MeasureSpec& m);

/// Everything needed to synthesize realizations for one config.
struct Experiment {
  KernelSpec kernel;
  MeasureSpec measure;
  std::vector<Point> targets;
  double s = 2.0;
  double tail = 0.0;  // certified tail norm outside the window
  std::optional<StepPlan> step;
  std::optional<WaveletPlan> wavelet;
  double setup_ms = 0.0;
};

Experiment prepare_experiment(const Config& config, CoefficientCache* cache = nullptr);

struct BatchResult {
  std::vector<FieldRealization> realizations;
  double cold_ms = 0.0;         // setup plus first realization
  double warm_median_ms = 0.0;  // median synthesis time of later realizations
};

BatchResult run_batch(const Config& config, CoefficientCache* cache = nullptr);
// Realization r uses RngStream(seed, r).
FieldRealization synthesize(const Experiment& e, std::uint64_t seed, std::uint64_t r);

double theoretical_covariance(double a, double b, double h);

struct ValidationReport {
  std::vector<double> lags;
  std::vector<double> covariance;
  std::vector<double> theory;
  double mean = 0.0;
  double variance = 0.0;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  int attempts = 0;
  int n = 0;  // resolution used on the final attempt
};

// Pooled mean, variance and covariance at lags 0..m/2 grid steps along the
// first axis, over R realizations laid out target-major.
ValidationReport covariance_report(const std::vector<FieldRealization>& fields,
                                   const TargetGrid& grid, double a, double b, double tolerance);

/// Gaussian field with a Gaussian bell kernel versus the closed-form
/// covariance. On failure the accuracy target is halved and the batch is
/// rerun with fresh streams, up to `max_attempts` times.
ValidationReport validate_gaussian(const Config& config, std::size_t realizations, double tolerance,
                                   int max_attempts = 6);

Counters count_summands(const std::string& method, int n, int d);

/// Poisson shot noise X(t) = sum over points x of f_t(x), with points
/// drawn on `window`.
FieldRealization shot_noise_direct(const KernelSpec& kernel, double intensity, const Box& window,
                                   const std::vector<Point>& targets, const RngStream& rng);

}  // namespace idfield
