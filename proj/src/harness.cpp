#include "idfield/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "idfield/coefficient_cache.hpp"
#include "idfield/errors.hpp"
#include "idfield/parallel.hpp"

namespace idfield {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& where, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw UsageError(where + ": expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& where, const std::string& v) {
  const double d = to_double(where, v);
  if (d != std::floor(d)) throw UsageError(where + ": expected an integer, got '" + v + "'");
  return static_cast<long long>(d);
}

bool to_bool(const std::string& where, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError(where + ": expected a boolean, got '" + v + "'");
}

bool is_compact(const std::string& kernel) { return kernel == "pyramid" || kernel == "epanechnikov"; }

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

}  // namespace

std::size_t TargetGrid::size() const {
  std::size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(resolution);
  return n;
}

std::vector<Point> TargetGrid::points() const {
  if (resolution < 1 || dim < 1 || !(window > 0.0)) throw UsageError("target grid: invalid shape");
  std::vector<Point> pts;
  pts.reserve(size());
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  for (std::size_t p = 0; p < size(); ++p) {
    Point x(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) x[i] = coordinate(idx[i]);
    pts.push_back(std::move(x));
    for (int i = dim - 1; i >= 0; --i) {
      if (++idx[static_cast<std::size_t>(i)] < resolution) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
  }
  return pts;
}

Config parse_config(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw UsageError("config line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "kernel" && section != "measure" && section != "method" && section != "field" &&
          section != "run" && section != "output") {
        throw UsageError("config: unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string where = section + "." + key;
    if (section.empty()) throw UsageError("config: key '" + key + "' outside of a section");
    auto unknown = [&] { throw UsageError("config: unknown key '" + where + "'"); };
    if (section == "kernel") {
      if (key == "name") c.kernel = value;
      else if (key == "a" || key == "b" || key == "support_halfwidth") c.kernel_params[key] = to_double(where, value);
      else if (key == "dim") c.dim = static_cast<int>(to_int(where, value));
      else unknown();
    } else if (section == "measure") {
      if (key == "name") c.measure = value;
      else if (key == "alpha" || key == "beta" || key == "intensity" || key == "theta")
        c.measure_params.emplace_back(key, to_double(where, value));
      else unknown();
    } else if (section == "method") {
      if (key == "method") c.method = value;
      else if (key == "n") c.n = static_cast<int>(to_int(where, value));
      else if (key == "epsilon") c.epsilon = to_double(where, value);
      else if (key == "epsilon_split") c.epsilon_split = to_double(where, value);
      else if (key == "extra_levels") c.extra_levels = static_cast<int>(to_int(where, value));
      else if (key == "mode") c.mode = parse_cutoff_mode(value);
      else if (key == "s") c.s = to_double(where, value);
      else if (key == "tail_epsilon") c.tail_epsilon = to_double(where, value);
      else if (key == "conservative_delta") c.conservative_delta = to_bool(where, value);
      else unknown();
    } else if (section == "field") {
      if (key == "window") c.grid.window = to_double(where, value);
      else if (key == "resolution") c.grid.resolution = static_cast<int>(to_int(where, value));
      else unknown();
    } else if (section == "run") {
      if (key == "seed") c.seed = static_cast<std::uint64_t>(to_int(where, value));
      else if (key == "realizations") c.realizations = static_cast<std::size_t>(to_int(where, value));
      else if (key == "threads") c.threads = static_cast<int>(to_int(where, value));
      else unknown();
    } else if (section == "output") {
      if (key == "path") c.out = value;
      else if (key == "format") c.format = value;
      else unknown();
    }
  }
  if (c.method != "step" && c.method != "wavelet") throw UsageError("config: method must be step or wavelet");
  if (c.n && c.epsilon) throw UsageError("config: method.n and method.epsilon are mutually exclusive");
  if (c.format != "csv" && c.format != "bin" && c.format != "gnuplot")
    throw UsageError("config: output.format must be csv, bin or gnuplot");
  c.grid.dim = c.dim;
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

double default_s(const MeasureSpec& m) {
  if (const auto* st = std::get_if<Stable>(&m)) {
    if (st->alpha == 1.0 && st->beta != 0.0) return 1.5;
    return st->alpha;
  }
  if (std::holds_alternative<Poisson>(m)) return 1.0;
  return 2.0;
}

Experiment prepare_experiment(const Config& config, CoefficientCache* cache) {
  const auto start = std::chrono::steady_clock::now();
  Experiment e;
  e.measure = make_measure(config.measure, config.measure_params);
  e.s = config.s.value_or(default_s(e.measure));
  const TargetGrid& grid = config.grid;
  if (grid.dim != config.dim) throw UsageError("config: field and kernel dimensions differ");

  auto params = config.kernel_params;
  const bool explicit_A = params.count("support_halfwidth") > 0;
  if (!explicit_A && is_compact(config.kernel)) {
    const auto a = params.find("a");
    if (a == params.end()) throw UsageError("kernel.a is required");
    params["support_halfwidth"] = grid.window + a->second;
  }
  e.kernel = make_kernel(config.kernel, params, config.dim);
  if (!std::isfinite(e.kernel.support_halfwidth)) {
    const double tail_eps =
        config.tail_epsilon.value_or(config.epsilon ? 0.1 * *config.epsilon : 1e-3);
    const Point origin(static_cast<std::size_t>(config.dim), 0.0);
    const EffectiveBox box = effective_box(e.kernel, e.s, tail_eps, origin);
    e.kernel = truncate(e.kernel, grid.window + box.halfwidth);
    e.tail = box.tail;
  }
  e.targets = grid.points();
  const double A = e.kernel.support_halfwidth;

  if (config.method == "step") {
    int n = 0;
    if (config.n) {
      n = *config.n;
    } else if (config.epsilon) {
      if (!e.kernel.holder) throw UsageError("step method with epsilon needs Hoelder data");
      n = min_n_for_eps(e.kernel.holder->constant, e.kernel.holder->exponent, A, config.dim, e.s,
                        *config.epsilon);
    } else {
      throw UsageError("step method needs method.n or method.epsilon");
    }
    e.step.emplace(build_grid(A, n, config.dim), e.kernel, e.targets);
    e.step->prepare();
  } else {
    WaveletOptions opt;
    opt.s = e.s;
    opt.split = config.epsilon_split;
    opt.extra_levels = config.extra_levels;
    opt.mode = config.mode;
    opt.conservative_delta = config.conservative_delta;
    if (config.n) {
      opt.fixed_level = *config.n;
      opt.epsilon = config.epsilon.value_or(1.0);
    } else if (config.epsilon) {
      opt.epsilon = *config.epsilon;
    } else {
      throw UsageError("wavelet method needs method.epsilon or method.n");
    }
    e.wavelet = build_wavelet_plan(e.kernel, e.targets, opt, cache);
  }
  e.setup_ms = elapsed_ms(start);
  return e;
}

FieldRealization synthesize(const Experiment& e, std::uint64_t seed, std::uint64_t r) {
  const RngStream rng(seed, r);
  FieldRealization f = e.step ? synthesize_step(*e.step, e.measure, rng)
                              : synthesize_wavelet(*e.wavelet, e.measure, rng);
  if (e.wavelet && !e.wavelet->options.fixed_level) f.epsilon = e.wavelet->options.epsilon;
  return f;
}

BatchResult run_batch(const Config& config, CoefficientCache* cache) {
  BatchResult out;
  if (config.realizations == 0) return out;
  const Experiment e = prepare_experiment(config, cache);
  out.realizations.resize(config.realizations);
  parallel_for(config.realizations, config.threads, [&](std::size_t r) {
    out.realizations[r] = synthesize(e, config.seed, r);
    if (config.epsilon) out.realizations[r].epsilon = *config.epsilon;
  });
  out.realizations[0].coefficient_ms = e.setup_ms;
  out.cold_ms = e.setup_ms + out.realizations[0].synthesis_ms;
  std::vector<double> warm;
  for (std::size_t r = 1; r < out.realizations.size(); ++r) warm.push_back(out.realizations[r].synthesis_ms);
  out.warm_median_ms = median(std::move(warm));
  return out;
}

double theoretical_covariance(double a, double b, double h) {
  if (!(a > 0.0)) throw UsageError("theoretical_covariance: a must be positive");
  return std::numbers::pi * a * b * b * std::exp(-h * h / (2.0 * a));
}

ValidationReport covariance_report(const std::vector<FieldRealization>& fields,
                                   const TargetGrid& grid, double a, double b, double tolerance) {
  ValidationReport rep;
  rep.tolerance = tolerance;
  const std::size_t m = static_cast<std::size_t>(grid.resolution);
  const std::size_t stride = grid.size() / m;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& f : fields) {
    for (double v : f.values) sum += v;
    count += f.values.size();
  }
  rep.mean = count ? sum / static_cast<double>(count) : 0.0;
  const std::size_t max_lag = m / 2;
  for (std::size_t L = 0; L <= max_lag; ++L) {
    double acc = 0.0;
    std::size_t pairs = 0;
    for (const auto& f : fields) {
      for (std::size_t i = 0; i + L < m; ++i) {
        const double* row = f.values.data() + i * stride;
        const double* other = f.values.data() + (i + L) * stride;
        for (std::size_t j = 0; j < stride; ++j) acc += (row[j] - rep.mean) * (other[j] - rep.mean);
        pairs += stride;
      }
    }
    const double h = static_cast<double>(L) * grid.spacing();
    rep.lags.push_back(h);
    rep.covariance.push_back(pairs ? acc / static_cast<double>(pairs) : 0.0);
    rep.theory.push_back(theoretical_covariance(a, b, h));
  }
  rep.variance = rep.covariance.front();
  rep.max_deviation = std::abs(rep.mean);
  for (std::size_t i = 0; i < rep.lags.size(); ++i)
    rep.max_deviation = std::max(rep.max_deviation, std::abs(rep.covariance[i] - rep.theory[i]));
  rep.pass = rep.max_deviation <= tolerance;
  return rep;
}

ValidationReport validate_gaussian(const Config& config, std::size_t realizations, double tolerance,
                                   int max_attempts) {
  const MeasureSpec m = make_measure(config.measure, config.measure_params);
  const auto* st = std::get_if<Stable>(&m);
  const bool gaussian = std::holds_alternative<Gaussian>(m) || (st && st->alpha == 2.0 && st->beta == 0.0);
  if (!gaussian) throw UsageError("validate-gaussian: measure must be Gaussian");
  if (config.kernel != "gaussian_bell") throw UsageError("validate-gaussian: kernel must be gaussian_bell");
  const auto a = config.kernel_params.find("a");
  if (a == config.kernel_params.end()) throw UsageError("validate-gaussian: kernel.a is required");
  const double b = config.kernel_params.count("b") ? config.kernel_params.at("b") : 1.0;

  Config run = config;
  run.realizations = realizations;
  if (!run.n && !run.epsilon) run.epsilon = 0.25;
  ValidationReport rep;
  for (int attempt = 0; attempt < std::max(1, max_attempts); ++attempt) {
    run.seed = attempt == 0 ? config.seed : mix64(config.seed + static_cast<std::uint64_t>(attempt));
    const BatchResult batch = run_batch(run);
    rep = covariance_report(batch.realizations, run.grid, a->second, b, tolerance);
    rep.attempts = attempt + 1;
    rep.n = batch.realizations.empty() ? 0 : batch.realizations.front().n;
    if (rep.pass) break;
    if (run.n) *run.n *= 2;
    else *run.epsilon *= 0.5;
  }
  return rep;
}

Counters count_summands(const std::string& method, int n, int d) {
  if (n < 0 || d < 1) throw UsageError("count_summands: need n >= 0 and d >= 1");
  Counters c;
  if (method == "step") {
    if (n < 1) throw UsageError("count_summands: step method needs n >= 1");
    c.summands = 1;
    for (int i = 0; i < d; ++i) c.summands *= static_cast<std::uint64_t>(2 * n);
    c.random_variables = c.summands;
  } else if (method == "wavelet") {
    c.summands = 1 + (std::uint64_t{1} << (d - 1)) * static_cast<std::uint64_t>(d) *
                         ((std::uint64_t{1} << (n + 1)) - 1);
    c.random_variables = std::uint64_t{1} << (d * (n + 1));
  } else {
    throw UsageError("count_summands: method must be step or wavelet");
  }
  return c;
}

FieldRealization shot_noise_direct(const KernelSpec& kernel, double intensity, const Box& window,
                                   const std::vector<Point>& targets, const RngStream& rng) {
  if (!(intensity >= 0.0)) throw UsageError("shot_noise_direct: intensity must be nonnegative");
  RngStream stream = rng;
  FieldRealization out;
  out.values.assign(targets.size(), 0.0);
  long long points = 0;
  const double mean = intensity * window.volume();
  if (mean > 0.0) {
    std::poisson_distribution<long long> count(mean);
    points = count(stream);
  }
  Point x(window.dim());
  for (long long p = 0; p < points; ++p) {
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = window.lo[i] + (window.hi[i] - window.lo[i]) * stream.uniform();
    for (std::size_t t = 0; t < targets.size(); ++t) out.values[t] += eval_kernel(kernel, targets[t], x);
  }
  out.method = "shot_noise";
  out.measure = describe(Poisson{intensity});
  out.kernel = kernel.id;
  out.seed = rng.seed();
  out.stream = rng.stream_id();
  out.counters.summands = static_cast<std::uint64_t>(points);
  out.counters.random_variables = static_cast<std::uint64_t>(points) * (1 + window.dim());
  return out;
}

}  // namespace idfield
