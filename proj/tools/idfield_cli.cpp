#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "idfield/coefficient_cache.hpp"
#include "idfield/error_metrics.hpp"
#include "idfield/errors.hpp"
#include "idfield/export.hpp"
#include "idfield/harness.hpp"

namespace {

using namespace idfield;

enum Exit { kOk = 0, kUsage = 1, kNumerical = 2, kValidation = 3 };

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> realizations;
  std::string out;
  std::string format;
  std::string coef_cache;
  std::optional<int> threads;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "config file")->required();
  app->add_option("--seed", f.seed, "base seed");
  app->add_option("--realizations", f.realizations, "number of realizations");
  app->add_option("--out", f.out, "output path");
  app->add_option("--format", f.format, "csv, bin or gnuplot")
      ->check(CLI::IsMember({"csv", "bin", "gnuplot"}));
  app->add_option("--coef-cache", f.coef_cache, "directory for cached wavelet coefficients");
  app->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
}

Config resolve(const CommonFlags& f) {
  Config c = load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.realizations) c.realizations = *f.realizations;
  if (!f.out.empty()) c.out = f.out;
  if (!f.format.empty()) c.format = f.format;
  if (f.threads) c.threads = *f.threads;
  return c;
}

std::optional<CoefficientCache> make_cache(const CommonFlags& f) {
  if (f.coef_cache.empty()) return std::nullopt;
  return std::optional<CoefficientCache>(std::in_place, std::filesystem::path(f.coef_cache));
}

int cmd_simulate(const CommonFlags& f) {
  const Config c = resolve(f);
  auto cache = make_cache(f);
  const BatchResult batch = run_batch(c, cache ? &*cache : nullptr);
  if (!c.out.empty()) export_fields(c.out, c.format, batch.realizations, c.grid);
  std::printf("realizations=%zu cold_ms=%.3f warm_median_ms=%.3f\n", batch.realizations.size(),
              batch.cold_ms, batch.warm_median_ms);
  if (!batch.realizations.empty()) {
    const auto& r = batch.realizations.front();
    std::printf("method=%s n=%d summands=%llu random_variables=%llu\n", r.method.c_str(), r.n,
                static_cast<unsigned long long>(r.counters.summands),
                static_cast<unsigned long long>(r.counters.random_variables));
  }
  return kOk;
}

int cmd_bound(const CommonFlags& f, bool csv) {
  Config c = resolve(f);
  const MeasureSpec m = make_measure(c.measure, c.measure_params);
  const double s = c.s.value_or(default_s(m));
  const Experiment e = prepare_experiment(c);
  const KernelSpec& k = e.kernel;
  const double A = k.support_halfwidth;
  const int d = c.dim;
  std::ostringstream table;
  const char sep = csv ? ',' : '\t';
  table << "quantity" << sep << "value\n";
  auto row = [&](const std::string& name, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    table << name << sep << buf << '\n';
  };
  row("s", s);
  row("A", A);
  if (e.tail > 0.0) row("tail_norm", e.tail);
  if (e.step && k.holder) {
    const int n = e.step->grid().resolution();
    row("n", n);
    row("bound_holder", bound_holder(k.holder->constant, k.holder->exponent, A, d, s, n));
    if (d >= 2) row("bound_polar", bound_polar(k.holder->constant, k.holder->exponent, A, d, s, n));
    const Point& t = e.targets.front();
    const Function fk = [&](std::span<const double> x) { return eval_kernel(k, t, x); };
    const Function g = [&](std::span<const double> x) { return e.step->approximant(0, x); };
    ErrOptions opt;
    opt.rel_tol = 1e-4;
    opt.initial_divisions = static_cast<std::size_t>(2 * n);
    row("oracle_err_s_first_target", err_s(fk, g, s, k.support(), opt).value);
  }
  if (e.wavelet) {
    row("eps1", e.wavelet->eps1);
    row("eps2", e.wavelet->eps2);
    row("finest_level", e.wavelet->finest_level);
    const auto& tp = e.wavelet->targets.front();
    row("m_t_first_target", tp.base_level);
    row("eps_star_first_target", tp.eps_star);
    row("delta_first_target", tp.delta);
    row("selected_first_target", static_cast<double>(tp.selection.positions.size()));
  }
  if (const auto* st = std::get_if<Stable>(&m); st && st->alpha < 2.0) {
    for (double p : {0.25, 0.5, 0.75}) {
      const double pp = p * st->alpha;
      if (st->alpha == 1.0 && st->beta != 0.0) break;
      row("c_constant(p=" + std::to_string(pp) + ")", c_constant(st->alpha, st->beta, pp));
    }
  }
  std::cout << table.str();
  if (!c.out.empty()) {
    std::ofstream out(c.out);
    if (!out) throw std::runtime_error("cannot open " + c.out);
    out << table.str();
  }
  return kOk;
}

int cmd_validate(const CommonFlags& f, double tolerance, int attempts) {
  const Config c = resolve(f);
  const ValidationReport rep = validate_gaussian(c, c.realizations, tolerance, attempts);
  if (!c.out.empty()) export_report(c.out, rep);
  std::printf("mean=%.6f variance=%.6f theory_variance=%.6f max_deviation=%.6f tolerance=%.4f n=%d attempts=%d %s\n",
              rep.mean, rep.variance, rep.theory.front(), rep.max_deviation, rep.tolerance, rep.n,
              rep.attempts, rep.pass ? "PASS" : "FAIL");
  return rep.pass ? kOk : kValidation;
}

int cmd_bench(const CommonFlags& f) {
  const Config c = resolve(f);
  auto cache = make_cache(f);
  const BatchResult batch = run_batch(c, cache ? &*cache : nullptr);
  std::printf("method\tcold_ms\twarm_median_ms\tsummands\trandom_variables\n");
  if (batch.realizations.empty()) return kOk;
  const auto& r = batch.realizations.front();
  std::printf("%s\t%.3f\t%.3f\t%llu\t%llu\n", r.method.c_str(), batch.cold_ms, batch.warm_median_ms,
              static_cast<unsigned long long>(r.counters.summands),
              static_cast<unsigned long long>(r.counters.random_variables));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation of infinitely divisible random fields"};
  app.require_subcommand(1);

  CommonFlags simulate_flags, bound_flags, validate_flags, bench_flags;
  auto* simulate = app.add_subcommand("simulate", "synthesize field realizations");
  add_common(simulate, simulate_flags);

  auto* bound = app.add_subcommand("bound", "print error bounds and oracle errors");
  add_common(bound, bound_flags);

  auto* validate = app.add_subcommand("validate-gaussian", "check a Gaussian field's covariance");
  add_common(validate, validate_flags);
  double tolerance = 0.02;
  int attempts = 6;
  validate->add_option("--tolerance", tolerance, "maximum absolute deviation");
  validate->add_option("--attempts", attempts, "precision increases before giving up");

  auto* bench = app.add_subcommand("bench", "time cold and warm realizations");
  add_common(bench, bench_flags);

  auto* count = app.add_subcommand("count", "summand and random variable counts");
  std::string method = "step";
  int n = 1, dim = 2;
  count->add_option("--method", method)->check(CLI::IsMember({"step", "wavelet"}));
  count->add_option("--n", n)->required();
  count->add_option("--dim", dim);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(simulate_flags);
    if (*bound) return cmd_bound(bound_flags, bound_flags.format == "csv");
    if (*validate) return cmd_validate(validate_flags, tolerance, attempts);
    if (*bench) return cmd_bench(bench_flags);
    if (*count) {
      const Counters c = count_summands(method, n, dim);
      std::printf("summands=%llu random_variables=%llu\n",
                  static_cast<unsigned long long>(c.summands),
                  static_cast<unsigned long long>(c.random_variables));
      return kOk;
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s (estimate %g, achieved %g)\n", e.what(),
                 e.estimate(), e.achieved_tolerance());
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kOk;
}
