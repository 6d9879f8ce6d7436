#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "idfield/coefficient_cache.hpp"
#include "idfield/error_metrics.hpp"
#include "idfield/errors.hpp"
#include "idfield/haar.hpp"
#include "idfield/quadrature.hpp"
#include "idfield/stats.hpp"

using namespace idfield;

namespace {

HaarIndex random_index(std::mt19937_64& g, int d, int max_level) {
  std::uniform_int_distribution<int> level(-1, max_level);
  const int k = level(g);
  if (k < 0) return HaarIndex::father_index();
  std::uniform_int_distribution<std::uint32_t> e(1, (1u << d) - 1);
  std::uniform_int_distribution<int> off(0, (1 << k) - 1);
  std::vector<int> offset(static_cast<std::size_t>(d));
  for (auto& o : offset) o = off(g);
  return HaarIndex::detail(e(g), k, offset);
}

// Exact integral of a product of basis functions up to `max_level`: they are
// constant on the cells of the next finer grid.
double gram_entry(const HaarIndex& a, const HaarIndex& b, double A, int d, int max_level) {
  const Integrand f = [&](std::span<const double> x) { return psi_eval(a, x, A, d) * psi_eval(b, x, A, d); };
  CubatureOptions opt;
  opt.abs_tol = 1e-12;
  opt.initial_divisions = std::size_t{1} << (max_level + 1);
  return adaptive_cubature(f, Box::cube(A, static_cast<std::size_t>(d)), opt).value;
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> n01;
  std::vector<double> v(n);
  for (auto& x : v) x = n01(g);
  return v;
}

KernelSpec zero_kernel() {
  KernelSpec k;
  k.id = "zero";
  k.eval = [](std::span<const double>, std::span<const double>) { return 0.0; };
  k.support_halfwidth = 1.0;
  k.exact_cell_integral = [](std::span<const double>, const Box&) { return 0.0; };
  return k;
}

}  // namespace

TEST_CASE("flat layout") {
  for (int d : {1, 2, 3}) {
    const int n = d == 3 ? 2 : 4;
    CHECK(coefficient_count(n, d) == std::size_t{1} << ((n + 1) * d));
    std::size_t details_at_level = 0;
    for (std::size_t p = 0; p < coefficient_count(n, d); ++p) {
      const HaarIndex idx = index_at(p, d);
      CHECK(flat_position(idx, d) == p);
      if (!idx.father && idx.level == 1) ++details_at_level;
    }
    CHECK(details_at_level == ((std::size_t{1} << d) - 1) * (std::size_t{1} << d));
  }
  CHECK(index_at(0, 2).father);
  // Level k starts at 2^{kd}, ordered by e then offset.
  CHECK(flat_position(HaarIndex::detail(1, 0, {0, 0}), 2) == 1);
  CHECK(flat_position(HaarIndex::detail(3, 0, {0, 0}), 2) == 3);
  CHECK(flat_position(HaarIndex::detail(1, 1, {0, 0}), 2) == 4);
  CHECK(flat_position(HaarIndex::detail(1, 1, {0, 1}), 2) == 5);
  CHECK(flat_position(HaarIndex::detail(2, 1, {0, 0}), 2) == 8);
}

TEST_CASE("invalid indices are usage errors") {
  const Point x{0.1, 0.2};
  CHECK_THROWS_AS(psi_eval(HaarIndex::detail(0, 1, {0, 0}), x, 1.0, 2), UsageError);
  CHECK_THROWS_AS(psi_eval(HaarIndex::detail(4, 1, {0, 0}), x, 1.0, 2), UsageError);
  CHECK_THROWS_AS(psi_eval(HaarIndex::detail(1, 1, {2, 0}), x, 1.0, 2), UsageError);
  CHECK_THROWS_AS(psi_eval(HaarIndex::detail(1, -1, {0, 0}), x, 1.0, 2), UsageError);
  CHECK_THROWS_AS(psi_eval(HaarIndex::detail(1, 1, {0}), x, 1.0, 2), UsageError);
}

TEST_CASE("psi_eval values and support") {
  CHECK(psi_eval(HaarIndex::father_index(), Point{0.3, -0.9}, 1.0, 2) == doctest::Approx(0.5));
  const HaarIndex idx = HaarIndex::detail(2, 1, {1, 0});  // e = (1, 0): mother along x
  const Box s = psi_support(idx, 1.0, 2);
  CHECK(s.lo == Point{0.0, -1.0});
  CHECK(s.hi == Point{1.0, 0.0});
  CHECK(psi_eval(idx, Point{0.25, -0.5}, 1.0, 2) == doctest::Approx(1.0));
  CHECK(psi_eval(idx, Point{0.75, -0.5}, 1.0, 2) == doctest::Approx(-1.0));
  CHECK(psi_eval(idx, Point{-0.25, -0.5}, 1.0, 2) == 0.0);
}

TEST_CASE("orthonormality") {
  std::mt19937_64 g(17);
  SUBCASE("unit norm for 20 random indices") {
    for (int i = 0; i < 20; ++i) {
      const HaarIndex idx = random_index(g, 2, 3);
      CHECK(gram_entry(idx, idx, 1.3, 2, 3) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("Gram matrix of 30 distinct indices") {
    std::vector<HaarIndex> idx;
    std::set<std::size_t> seen;
    while (idx.size() < 30) {
      HaarIndex h = random_index(g, 2, 2);
      if (seen.insert(flat_position(h, 2)).second) idx.push_back(h);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = i; j < idx.size(); ++j)
        worst = std::max(worst, std::abs(gram_entry(idx[i], idx[j], 1.0, 2, 2) - (i == j ? 1.0 : 0.0)));
    CHECK(worst < 1e-6);
  }
  SUBCASE("d = 1 and d = 3") {
    for (int d : {1, 3}) {
      for (int i = 0; i < 10; ++i) {
        const HaarIndex a = random_index(g, d, 2), b = random_index(g, d, 2);
        const double expected = flat_position(a, d) == flat_position(b, d) ? 1.0 : 0.0;
        CHECK(gram_entry(a, b, 0.8, d, 2) == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("psi norms in closed form") {
  std::mt19937_64 g(5);
  for (double s : {0.5, 1.0, 1.5, 2.0}) {
    for (int i = 0; i < 5; ++i) {
      const HaarIndex idx = random_index(g, 2, 3);
      const Integrand f = [&](std::span<const double> x) { return std::pow(std::abs(psi_eval(idx, x, 1.2, 2)), s); };
      CubatureOptions opt;
      opt.initial_divisions = 16;
      const double q = std::pow(adaptive_cubature(f, Box::cube(1.2, 2), opt).value, 1 / s);
      CHECK(psi_norm(idx, s, 1.2, 2) == doctest::Approx(q).epsilon(1e-12));
    }
  }
}

TEST_CASE("forward FWT") {
  SUBCASE("one-level butterfly") {
    const std::vector<double> in{3.0, 1.0};
    const auto c = forward_fwt(in, 0, 1);
    REQUIRE(c.size() == 2);
    CHECK(c[0] == doctest::Approx(4.0 / std::numbers::sqrt2));
    CHECK(c[1] == doctest::Approx(2.0 / std::numbers::sqrt2));
  }
  SUBCASE("constant input leaves only the Father") {
    for (int d : {1, 2, 3})
      for (int n = 0; n <= (d == 3 ? 2 : 4); ++n) {
        const std::vector<double> in(coefficient_count(n, d), 2.5);
        const auto c = forward_fwt(in, n, d);
        for (std::size_t p = 1; p < c.size(); ++p) CHECK(std::abs(c[p]) < 1e-12);
        CHECK(c[0] == doctest::Approx(2.5 * std::sqrt(static_cast<double>(in.size()))));
      }
  }
  SUBCASE("round trip and Parseval") {
    for (int d : {1, 2})
      for (int n = 0; n <= 4; ++n) {
        const auto x = random_vector(coefficient_count(n, d), 100 * d + n);
        const auto c = forward_fwt(x, n, d);
        const auto back = inverse_fwt(c, n, d);
        double e2x = 0, e2c = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-13));
          e2x += x[i] * x[i];
          e2c += c[i] * c[i];
        }
        CHECK(e2c == doctest::Approx(e2x).epsilon(1e-13));
      }
  }
  SUBCASE("length mismatch") {
    const std::vector<double> in(5, 1.0);
    CHECK_THROWS_AS(forward_fwt(in, 1, 1), UsageError);
    CHECK_THROWS_AS(inverse_fwt(in, 1, 1), UsageError);
  }
}

TEST_CASE("FWT coefficients equal direct inner products") {
  const KernelSpec py = pyramid(1.0, 1.0, 1.0);
  const Point t{0.13, -0.27};
  const CoefficientSet cs = compute_coefficients(py, t, 3, 1.0, 0.0);
  CHECK(cs.exact);
  std::mt19937_64 g(8);
  for (int i = 0; i < 25; ++i) {
    const HaarIndex idx = random_index(g, 2, 3);
    CHECK(std::abs(cs.at(idx) - inner_product(py, t, idx, 1.0, 1e-8)) <= 1e-8);
  }
}

TEST_CASE("full reconstruction gives cell averages") {
  const KernelSpec ep = epanechnikov(1.0, 1.0, 1.0);
  const Point t{0.1, 0.2};
  const int n = 2;
  const double delta = 1e-9;
  const CoefficientSet cs = compute_coefficients(ep, t, n, 1.0, delta);
  const PiecewiseConstant pc = reconstruct_all(cs, n);
  CellIntegralOptions opt;
  opt.tolerance = 1e-10;
  for (std::size_t c = 0; c < coefficient_count(n, 2); ++c) {
    const Box cell = finest_cell(c, n, 2, 1.0);
    const double avg = cell_integral(ep, t, cell, opt) / cell.volume();
    CHECK(pc(cell.center()) == doctest::Approx(avg).epsilon(1e-6));
  }
}

TEST_CASE("fwt_input_precision") {
  CHECK(fwt_input_precision(2.0, 2, 1, 1.0, 0.01) == doctest::Approx(2.5e-4));
  CHECK(fwt_input_precision(2.0, 2, 1, 1.0, 0.02) == doctest::Approx(2 * fwt_input_precision(2.0, 2, 1, 1.0, 0.01)));
  // s = 1: (2A)^{d/2} 2^{(n+1)d/2} (1 + (2^d - 1)(n + 1)) delta = eps2.
  CHECK(fwt_input_precision(1.0, 2, 2, 0.5, 0.1) == doctest::Approx(0.1 / (1.0 * 8.0 * (1 + 3 * 3))));
  CHECK(fwt_input_precision(1.0, 2, 2, 0.5, 0.1, true) <= fwt_input_precision(1.0, 2, 2, 0.5, 0.1));
  // s < 1 branch: evaluate the bracket by direct summation.
  const double s = 0.6, A = 1.0;
  const int d = 2, n = 3;
  double sum = 1.0;
  for (int k = 0; k <= n; ++k) sum += 3.0 * std::pow(2.0, (d * s - d) * k);
  const double expect = 0.05 / (std::pow(2 * A, d / s - d / 2.0) * std::pow(2.0, (n + 1) * d / 2.0) * std::pow(sum, 1 / s));
  CHECK(fwt_input_precision(s, d, n, A, 0.05) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("FWT error stays within the per-coefficient budget") {
  const KernelSpec py = pyramid(1.0, 1.0, 1.0);
  const Point t{-0.31, 0.44};
  const int n = 3;
  const CoefficientSet exact = compute_coefficients(py, t, n, 1.0, 0.0);
  const double delta = fwt_input_precision(1.5, 2, n, 1.0, 1e-3);
  KernelSpec numeric = py;
  numeric.exact_cell_integral = nullptr;
  const CoefficientSet approx = compute_coefficients(numeric, t, n, 1.0, delta);
  CHECK_FALSE(approx.exact);
  for (std::size_t p = 0; p < exact.values.size(); ++p) {
    const HaarIndex idx = index_at(p, 2);
    const double budget = coefficient_error_budget(idx.father ? -1 : idx.level, n, 2, delta);
    CHECK(std::abs(exact.values[p] - approx.values[p]) <= budget);
  }
  CHECK_THROWS_AS(compute_coefficients(numeric, t, n, 1.0, 0.0), UsageError);
}

TEST_CASE("cut-off bounds") {
  SUBCASE("bounded mode example") {
    const CutoffBound b = cutoff_bound(1.5, 2, 1.0, CutoffMode::bounded, 1.0, 0.0, 1.0);
    CHECK(b.ratio == doctest::Approx(std::pow(2.0, 1.0 / 3.0)));
    KernelSpec k = pyramid(1.0, 1.0, 1.0);
    k.sup_bound = 1.0;
    const CutoffBound lvl = cutoff_level(k, 1.5, 1.0, 0.99, CutoffMode::bounded);
    CHECK(lvl.level == 18);
    CHECK(lvl.at(18) <= 0.99);
    CHECK(lvl.at(17) > 0.99);
  }
  SUBCASE("bounded mode needs d > s") {
    CHECK_THROWS_AS(cutoff_bound(2.0, 2, 1.0, CutoffMode::bounded, 1.0, 0.0, 1.0), UsageError);
    CHECK_THROWS_AS(cutoff_level(pyramid(1.0, 1.0, 1.0, 1), 1.5, 1.0, 0.5, CutoffMode::bounded), UsageError);
  }
  SUBCASE("decay bases") {
    CHECK(cutoff_bound(1.5, 2, 1.0, CutoffMode::holder, 0.0, 2.0, 0.5).ratio ==
          doctest::Approx(std::pow(2.0, 2 / 1.5 + 0.5)));
    CHECK(cutoff_bound(1.5, 2, 1.0, CutoffMode::differentiable, 0.0, 2.0, 0.5).ratio ==
          doctest::Approx(std::pow(2.0, 2 / 1.5 + 1)));
  }
  SUBCASE("minimality in every mode") {
    const KernelSpec g = gaussian_bell(0.05, 1.0, 2, 1.0);
    for (CutoffMode mode : {CutoffMode::bounded, CutoffMode::holder, CutoffMode::differentiable})
      for (double s : {0.5, 1.0, 1.5})
        for (double eps : {2.0, 0.5, 0.01}) {
          const CutoffBound b = cutoff_level(g, s, 1.0, eps, mode);
          CHECK(b.at(b.level) <= eps);
          if (b.level > 0) CHECK(b.at(b.level - 1) > eps);
        }
  }
  SUBCASE("closed forms equal direct tail sums") {
    const double M = 1.7, A = 0.9;
    const int d = 3;
    for (double s : {0.4, 0.9, 1.0, 2.0}) {
      const CutoffBound b = cutoff_bound(s, d, A, CutoffMode::bounded, M, 0.0, 1.0);
      for (int n : {0, 2, 5}) {
        double tail = 0.0;
        if (s < 1.0) {
          for (int k = n + 1; k < n + 400; ++k) tail += std::pow(2.0, (s - d) * k);
          tail = std::pow(7.0 * d * std::pow(M * std::pow(2 * A, d / s), s) * tail, 1 / s);
        } else {
          for (int k = n + 1; k < n + 400; ++k) tail += std::pow(2.0, (1 - d / s) * k);
          tail *= 7.0 * M * d * std::pow(2 * A, d / s);
        }
        CHECK(b.at(n) == doctest::Approx(tail).epsilon(1e-10));
      }
    }
  }
  SUBCASE("mode names") {
    CHECK(parse_cutoff_mode("differentiable") == CutoffMode::differentiable);
    CHECK(to_string(CutoffMode::bounded) == "bounded");
    CHECK_THROWS_AS(parse_cutoff_mode("smooth"), UsageError);
  }
}

TEST_CASE("nbest_select") {
  const int n = 2, d = 2;
  CoefficientSet father_only = make_coefficient_set(std::vector<double>(coefficient_count(n, d), 1.0), n, d, 1.0);
  SUBCASE("Father only") {
    const Selection sel = nbest_select(father_only, 1.5, 0.5, 0.0);
    REQUIRE(sel.positions.size() == 1);
    CHECK(sel.positions[0] == 0);
  }
  SUBCASE("budget covering everything selects nothing") {
    const Selection sel = nbest_select(father_only, 1.5, 1e6, 0.0);
    CHECK(sel.positions.empty());
    CHECK(sel.discarded == doctest::Approx(sel.total));
  }
  SUBCASE("no budget") {
    CHECK_THROWS_AS(nbest_select(father_only, 1.5, 0.1, 0.1), UsageError);
  }
  SUBCASE("budget invariant and minimality") {
    const KernelSpec ep = epanechnikov(1.0, 1.0, 1.0);
    const CoefficientSet cs = compute_coefficients(ep, Point{0.2, -0.1}, 4, 1.0, 1e-8);
    for (double s : {0.6, 1.0, 1.5})
      for (double eps1 : {0.05, 0.2, 0.8}) {
        const double eps_star = 0.3 * eps1;
        const Selection sel = nbest_select(cs, s, eps1, eps_star);
        const double budget = s < 1 ? std::pow(eps1, s) - std::pow(eps_star, s) : eps1 - eps_star;
        auto weight = [&](std::size_t p) {
          const double a = std::abs(cs.values[p]) * psi_norm(index_at(p, 2), s, 1.0, 2);
          return s < 1 ? std::pow(a, s) : a;
        };
        double kept = 0.0;
        for (std::size_t p : sel.positions) kept += weight(p);
        CHECK(sel.total - kept <= budget * (1 + 1e-12));
        if (!sel.positions.empty()) CHECK(sel.total - kept + weight(sel.positions.back()) > budget);
        for (std::size_t i = 1; i < sel.positions.size(); ++i)
          CHECK(weight(sel.positions[i - 1]) >= weight(sel.positions[i]));
      }
  }
  SUBCASE("ties broken by flat position") {
    std::vector<double> values(coefficient_count(1, 2), 0.0);
    for (std::size_t p : {9u, 5u, 13u, 6u}) values[p] = 1.0;  // all level 1
    CoefficientSet cs;
    cs.level = 1;
    cs.dim = 2;
    cs.halfwidth = 1.0;
    cs.values = values;
    const Selection sel = nbest_select(cs, 1.0, 1e-9, 0.0);
    CHECK(sel.positions == std::vector<std::size_t>{5, 6, 9, 13});
  }
}

namespace {

std::vector<double> top_weight_per_level(const KernelSpec& k, const Point& t, int levels, double s) {
  const CoefficientSet cs = compute_coefficients(k, t, levels, 1.0, 1e-9);
  std::vector<double> top(static_cast<std::size_t>(levels) + 1, 0.0);
  for (std::size_t p = 1; p < cs.values.size(); ++p) {
    const HaarIndex idx = index_at(p, 2);
    auto& slot = top[static_cast<std::size_t>(idx.level)];
    slot = std::max(slot, std::abs(cs.values[p]) * psi_norm(idx, s, 1.0, 2));
  }
  return top;
}

}  // namespace

TEST_CASE("largest weights do not grow with level beyond level 1") {
  std::mt19937_64 g(31);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (const KernelSpec& k : {pyramid(1.0, 1.0, 1.0), epanechnikov(1.0, 1.0, 1.0),
                              gaussian_bell(0.5, 1.0, 2, 1.0), gaussian_bell(0.2, 1.0, 2, 1.0)}) {
    for (int trial = 0; trial < 3; ++trial) {
      const auto top = top_weight_per_level(k, {u(g), u(g)}, 6, 1.5);
      for (std::size_t lvl = 2; lvl < top.size(); ++lvl) CHECK_MESSAGE(top[lvl] <= top[lvl - 1] * (1 + 1e-9), k.id);
    }
  }
}

TEST_CASE("a bell narrower than level-1 cells peaks later") {
  // Until the cells resolve the bump, weights grow like 2^{kd(1 - 1/s)}.
  const auto top = top_weight_per_level(gaussian_bell(0.05, 1.0, 2, 1.0), {0.0, 0.0}, 4, 1.5);
  CHECK(top[2] > top[1]);
  CHECK(top[4] < top[3]);
}

TEST_CASE("wavelet integrals") {
  const int z = 2, d = 2;
  const double A = 1.5;
  const std::size_t cells = coefficient_count(z, d);
  const double volume = std::pow(finest_side(A, z), d);
  SUBCASE("Father integral is Lambda of the window over (2A)^{d/2}") {
    const auto inc = sample_equal_cells(GammaLevy{1.0}, cells, volume, RngStream(1, 2));
    const auto ints = wavelet_integrals(inc, z, d, A);
    double total = 0.0;
    for (double v : inc) total += v;
    CHECK(ints[0] == doctest::Approx(total / (2 * A)).epsilon(1e-13));
  }
  SUBCASE("every integral is the basis function summed against increments") {
    const auto inc = sample_equal_cells(Stable{1.3, 0.2}, cells, volume, RngStream(1, 3));
    const auto ints = wavelet_integrals(inc, z, d, A);
    for (std::size_t p = 0; p < cells; ++p) {
      double direct = 0.0;
      for (std::size_t c = 0; c < cells; ++c) direct += psi_eval(index_at(p, d), finest_cell(c, z, d, A).center(), A, d) * inc[c];
      CHECK(ints[p] == doctest::Approx(direct).epsilon(1e-12).scale(1.0));
    }
  }
  SUBCASE("Gaussian isometry: Var of a detail integral is 2") {
    const std::size_t p = flat_position(HaarIndex::detail(3, 1, {1, 0}), d);
    Welford w;
    for (std::uint64_t r = 0; r < 100000; ++r) {
      const auto inc = sample_equal_cells(Gaussian{}, cells, volume, RngStream(2, r));
      w.add(wavelet_integrals(inc, z, d, A)[p]);
    }
    CHECK(w.variance() == doctest::Approx(2.0).epsilon(0.05));
  }
}

TEST_CASE("wavelet plan and synthesis") {
  const std::vector<Point> targets{{0.0, 0.0}, {0.21, -0.4}, {-0.33, 0.1}};
  SUBCASE("zero kernel gives a zero field") {
    WaveletOptions opt;
    opt.fixed_level = 2;
    const WaveletPlan plan = build_wavelet_plan(zero_kernel(), targets, opt);
    const FieldRealization f = synthesize_wavelet(plan, Stable{1.5, 0.0}, RngStream(1, 1));
    CHECK(f.values == std::vector<double>(3, 0.0));
  }
  SUBCASE("split_epsilon") {
    const auto [e1, e2] = split_epsilon(1.0, 0.99, 1.5);
    CHECK(e1 == doctest::Approx(0.99));
    CHECK(e2 == doctest::Approx(0.01));
    const auto [f1, f2] = split_epsilon(0.5, 0.9, 0.5);
    CHECK(std::pow(f1, 0.5) + std::pow(f2, 0.5) == doctest::Approx(std::pow(0.5, 0.5)));
  }
  SUBCASE("counters, accuracy and cache") {
    const KernelSpec py = pyramid(1.0, 1.0, 1.0);
    WaveletOptions opt;
    opt.s = 1.5;
    opt.epsilon = 0.5;
    CoefficientCache cache;
    const WaveletPlan plan = build_wavelet_plan(py, targets, opt, &cache);
    const WaveletPlan again = build_wavelet_plan(py, targets, opt, &cache);
    CHECK(cache.hits() == targets.size());
    const FieldRealization f = synthesize_wavelet(plan, GammaLevy{1.0}, RngStream(4, 4));
    const FieldRealization h = synthesize_wavelet(again, GammaLevy{1.0}, RngStream(4, 4));
    CHECK(f.values == h.values);
    std::size_t most = 0;
    for (const auto& tp : plan.targets) {
      most = std::max(most, tp.selection.positions.size());
      CHECK(tp.base_level + opt.extra_levels <= plan.finest_level);
      const PiecewiseConstant approx = reconstruct(*tp.coefficients, tp.selection.positions);
      const Function kf = [&](std::span<const double> x) { return eval_kernel(py, tp.target, x); };
      const Function gf = [&](std::span<const double> x) { return approx(x); };
      ErrOptions eo;
      eo.rel_tol = 1e-4;
      eo.initial_divisions = std::size_t{1} << (tp.coefficients->level + 1);
      CHECK(err_s(kf, gf, 1.5, py.support(), eo).value <= opt.epsilon);
    }
    CHECK(f.counters.summands == most);
    CHECK(f.counters.random_variables == coefficient_count(plan.finest_level, 2));
  }
}
