#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "idfield/errors.hpp"
#include "idfield/measures.hpp"
#include "idfield/stats.hpp"

using namespace idfield;

namespace {

std::vector<double> draws(const MeasureSpec& m, double volume, std::size_t n, std::uint64_t stream) {
  RngStream rng(2024, stream);
  std::vector<double> out(n);
  for (auto& x : out) x = sample_cell(m, volume, rng);
  return out;
}

struct Moments {
  double mean;
  double variance;
};

Moments moments(const std::vector<double>& xs) {
  Welford w;
  for (double x : xs) w.add(x);
  return {w.mean, w.variance()};
}

}  // namespace

TEST_CASE("zero volume draws zero") {
  for (const MeasureSpec& m : std::vector<MeasureSpec>{Stable{1.5, 0.3}, Stable{1.0, 0.5}, Gaussian{},
                                                        Poisson{3.0}, GammaLevy{2.0}}) {
    RngStream rng(1, 1);
    CHECK(sample_cell(m, 0.0, rng) == 0.0);
  }
}

TEST_CASE("negative volume is a usage error") {
  RngStream rng(1, 1);
  CHECK_THROWS_AS(sample_cell(GammaLevy{1.0}, -0.1, rng), UsageError);
}

TEST_CASE("stable cell scale is volume^(1/alpha)") {
  const double sigma = std::pow(0.04, 1.0 / 1.5);
  CHECK(sigma == doctest::Approx(0.11696).epsilon(1e-4));
  RngStream a(3, 3), b(3, 3);
  for (int i = 0; i < 100; ++i)
    CHECK(sample_cell(Stable{1.5, 0.2}, 0.04, a) == sample_stable(1.5, 0.2, sigma, b));
}

TEST_CASE("stable scaling law") {
  const std::size_t N = 40000;
  for (const auto& [alpha, beta] : std::vector<std::pair<double, double>>{
           {0.8, 0.0}, {1.5, 0.0}, {1.5, 0.5}, {1.9, -0.7}}) {
    RngStream rng(11, static_cast<std::uint64_t>(alpha * 100 + beta * 10 + 50));
    std::vector<double> sums(N), singles(N);
    const double c = std::pow(2.0, 1.0 / alpha);
    for (std::size_t i = 0; i < N; ++i) {
      sums[i] = (sample_stable(alpha, beta, 1.0, rng) + sample_stable(alpha, beta, 1.0, rng)) / c;
      singles[i] = sample_stable(alpha, beta, 1.0, rng);
    }
    CHECK_MESSAGE(ks_two_sample(sums, singles).passes(), "alpha=" << alpha << " beta=" << beta);
  }
}

TEST_CASE("alpha = 1 skewed: sum of two unit draws is S_1(2, beta, 0)") {
  // S_1 is not strictly stable: X1 + X2 = 2 X + (2/pi) beta 2 ln 2.
  const double beta = 0.6;
  const std::size_t N = 40000;
  RngStream rng(12, 1);
  std::vector<double> sums(N), doubles(N);
  for (std::size_t i = 0; i < N; ++i) {
    sums[i] = sample_stable(1.0, beta, 1.0, rng) + sample_stable(1.0, beta, 1.0, rng);
    doubles[i] = sample_stable(1.0, beta, 2.0, rng);
  }
  CHECK(ks_two_sample(sums, doubles).passes());
}

TEST_CASE("closed-form stable laws") {
  const std::size_t N = 40000;
  std::mt19937_64 g(77);
  SUBCASE("alpha = 1, beta = 0 is Cauchy") {
    std::cauchy_distribution<double> cauchy(0.0, 0.7);
    RngStream rng(13, 1);
    std::vector<double> a(N), b(N);
    for (std::size_t i = 0; i < N; ++i) {
      a[i] = sample_stable(1.0, 0.0, 0.7, rng);
      b[i] = cauchy(g);
    }
    CHECK(ks_two_sample(a, b).passes());
  }
  SUBCASE("alpha = 1/2, beta = 1 is Levy") {
    std::normal_distribution<double> n01;
    RngStream rng(13, 2);
    std::vector<double> a(N), b(N);
    for (std::size_t i = 0; i < N; ++i) {
      a[i] = sample_stable(0.5, 1.0, 1.3, rng);
      const double z = n01(g);
      b[i] = 1.3 / (z * z);
    }
    CHECK(ks_two_sample(a, b).passes());
  }
}

TEST_CASE("alpha = 2 reduces to Normal(0, 2v)") {
  const double v = 0.3;
  const std::size_t N = 100000;
  const Moments m = moments(draws(Stable{2.0, 0.0}, v, N, 5));
  CHECK(std::abs(m.mean) < 4 * std::sqrt(2 * v / N));
  CHECK(std::abs(m.variance / (2 * v) - 1) < 0.05);
  const Moments g = moments(draws(Gaussian{}, v, N, 6));
  CHECK(std::abs(g.variance / (2 * v) - 1) < 0.05);
}

TEST_CASE("gamma and poisson moments") {
  const std::size_t N = 100000;
  const Moments g = moments(draws(GammaLevy{2.0}, 1.0, N, 7));
  CHECK(g.mean == doctest::Approx(0.5).epsilon(0.02));
  CHECK(g.variance == doctest::Approx(0.25).epsilon(0.03));
  const Moments p = moments(draws(Poisson{3.0}, 0.5, N, 8));
  CHECK(p.mean == doctest::Approx(1.5).epsilon(0.02));
  CHECK(p.variance == doctest::Approx(1.5).epsilon(0.03));
}

TEST_CASE("gamma additivity in distribution") {
  const std::size_t N = 40000;
  RngStream rng(21, 0);
  std::vector<double> joined(N), split(N);
  for (std::size_t i = 0; i < N; ++i) {
    joined[i] = sample_cell(GammaLevy{1.5}, 0.7, rng);
    split[i] = sample_cell(GammaLevy{1.5}, 0.3, rng) + sample_cell(GammaLevy{1.5}, 0.4, rng);
  }
  CHECK(ks_two_sample(joined, split).passes());
}

TEST_CASE("sample_partition") {
  const std::vector<Box> cells{Box{{0.0, 0.0}, {1.0, 1.0}}, Box{{1.0, 0.0}, {2.0, 1.0}}};
  SUBCASE("two unit gamma cells sum to Gamma(2, 1)") {
    Welford w;
    for (std::uint64_t r = 0; r < 100000; ++r) {
      const auto v = sample_partition(GammaLevy{1.0}, cells, RngStream(8, r));
      w.add(v[0] + v[1]);
    }
    CHECK(w.mean == doctest::Approx(2.0).epsilon(0.01));
    CHECK(w.variance() == doctest::Approx(2.0).epsilon(0.03));
  }
  SUBCASE("cell i uses sub-stream i") {
    const RngStream rng(9, 4);
    const auto v = sample_partition(Stable{1.2, 0.1}, cells, rng);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      RngStream sub = rng.substream(i);
      CHECK(v[i] == sample_cell(Stable{1.2, 0.1}, 1.0, sub));
    }
    CHECK(sample_equal_cells(Stable{1.2, 0.1}, 2, 1.0, rng) == v);
  }
  SUBCASE("empty and overlapping") {
    CHECK(sample_partition(Gaussian{}, std::vector<Box>{}, RngStream(1, 1)).empty());
    const std::vector<Box> bad{Box{{0.0, 0.0}, {1.0, 1.0}}, Box{{0.5, 0.5}, {1.5, 1.5}}};
    CHECK_THROWS_AS(sample_partition(Gaussian{}, bad, RngStream(1, 1)), UsageError);
  }
  SUBCASE("same stream replays identical bits") {
    const auto a = sample_partition(GammaLevy{0.5}, cells, RngStream(10, 10));
    const auto b = sample_partition(GammaLevy{0.5}, cells, RngStream(10, 10));
    CHECK(a == b);
  }
}

TEST_CASE("spot descriptors") {
  const Point x{0.1, 0.2};
  const auto gamma = spot_descriptor(GammaLevy{2.0});
  REQUIRE(gamma);
  CHECK(gamma->mean(x) == doctest::Approx(0.5));
  CHECK(gamma->variance(x) == doctest::Approx(0.25));
  CHECK_FALSE(spot_descriptor(Stable{1.5, 0.0}));
  const auto poisson = spot_descriptor(Poisson{4.0});
  REQUIRE(poisson);
  CHECK(poisson->mean(x) == doctest::Approx(4.0));
  // Campbell on a unit cell: E Lambda(cell) = intensity.
  const Moments p = moments(draws(Poisson{4.0}, 1.0, 50000, 14));
  CHECK(p.mean == doctest::Approx(poisson->mean(x)).epsilon(0.02));
  const auto gauss = spot_descriptor(Gaussian{});
  REQUIRE(gauss);
  CHECK(gauss->variance(x) == doctest::Approx(2.0));
}

TEST_CASE("make_measure") {
  const MeasureSpec m = make_measure("stable", {{"alpha", 1.2}, {"beta", -0.5}});
  REQUIRE(std::holds_alternative<Stable>(m));
  CHECK(std::get<Stable>(m).alpha == 1.2);
  CHECK(std::holds_alternative<GammaLevy>(make_measure("gamma_levy", {{"theta", 3.0}})));
  CHECK_THROWS_AS(make_measure("levy", {}), UsageError);
  CHECK_THROWS_AS(make_measure("poisson", {{"rate", 1.0}}), UsageError);
  CHECK_THROWS_AS(make_measure("stable", {{"alpha", 2.5}}), UsageError);
  CHECK_THROWS_AS(make_measure("stable", {{"alpha", 1.5}, {"beta", 2.0}}), UsageError);
  CHECK_THROWS_AS(make_measure("gamma_levy", {{"theta", 0.0}}), UsageError);
  CHECK_FALSE(describe(m).empty());
}
