#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "traceport/error.hpp"
#include "traceport/wasserstein.hpp"

using namespace traceport;

namespace {

const std::vector<double> kLine{0.0, 0.1, 0.5, 0.9, 1.0};
// 0 -> 0.0, 1 -> 0.1, 2 -> 0.5, 3 -> 0.9, 4 -> 1.0
const FiniteMetricSpace& line() {
  static const FiniteMetricSpace s = interval_space(kLine);
  return s;
}

DiscreteMeasure half(std::size_t a, std::size_t b) { return DiscreteMeasure({a, b}, {0.5, 0.5}); }

double plan_cost(const TransportPlan& plan, const FiniteMetricSpace& s, double p) {
  double c = 0.0;
  for (std::size_t i = 0; i < plan.source_support.size(); ++i) {
    for (std::size_t j = 0; j < plan.target_support.size(); ++j) {
      c += plan.coupling[i][j] * std::pow(s(plan.source_support[i], plan.target_support[j]), p);
    }
  }
  return std::pow(c, 1.0 / p);
}

}  // namespace

TEST_CASE("wp_primal examples") {
  const auto mu = half(0, 2);
  const auto nu = half(1, 3);
  const auto same = wp_primal(line(), mu, mu, 1.0);
  CHECK(same.value == 0.0);
  const auto r1 = wp_primal(line(), mu, nu, 1.0);
  CHECK(r1.value == doctest::Approx(0.25));
  const auto r2 = wp_primal(line(), mu, nu, 2.0);
  CHECK(r2.value == doctest::Approx(std::sqrt(0.085)));
  REQUIRE(std::holds_alternative<TransportPlan>(r2.witness));
  const auto& plan = std::get<TransportPlan>(r2.witness);
  CHECK(coupling_error(plan, mu, nu) <= 1e-12);
  CHECK(plan_cost(plan, line(), 2.0) == doctest::Approx(r2.value));
  CHECK_THROWS_AS(wp_primal(line(), mu, nu, std::numeric_limits<double>::infinity()),
                  DomainError);
  CHECK_THROWS_AS(wp_primal(line(), mu, nu, 0.5), DomainError);
}

TEST_CASE("wp_primal with unequal weights uses the transport solver") {
  const DiscreteMeasure mu({0, 4}, {0.3, 0.7});
  const DiscreteMeasure nu({1, 2, 3}, {0.2, 0.2, 0.6});
  const auto cap0 = wp_primal(line(), mu, nu, 1.0, WpOptions{0});
  const auto expanded = wp_primal(line(), mu, nu, 1.0);
  CHECK(cap0.method == "min_cost_flow");
  CHECK(expanded.value == doctest::Approx(cap0.value).epsilon(1e-12));
  // Hand value: 0.2*0.1 + 0.1*0.5 + 0.1*0.5 + 0.6*0.1 = 0.18.
  CHECK(cap0.value == doctest::Approx(0.18));
}

TEST_CASE("wp_quantile examples") {
  const auto leb = Measure1D::lebesgue();
  CHECK(wp_quantile(leb, leb, 2.0) == 0.0);
  CHECK(wp_quantile(leb, Measure1D::uniform(0.0, 0.5), 1.0) == doctest::Approx(0.25));
  const std::vector<double> x{0.0, 0.5};
  const std::vector<double> y{0.1, 0.9};
  const std::vector<double> w{0.5, 0.5};
  CHECK(wp_quantile(Measure1D::from_atoms(x, w), Measure1D::from_atoms(y, w), 1.0) ==
        doctest::Approx(0.25));
  CHECK(winf_quantile(Measure1D::from_atoms(x, w), Measure1D::from_atoms(y, w)) ==
        doctest::Approx(0.4));
  CHECK(winf_quantile(leb, Measure1D::uniform(0.0, 0.5)) == doctest::Approx(0.5));
}

TEST_CASE("wp_quantile of diffuse measures against quadrature") {
  const auto a = Measure1D::from_cdf([](double x) { return x * x; }, 32);
  const auto b = Measure1D::from_cdf([](double x) { return std::sqrt(x); }, 32);
  for (double p : {1.0, 2.0, 3.0}) {
    const double num = oracle::simpson(
        [&](double t) { return std::pow(std::abs(a.quantile(t) - b.quantile(t)), p); }, 0.0,
        1.0 - 1e-12, 200000);
    CHECK(wp_quantile(a, b, p) == doctest::Approx(std::pow(num, 1.0 / p)).epsilon(1e-6));
  }
}

TEST_CASE("winf examples") {
  CHECK(winf(line(), DiscreteMeasure::dirac(0), DiscreteMeasure::dirac(3)).value ==
        doctest::Approx(0.9));
  CHECK(winf(line(), DiscreteMeasure::dirac(0), half(0, 4)).value == 1.0);
  const auto r = winf(line(), half(0, 2), half(1, 3));
  CHECK(r.value == doctest::Approx(0.4));
  CHECK(r.method == "bottleneck_matching");
  REQUIRE(std::holds_alternative<Matching>(r.witness));
  const auto t = winf(line(), DiscreteMeasure({0, 4}, {0.3, 0.7}),
                      DiscreteMeasure({1, 3}, {0.5, 0.5}), WpOptions{0});
  CHECK(t.method == "threshold_flow");
  CHECK(t.value == doctest::Approx(0.9));
}

TEST_CASE("w1_dual examples") {
  const auto zero = w1_dual(line(), half(0, 2), half(0, 2));
  CHECK(zero.value == doctest::Approx(0.0).epsilon(1e-12));
  const auto unit = w1_dual(line(), DiscreteMeasure::dirac(0), DiscreteMeasure::dirac(4));
  CHECK(unit.value == doctest::Approx(1.0));
  REQUIRE(std::holds_alternative<DualPotential>(unit.witness));
  const auto& f = std::get<DualPotential>(unit.witness);
  // The potential is 1-Lipschitz on the listed points.
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    for (std::size_t j = 0; j < f.points.size(); ++j) {
      CHECK(f.values[i] - f.values[j] <= line()(f.points[i], f.points[j]) + 1e-9);
    }
  }
  CHECK(w1_dual(line(), half(0, 2), half(1, 3)).value == doctest::Approx(0.25));
}

TEST_CASE("levy_prokhorov examples and oracle") {
  CHECK(levy_prokhorov(line(), half(0, 2), half(0, 2)) == 0.0);
  CHECK(levy_prokhorov(line(), DiscreteMeasure::dirac(0), DiscreteMeasure::dirac(4)) ==
        doctest::Approx(1.0));
  const double lp = levy_prokhorov(line(), DiscreteMeasure::dirac(0), half(0, 4));
  CHECK(lp == doctest::Approx(0.5));
  CHECK(lp < winf(line(), DiscreteMeasure::dirac(0), half(0, 4)).value);

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng() % 6;
    const auto d = oracle::random_metric(rng, n);
    const FiniteMetricSpace s(d);
    std::vector<double> a(n);
    std::vector<double> b(n);
    double ta = 0.0;
    double tb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
      ta += a[i];
      tb += b[i];
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      a[i] /= ta;
      b[i] /= tb;
    }
    const DiscreteMeasure mu(idx, a);
    const DiscreteMeasure nu(idx, b);
    CHECK(levy_prokhorov(s, mu, nu) ==
          doctest::Approx(oracle::levy_prokhorov(d, a, b)).epsilon(1e-9));
    CHECK(levy_prokhorov(s, mu, nu) <= winf(s, mu, nu).value + 1e-12);
  }

  std::vector<double> pts;
  for (int i = 0; i < 21; ++i) pts.push_back(i / 20.0);
  const auto big = interval_space(pts);
  std::vector<std::size_t> all(21);
  std::iota(all.begin(), all.end(), std::size_t{0});
  CHECK_THROWS_WITH_AS(levy_prokhorov(big, DiscreteMeasure::uniform(all),
                                      DiscreteMeasure::dirac(0)),
                       doctest::Contains("support too large for exact d_P"),
                       ValidationError);
}

TEST_CASE("schatten seminorm examples") {
  const EigenvalueProfile unit({{PiecewiseLinear::constant(1.0), 3}});
  for (double p : {1.0, 2.0, 5.0}) {
    CHECK(schatten_p_seminorm(unit, Measure1D::lebesgue(), p) == doctest::Approx(1.0));
    CHECK(schatten_p_seminorm(unit, Measure1D::dirac(0.3), p) == doctest::Approx(1.0));
  }
  const EigenvalueProfile ramp({{PiecewiseLinear::identity(), 4}});
  CHECK(schatten_p_seminorm(ramp, Measure1D::lebesgue(), 1.0) == doctest::Approx(0.5));
  CHECK(schatten_p_seminorm(ramp, Measure1D::lebesgue(), 2.0) ==
        doctest::Approx(1.0 / std::sqrt(3.0)));
}

TEST_CASE("random equal-weight instances agree with brute force") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng() % 6;
    const auto d = oracle::random_metric(rng, 2 * n);
    const FiniteMetricSpace s(d);
    std::vector<std::size_t> xs(n);
    std::vector<std::size_t> ys(n);
    oracle::Matrix c(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = i;
      ys[i] = n + i;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) c[i][j] = d[xs[i]][ys[j]];
    }
    const auto mu = DiscreteMeasure::uniform(xs);
    const auto nu = DiscreteMeasure::uniform(ys);
    for (double p : {1.0, 2.0, 3.0}) {
      CHECK(wp_primal(s, mu, nu, p).value ==
            doctest::Approx(oracle::permutation_wp(c, p)).epsilon(1e-9));
    }
    CHECK(winf(s, mu, nu).value == oracle::permutation_bottleneck(c));
    CHECK(w1_dual(s, mu, nu).value ==
          doctest::Approx(wp_primal(s, mu, nu, 1.0).value).epsilon(1e-7));
  }
}
