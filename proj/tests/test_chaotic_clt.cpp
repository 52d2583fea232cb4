#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "traceport/chaotic_clt.hpp"
#include "traceport/error.hpp"
#include "traceport/wasserstein.hpp"

using namespace traceport;

TEST_CASE("pm map examples") {
  CHECK(pm_map(0.25, 0.0) == 0.0);
  CHECK(pm_map(0.25, 0.75) == 0.5);
  CHECK(pm_map(0.25, 0.5) == 0.0);
  CHECK(pm_map(0.25, 0.25) == doctest::Approx(0.460224).epsilon(1e-6));
  CHECK(pm_map(0.4, 1.0) == 1.0);
  CHECK_THROWS_AS(PMParams{0.5}.validate(), DomainError);
  CHECK_THROWS_AS(PMParams{0.0}.validate(), DomainError);
  CHECK_NOTHROW(PMParams{0.1}.validate());
}

TEST_CASE("orbit from 3/4") {
  PMParams p;
  p.steps = 5;
  const auto o = orbit(p, 0.75);
  REQUIRE(o.size() == 5);
  CHECK(o[0] == 0.75);
  CHECK(o[1] == 0.5);
  CHECK(o[2] == 0.0);
  CHECK(o[3] == 0.0);
  CHECK(o[4] == 0.0);
}

TEST_CASE("initial point is reproducible and inside (0.1, 0.9)") {
  PMParams a;
  PMParams b;
  CHECK(initial_point(a) == initial_point(b));
  for (std::uint64_t s = 0; s < 50; ++s) {
    a.seed = s;
    const double t = initial_point(a);
    CHECK(t > 0.1);
    CHECK(t < 0.9);
  }
}

TEST_CASE("w1_to_normal against numeric quadrature") {
  std::mt19937_64 rng(97);
  std::normal_distribution<double> g(0.0, 1.5);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<double> x;
    std::vector<double> w;
    std::vector<std::pair<double, double>> atoms;
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(g(rng));
      w.push_back(u(rng));
      atoms.emplace_back(x.back(), w.back());
    }
    const double sigma2 = 0.2 + u(rng);
    CHECK(w1_to_normal(x, w, sigma2) ==
          doctest::Approx(oracle::w1_to_normal_numeric(atoms, std::sqrt(sigma2))).epsilon(1e-6));
  }
  const std::vector<double> zero{0.0};
  const std::vector<double> one{1.0};
  // E|Z| for Z ~ N(0, 1).
  CHECK(w1_to_normal(zero, one, 1.0) == doctest::Approx(std::sqrt(2.0 / M_PI)));
  // Scaling weights changes nothing.
  const std::vector<double> xs{-1.0, 0.5, 2.0};
  const std::vector<double> w1{1.0, 2.0, 3.0};
  const std::vector<double> w2{2.0, 4.0, 6.0};
  CHECK(w1_to_normal(xs, w1, 0.7) == doctest::Approx(w1_to_normal(xs, w2, 0.7)));
  const std::vector<double> bad{-1.0, 2.0, 0.0};
  CHECK_THROWS_AS(w1_to_normal(xs, bad, 1.0), ValidationError);
  CHECK_THROWS(w1_to_normal(xs, w1, 0.0));
}

TEST_CASE("quantile W1 agrees with the transport LP on orbit subsamples") {
  PMParams p;
  p.steps = 200;
  const auto o = orbit(p, initial_point(p));
  p.seed += 1;
  const auto o2 = orbit(p, initial_point(p));
  for (std::size_t n : {10u, 40u}) {
    std::vector<double> pts(o.begin(), o.begin() + n);
    pts.insert(pts.end(), o2.begin(), o2.begin() + n);
    std::vector<double> sorted = pts;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const auto space = interval_space(sorted);
    auto as_measure = [&](std::size_t from) {
      std::vector<std::size_t> idx;
      for (std::size_t i = from; i < from + n; ++i) {
        idx.push_back(static_cast<std::size_t>(
            std::lower_bound(sorted.begin(), sorted.end(), pts[i]) - sorted.begin()));
      }
      std::vector<std::size_t> support = idx;
      std::sort(support.begin(), support.end());
      support.erase(std::unique(support.begin(), support.end()), support.end());
      std::vector<double> w(support.size(), 0.0);
      for (std::size_t i : idx) {
        w[std::lower_bound(support.begin(), support.end(), i) - support.begin()] +=
            1.0 / static_cast<double>(n);
      }
      return DiscreteMeasure(support, w);
    };
    const std::vector<double> a(pts.begin(), pts.begin() + n);
    const std::vector<double> b(pts.begin() + n, pts.end());
    const double q = wp_quantile(empirical_measure(a), empirical_measure(b), 1.0);
    const double lp = wp_primal(space, as_measure(0), as_measure(n), 1.0).value;
    CHECK(q == doctest::Approx(lp).epsilon(1e-9));
  }
}

TEST_CASE("invariant measure estimate") {
  PMParams p;
  p.steps = 200000;
  const auto est = invariant_measure_estimate(p, 1000);
  CHECK_FALSE(est.degenerate);
  // Every bin of width 1/100 receives mass.
  for (int i = 0; i < 100; ++i) {
    CHECK(est.measure.cdf((i + 1) / 100.0) - est.measure.cdf(i / 100.0 - 1e-12) > 0.0);
  }
  PMParams q = p;
  q.seed += 7;
  const auto other = invariant_measure_estimate(q, 1000);
  CHECK(wp_quantile(est.measure, other.measure, 1.0) < 0.05);

  const auto fixed = invariant_measure_estimate(p, 1000, 0.75);
  CHECK(fixed.degenerate);
  p.steps = 5000;
  CHECK_THROWS_AS(invariant_measure_estimate(p, 1000), ValidationError);
}

TEST_CASE("variance estimators") {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> g;
  std::vector<double> v(40000);
  for (double& x : v) x = g(rng);
  const auto e = estimate_variance(v);
  CHECK(e.block_length == 200);
  CHECK(e.lags == 34);
  CHECK(e.block == doctest::Approx(1.0).epsilon(0.15));
  CHECK(e.green_kubo == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("clt experiment") {
  PMParams p;
  p.steps = 20000;
  const std::vector<std::size_t> cps{1000, 20000};
  const auto f = PiecewiseLinear({{0, -1}, {1, 1}});
  const auto r = clt_experiment(p, f, cps);
  REQUIRE(r.checkpoints.size() == 2);
  CHECK(r.checkpoints[0].n == 1000);
  CHECK(r.sigma2 > 0.0);
  CHECK(std::isfinite(r.checkpoints[1].w1));
  CHECK(r.observable == describe(f));
  const auto again = clt_experiment(p, f, cps);
  CHECK(again.checkpoints[1].w1 == r.checkpoints[1].w1);

  CHECK_THROWS_WITH_AS(clt_experiment(p, PiecewiseLinear::constant(0.0), cps),
                       doctest::Contains("degenerate variance"), ComputationError);
  CHECK_THROWS_AS(clt_experiment(p, f, cps, CLTOptions{false}), ValidationError);
  const std::vector<std::size_t> too_far{30000};
  CHECK_THROWS_AS(clt_experiment(p, f, too_far), ValidationError);

  const std::vector<std::uint64_t> seeds{p.seed, p.seed + 1};
  const auto ens = clt_ensemble(p.alpha, p.steps, seeds, f, cps);
  REQUIRE(ens.size() == 2);
  CHECK(ens[0].checkpoints[1].w1 == r.checkpoints[1].w1);
}
