#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "traceport/error.hpp"
#include "traceport/nccw.hpp"
#include "traceport/wasserstein.hpp"

using namespace traceport;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PiecewiseLinear lin(double a, double b) { return PiecewiseLinear({{0, a}, {1, b}}); }

EigenvalueMapFamily single(PiecewiseLinear f) {
  return EigenvalueMapFamily({{std::move(f), 1}});
}

const PiecewiseLinear& square() {
  static const auto s = PiecewiseLinear::sample([](double t) { return t * t; }, 1024);
  return s;
}

EigenvalueMapFamily random_family(std::mt19937_64& rng, std::size_t l) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<EigenvalueMapFamily::Entry> e;
  for (std::size_t i = 0; i < l; ++i) {
    std::vector<Knot> k;
    const std::size_t pieces = 1 + rng() % 4;
    for (std::size_t j = 0; j <= pieces; ++j) {
      k.push_back({static_cast<double>(j) / static_cast<double>(pieces), u(rng)});
    }
    e.push_back({PiecewiseLinear(k), 1 + rng() % 3});
  }
  return EigenvalueMapFamily::from_unordered(std::move(e));
}

}  // namespace

TEST_CASE("specs") {
  CHECK(DimensionDropSpec(2, 3).prime());
  CHECK_FALSE(DimensionDropSpec(2, 4).prime());
  CHECK(DimensionDropSpec(2, 3).fiber_size() == 6);
  CHECK_THROWS_AS(DimensionDropSpec(0, 3), ValidationError);
  CHECK_THROWS_AS(RazakSpec(1, 1), ValidationError);
  CHECK_THROWS_AS(RazakSpec(2, 0), ValidationError);
  CHECK(RazakSpec(3, 2).fiber_size() == 6);
}

TEST_CASE("family ordering invariant") {
  CHECK_THROWS_AS(EigenvalueMapFamily({{lin(0.5, 0.5), 1}, {lin(0, 1), 1}}), ValidationError);
  CHECK_THROWS_AS(EigenvalueMapFamily({{lin(0, 1.5), 1}}), ValidationError);
  const auto f = EigenvalueMapFamily::from_unordered({{lin(0.5, 0.5), 2}, {lin(0, 1), 1}});
  CHECK(f.size() == 3);
  // Sorted: min(t, 1/2), 1/2, max(t, 1/2).
  REQUIRE(f.entries().size() == 3);
  CHECK(f.entries()[0].map(0.2) == doctest::Approx(0.2));
  CHECK(f.entries()[0].map(0.8) == doctest::Approx(0.5));
  CHECK(f.entries()[1].map.is_constant(1e-15));
  CHECK(f.entries()[2].map(0.8) == doctest::Approx(0.8));
}

TEST_CASE("from_unordered gives the pointwise order statistics") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<EigenvalueMapFamily::Entry> e;
    for (int i = 0; i < 4; ++i) {
      e.push_back({PiecewiseLinear({{0, u(rng)}, {0.5, u(rng)}, {1, u(rng)}}),
                   BigInt(1 + rng() % 3)});
    }
    const auto fam = EigenvalueMapFamily::from_unordered(e);
    for (int s = 0; s <= 100; ++s) {
      const double t = s / 100.0;
      std::vector<double> expect;
      for (const auto& x : e) expect.insert(expect.end(), x.count.convert_to<int>(), x.map(t));
      std::sort(expect.begin(), expect.end());
      std::vector<double> got;
      for (const auto& x : fam.entries()) got.insert(got.end(), x.count.convert_to<int>(), x.map(t));
      REQUIRE(got.size() == expect.size());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(expect[i]));
    }
  }
}

TEST_CASE("d_diagonal examples") {
  const auto a = single(PiecewiseLinear::identity());
  CHECK(d_diagonal(a, a) == 0.0);
  CHECK(d_diagonal(a, single(square())) == doctest::Approx(0.25).epsilon(1e-6));
  const EigenvalueMapFamily x({{PiecewiseLinear::constant(0), 1}, {PiecewiseLinear::identity(), 1}});
  const EigenvalueMapFamily y({{lin(0, 0.5), 1}, {lin(0.5, 1), 1}});
  CHECK(d_diagonal(x, y) == doctest::Approx(0.5));
  CHECK_THROWS_AS(d_diagonal(a, x), ValidationError);
}

TEST_CASE("d_diagonal against a dense grid") {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_family(rng, 3);
    auto b = random_family(rng, 3);
    while (b.size() != a.size()) b = random_family(rng, 3);
    const double exact = d_diagonal(a, b);
    auto expand = [](const EigenvalueMapFamily& f, double t) {
      std::vector<double> v;
      for (const auto& e : f.entries()) v.insert(v.end(), e.count.convert_to<int>(), e.map(t));
      return v;
    };
    const double grid = oracle::grid_sup([&](double t) {
      const auto va = expand(a, t);
      const auto vb = expand(b, t);
      double w = 0.0;
      for (std::size_t i = 0; i < va.size(); ++i) w = std::max(w, std::abs(va[i] - vb[i]));
      return w;
    }, 20000);
    CHECK(exact >= grid - 1e-12);
    CHECK(exact == doctest::Approx(grid).epsilon(1e-3));
  }
}

TEST_CASE("d_w_matrices examples") {
  using C = std::complex<double>;
  const std::vector<C> a{0.0, 1.0};
  CHECK(d_w_matrices(a, a) == 0.0);
  CHECK(d_w_matrices(a, std::vector<C>{0.5, 1.0}) == 0.5);
  CHECK(d_w_matrices(std::vector<C>{0.0, C(0, 1)}, std::vector<C>{C(0, 1), 0.0}) == 0.0);
  CHECK_THROWS_AS(d_w_matrices(a, std::vector<C>{0.0}), ValidationError);

  std::mt19937_64 rng(79);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 6;
    std::vector<C> x;
    std::vector<C> y;
    for (std::size_t i = 0; i < n; ++i) {
      x.emplace_back(g(rng), g(rng));
      y.emplace_back(g(rng), g(rng));
    }
    CHECK(d_w_matrices(x, y) == oracle::complex_bottleneck(x, y));
  }
}

TEST_CASE("d_w_real agrees with complex matching on real spectra") {
  std::mt19937_64 rng(83);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<double, std::uint64_t>> a;
    std::vector<std::pair<double, std::uint64_t>> b;
    std::vector<std::complex<double>> ca;
    std::vector<std::complex<double>> cb;
    for (int i = 0; i < 3; ++i) {
      a.push_back({u(rng), 1 + rng() % 2});
      ca.insert(ca.end(), a.back().second, a.back().first);
    }
    while (cb.size() < ca.size()) {
      const std::uint64_t c = std::min<std::uint64_t>(1 + rng() % 2, ca.size() - cb.size());
      b.push_back({u(rng), c});
      cb.insert(cb.end(), c, b.back().first);
    }
    CHECK(d_w_real(a, b) == oracle::complex_bottleneck(ca, cb));
  }
}

TEST_CASE("d_w_profiles examples") {
  const auto id = PiecewiseLinear::identity();
  const EigenvalueProfile a({{id, 1}});
  CHECK(d_w_profiles(a, a) == 0.0);
  const EigenvalueProfile b({{square(), 1}});
  CHECK(d_w_profiles(a, b) == doctest::Approx(0.25).epsilon(1e-6));
  CHECK_THROWS_AS(d_w_profiles(a, EigenvalueProfile({{id, 2}})), ValidationError);
  // Razak g_L at 0.2 vs 0.5, n = 2, k = 1, as constant profiles.
  const EigenvalueProfile s({{PiecewiseLinear::constant(1.0), 1}, {PiecewiseLinear::constant(0.8), 1}});
  const EigenvalueProfile t({{PiecewiseLinear::constant(1.0), 1}, {PiecewiseLinear::constant(0.5), 1}});
  CHECK(d_w_profiles(s, t) == doctest::Approx(0.3));
}

TEST_CASE("g_L profiles") {
  auto gl = gl_profile(DimensionDropSpec(2, 3), 0.4);
  REQUIRE(gl.size() == 1);
  CHECK(gl[0] == std::pair<double, std::uint64_t>{0.4, 6});
  gl = gl_profile(RazakSpec(2, 1), 0.0);
  REQUIRE(gl.size() == 1);
  CHECK(gl[0] == std::pair<double, std::uint64_t>{1.0, 2});
  gl = gl_profile(RazakSpec(3, 2), 0.25);
  REQUIRE(gl.size() == 2);
  CHECK(gl[0] == std::pair<double, std::uint64_t>{0.75, 2});
  CHECK(gl[1] == std::pair<double, std::uint64_t>{1.0, 4});
  gl = gl_profile(RazakSpec(3, 2), 1.0);
  CHECK(gl[0] == std::pair<double, std::uint64_t>{0.0, 2});
  CHECK(gl[1] == std::pair<double, std::uint64_t>{1.0, 4});
  gl = gl_profile(MatrixIntervalSpec(4), 0.7);
  CHECK(gl[0] == std::pair<double, std::uint64_t>{0.7, 4});
  CHECK_THROWS_AS(gl_profile(RazakSpec(2, 1), 1.5), ValidationError);
}

TEST_CASE("g_L separation") {
  const std::vector<double> s{0.2, 0.5};
  const std::vector<double> t{0.3, 0.9};
  auto r = gl_separation_check(DimensionDropSpec(2, 3), s, s);
  CHECK(r.lhs == 0.0);
  CHECK(r.pass);
  r = gl_separation_check(DimensionDropSpec(2, 3), s, t);
  CHECK(r.lhs == doctest::Approx(0.4));
  CHECK(r.rhs == doctest::Approx(0.4));
  CHECK(r.pass);
  r = gl_separation_check(RazakSpec(2, 1), std::vector<double>{0.2}, std::vector<double>{0.5});
  CHECK(r.lhs == doctest::Approx(0.3));
  CHECK(r.pass);
  CHECK_THROWS_AS(gl_separation_check(RazakSpec(2, 1), std::vector<double>{0.5, 0.2},
                                      std::vector<double>{0.1, 0.3}),
                  ValidationError);
}

TEST_CASE("pushforward trace examples") {
  const auto leb = Measure1D::lebesgue();
  const auto mu = Measure1D::from_cdf([](double x) { return x * x; }, 16);
  const auto same = pushforward_trace(single(PiecewiseLinear::identity()), mu);
  for (double x : {0.1, 0.5, 0.9}) CHECK(same.cdf(x) == doctest::Approx(mu.cdf(x)));
  const EigenvalueMapFamily halves({{lin(0, 0.5), 1}, {lin(0.5, 1), 1}});
  const auto tiled = pushforward_trace(halves, leb);
  for (double x : {0.1, 0.5, 0.77}) CHECK(tiled.cdf(x) == doctest::Approx(x));
  const auto atom = pushforward_trace(single(PiecewiseLinear::constant(0.3)), mu).atoms();
  REQUIRE(atom.size() == 1);
  CHECK(atom[0].first == 0.3);
  CHECK(atom[0].second == doctest::Approx(1.0));
}

TEST_CASE("wp_diagonal_pair examples") {
  const auto leb = Measure1D::lebesgue();
  const auto id = single(PiecewiseLinear::identity());
  CHECK(wp_diagonal_pair(id, id, leb, 1.0) == 0.0);
  CHECK(wp_diagonal_pair(id, single(square()), leb, kInf) ==
        doctest::Approx(0.25).epsilon(1e-5));
  CHECK(wp_diagonal_pair(id, single(lin(0, 0.5)), leb, 1.0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(
      wp_diagonal_pair(id, EigenvalueMapFamily({{PiecewiseLinear::identity(), 2}}), leb, 1.0),
      ValidationError);
}

TEST_CASE("tracial domination and distance chain on random pairs") {
  std::mt19937_64 rng(89);
  const auto battery = lipschitz_battery(8, 5);
  for (int trial = 0; trial < 25; ++trial) {
    const auto a = random_family(rng, 3);
    auto b = random_family(rng, 3);
    while (b.size() != a.size()) b = random_family(rng, 3);
    const double dd = d_diagonal(a, b);
    const auto dw = sampled_d_w(a, b, battery, 256);
    CHECK(dw.battery_max <= dd + 1e-9);
    CHECK(dw.at_gl == doctest::Approx(dd).epsilon(1e-12));
    for (const auto& mu : {Measure1D::lebesgue(), Measure1D::uniform(0.2, 0.6),
                           Measure1D::dirac(0.35)}) {
      CHECK(wp_diagonal_pair(a, b, mu, kInf) <= dd + 1e-9);
    }
  }
}

TEST_CASE("observable batteries") {
  for (const auto& f : lipschitz_battery(20, 3)) {
    const auto& k = f.knots();
    for (std::size_t i = 0; i + 1 < k.size(); ++i) {
      CHECK(std::abs(k[i + 1].y - k[i].y) <= (k[i + 1].x - k[i].x) + 1e-15);
    }
    CHECK(f.min_value() >= 0.0);
    CHECK(f.max_value() <= 1.0);
  }
  for (const auto& f : unit_ball_battery(20, 3)) CHECK(f.sup_abs() <= 1.0);
  CHECK(lipschitz_battery(3, 9)[2].knots() == lipschitz_battery(3, 9)[2].knots());
}

TEST_CASE("stage plan arithmetic") {
  const auto s = jiangsu_step(2, 3, 1, 0.5);
  CHECK(s.n == 8);
  CHECK(s.k == 1679616);
  CHECK(s.p_next == 512);
  CHECK(s.q_next == 19683);
  CHECK(s.r0 == 1659933);
  CHECK(s.r1 == 1679104);
  CHECK(s.identity_count + s.constant_count + s.max_count == s.k);
  CHECK(s.identity_proportion == doctest::Approx(1.0 - 3.0 / 256.0));
  CHECK(s.identity_proportion > 1.0 - 1.0 / 64.0);

  for (auto [p, q] : {std::pair{2, 3}, std::pair{3, 4}, std::pair{2, 5}}) {
    for (unsigned m : {1u, 2u}) {
      const auto plan = jiangsu_step(p, q, m, 0.3);
      const BigInt pn = boost::multiprecision::pow(BigInt(p), plan.n);
      const BigInt qn = boost::multiprecision::pow(BigInt(q), plan.n);
      CHECK(plan.n >= 2 * m);
      CHECK(pn > BigInt(plan.n) * plan.n * q);
      CHECK(qn > BigInt(plan.n) * plan.n * p);
      // Minimality.
      if (plan.n > 2 * m) {
        const unsigned n1 = plan.n - 1;
        const BigInt pn1 = boost::multiprecision::pow(BigInt(p), n1);
        const BigInt qn1 = boost::multiprecision::pow(BigInt(q), n1);
        CHECK_FALSE((pn1 > BigInt(n1) * n1 * q && qn1 > BigInt(n1) * n1 * p));
      }
      CHECK(plan.r0 == qn * (pn - q));
      CHECK(plan.r1 == pn * (qn - p));
    }
  }

  CHECK_THROWS_AS(jiangsu_step(2, 4, 1, 0.5), ValidationError);
  CHECK_THROWS_AS(jiangsu_step(3, 2, 1, 0.5), ValidationError);
  CHECK_THROWS_AS(jiangsu_step(2, 3, 0, 0.5), ValidationError);
  CHECK_THROWS_AS(jiangsu_step(2, 3, 1, 1.5), ValidationError);
  CHECK_THROWS_AS(jiangsu_step(2, 3, 1, 0.5, 7), ComputationError);
}

TEST_CASE("stage plan families") {
  const auto s = jiangsu_step(2, 3, 1, 0.5);
  const auto fam = s.ordered_family();
  CHECK(fam.size() == s.k);
  REQUIRE(fam.entries().size() == 3);
  CHECK(fam.entries()[0].count == s.constant_count);
  CHECK(fam.entries()[1].map.is_identity());
  CHECK(fam.entries()[1].count == s.identity_count - s.constant_count);
  CHECK(fam.entries()[2].count == s.q_next);
}

TEST_CASE("intertwining defect") {
  const auto f = PiecewiseLinear({{0, -1}, {1, 1}});
  const std::vector<EigenvalueMapFamily::Entry> toy{{PiecewiseLinear::constant(0.5), 1},
                                                    {PiecewiseLinear::identity(), 3}};
  const std::vector<PiecewiseLinear> fs{f};
  CHECK(intertwining_defect(toy, fs) == doctest::Approx(0.25));
  const std::vector<PiecewiseLinear> constant{PiecewiseLinear::constant(0.7)};
  CHECK(intertwining_defect(toy, constant) == doctest::Approx(0.0).epsilon(1e-15));
  const std::vector<PiecewiseLinear> too_big{PiecewiseLinear::constant(1.5)};
  CHECK_THROWS_AS(intertwining_defect(toy, too_big), ValidationError);

  const auto battery = unit_ball_battery(20, 13);
  for (double c : {0.0, 0.3, 0.5, 1.0}) {
    const auto plan = jiangsu_step(2, 3, 1, c);
    const double d = intertwining_defect(plan, battery);
    CHECK(d <= plan.defect_bound + 1e-12);
    CHECK(d < 2.0 / 64.0);
    // The pointwise-sorted family describes the same morphism.
    CHECK(intertwining_defect(plan.ordered_family(), battery) == doctest::Approx(d).epsilon(1e-9));
  }
  // Grid oracle for one function.
  const auto plan = jiangsu_step(2, 3, 1, 0.4);
  const auto& g = battery[0];
  const double w_c = static_cast<double>(plan.constant_count) / static_cast<double>(plan.k);
  const double w_m = static_cast<double>(plan.max_count) / static_cast<double>(plan.k);
  const double grid = oracle::grid_sup([&](double t) {
    return w_c * (g(0.4) - g(t)) + w_m * (g(std::max(0.4, t)) - g(t));
  });
  const std::vector<PiecewiseLinear> one{g};
  CHECK(intertwining_defect(plan, one) == doctest::Approx(grid).epsilon(1e-6));
}

TEST_CASE("tower simulation") {
  CHECK(simulate_tower(2, 3, std::vector<double>{}, 0).stages.empty());
  const std::vector<double> c{0.5, 0.25, 0.75};
  const auto one = simulate_tower(2, 3, c, 1);
  REQUIRE(one.stages.size() == 1);
  CHECK(one.stages[0].r0 == 1659933);
  const auto two = simulate_tower(2, 3, c, 2);
  REQUIRE(two.stages.size() == 2);
  CHECK(two.stages[1].p == 512);
  CHECK(two.stages[1].q == 19683);
  CHECK(two.stages[1].n >= 4);
  CHECK(two.cumulative_square_bound == doctest::Approx(2.5));
  CHECK(two.cumulative_defect_bound <= two.cumulative_square_bound);
  CHECK_FALSE(two.dense);
  CHECK_THROWS_AS(simulate_tower(2, 3, c, 4), ValidationError);
  std::vector<double> fine;
  for (int i = 0; i <= 10; ++i) fine.push_back(i / 10.0);
  CHECK(simulate_tower(2, 3, fine, 3).density_gap > 0.05);
  CHECK(to_string(two.stages[1].k) == "10314424798490535546171949056");
}
