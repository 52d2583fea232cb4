#include "traceport/nccw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "traceport/error.hpp"
#include "traceport/solvers.hpp"
#include "traceport/wasserstein.hpp"

namespace traceport {

namespace mp = boost::multiprecision;

namespace {

constexpr double kMapTolerance = 1e-12;

double ratio(const BigInt& num, const BigInt& den) {
  return mp::cpp_rational(num, den).convert_to<double>();
}

std::vector<double> merged_breakpoints(const PiecewiseLinear& a,
                                       const PiecewiseLinear& b) {
  auto xs = a.breakpoints();
  const auto ys = b.breakpoints();
  xs.insert(xs.end(), ys.begin(), ys.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

double sup_gap(const PiecewiseLinear& a, const PiecewiseLinear& b) {
  double worst = 0.0;
  for (double x : merged_breakpoints(a, b)) {
    worst = std::max(worst, std::abs(a(x) - b(x)));
  }
  return worst;
}

std::uint64_t to_u64(const BigInt& x) {
  require(x <= std::numeric_limits<std::uint64_t>::max(),
          "multiplicity does not fit in 64 bits");
  return x.convert_to<std::uint64_t>();
}

}  // namespace

DimensionDropSpec::DimensionDropSpec(std::uint64_t p_, std::uint64_t q_)
    : p(p_), q(q_) {
  require(p >= 1 && q >= 1, "dimension drop parameters must be positive");
}

bool DimensionDropSpec::prime() const { return std::gcd(p, q) == 1; }

RazakSpec::RazakSpec(std::uint64_t n_, std::uint64_t k_) : n(n_), k(k_) {
  require(n >= 2, "Razak block needs n >= 2");
  require(k >= 1, "Razak block needs k >= 1");
}

MatrixIntervalSpec::MatrixIntervalSpec(std::uint64_t n_) : n(n_) {
  require(n >= 1, "matrix size must be positive");
}

void check_map(const PiecewiseLinear& map) {
  require(map.lo() == 0.0 && map.hi() == 1.0,
          "eigenvalue map must be defined on [0,1]");
  require(map.continuous(), "eigenvalue map must be continuous");
  require(map.min_value() >= -kMapTolerance &&
              map.max_value() <= 1.0 + kMapTolerance,
          "eigenvalue map must take values in [0,1]");
}

EigenvalueMapFamily::EigenvalueMapFamily(std::vector<Entry> entries) {
  require(!entries.empty(), "eigenvalue map family is empty");
  for (auto& e : entries) {
    require(e.count >= 1, "eigenvalue map counts must be positive");
    check_map(e.map);
    e.map = e.map.simplified();
    if (!entries_.empty() && entries_.back().map.knots() == e.map.knots()) {
      entries_.back().count += e.count;
    } else {
      entries_.push_back(std::move(e));
    }
  }
  for (std::size_t i = 0; i + 1 < entries_.size(); ++i) {
    const auto& a = entries_[i].map;
    const auto& b = entries_[i + 1].map;
    for (double x : merged_breakpoints(a, b)) {
      require(a(x) <= b(x) + kMapTolerance,
              "eigenvalue maps are not pointwise ordered (entry " +
                  std::to_string(i) + " exceeds entry " +
                  std::to_string(i + 1) + " at t = " + std::to_string(x) +
                  ")");
    }
  }
  size_ = 0;
  for (const auto& e : entries_) size_ += e.count;
}

EigenvalueMapFamily EigenvalueMapFamily::from_unordered(
    std::vector<Entry> entries) {
  require(!entries.empty(), "eigenvalue map family is empty");
  for (const auto& e : entries) {
    require(e.count >= 1, "eigenvalue map counts must be positive");
    check_map(e.map);
  }
  const std::size_t m = entries.size();
  std::vector<double> xs;
  for (const auto& e : entries) {
    const auto b = e.map.breakpoints();
    xs.insert(xs.end(), b.begin(), b.end());
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  // Strict crossings between breakpoints become breakpoints themselves.
  std::vector<double> crossings;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto& f = entries[i].map;
      const auto& g = entries[j].map;
      for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
        const double d0 = f(xs[s]) - g(xs[s]);
        const double d1 = f(xs[s + 1]) - g(xs[s + 1]);
        if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) {
          crossings.push_back(
              std::clamp(xs[s] + d0 / (d0 - d1) * (xs[s + 1] - xs[s]), xs[s],
                         xs[s + 1]));
        }
      }
    }
  }
  xs.insert(xs.end(), crossings.begin(), crossings.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  // Sorted order at every abscissa, and every cumulative boundary.
  std::vector<std::vector<std::size_t>> order(xs.size());
  std::set<BigInt> bounds;
  for (std::size_t s = 0; s < xs.size(); ++s) {
    auto& o = order[s];
    o.resize(m);
    std::iota(o.begin(), o.end(), std::size_t{0});
    std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) {
      return entries[a].map(xs[s]) < entries[b].map(xs[s]);
    });
    BigInt acc = 0;
    for (std::size_t idx : o) {
      acc += entries[idx].count;
      bounds.insert(acc);
    }
  }

  std::vector<Entry> runs;
  BigInt lo = 0;
  for (const auto& hi : bounds) {
    std::vector<Knot> knots;
    knots.reserve(xs.size());
    for (std::size_t s = 0; s < xs.size(); ++s) {
      BigInt acc = 0;
      for (std::size_t idx : order[s]) {
        acc += entries[idx].count;
        if (acc > lo) {
          knots.push_back({xs[s], entries[idx].map(xs[s])});
          break;
        }
      }
    }
    runs.push_back({PiecewiseLinear(std::move(knots)), hi - lo});
    lo = hi;
  }
  return EigenvalueMapFamily(std::move(runs));
}

BigInt EigenvalueMapFamily::identity_count() const {
  BigInt total = 0;
  for (const auto& e : entries_) {
    if (e.map.is_identity()) total += e.count;
  }
  return total;
}

std::vector<double> EigenvalueMapFamily::breakpoints() const {
  std::vector<double> xs;
  for (const auto& e : entries_) {
    const auto b = e.map.breakpoints();
    xs.insert(xs.end(), b.begin(), b.end());
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

EigenvalueProfile EigenvalueMapFamily::apply(
    const PiecewiseLinear& observable) const {
  std::vector<EigenvalueProfile::Entry> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) {
    out.push_back({observable.compose(e.map), to_u64(e.count)});
  }
  return EigenvalueProfile(std::move(out));
}

double d_diagonal(const EigenvalueMapFamily& a, const EigenvalueMapFamily& b) {
  require(a.size() == b.size(),
          "families have different numbers of eigenvalue maps");
  const auto& ea = a.entries();
  const auto& eb = b.entries();
  std::size_t i = 0;
  std::size_t j = 0;
  BigInt left_a = ea[0].count;
  BigInt left_b = eb[0].count;
  double worst = 0.0;
  while (i < ea.size() && j < eb.size()) {
    worst = std::max(worst, sup_gap(ea[i].map, eb[j].map));
    const BigInt step = left_a < left_b ? left_a : left_b;
    left_a -= step;
    left_b -= step;
    if (left_a == 0 && ++i < ea.size()) left_a = ea[i].count;
    if (left_b == 0 && ++j < eb.size()) left_b = eb[j].count;
  }
  return worst;
}

double d_w_matrices(std::span<const std::complex<double>> a,
                    std::span<const std::complex<double>> b) {
  require(a.size() == b.size(), "eigenvalue multisets differ in size");
  if (a.empty()) return 0.0;
  solvers::Matrix cost(a.size(), std::vector<double>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) cost[i][j] = std::abs(a[i] - b[j]);
  }
  return solvers::bottleneck_assignment(cost).value;
}

double d_w_real(std::vector<std::pair<double, std::uint64_t>> a,
                std::vector<std::pair<double, std::uint64_t>> b) {
  std::uint64_t na = 0;
  std::uint64_t nb = 0;
  for (const auto& [v, c] : a) na += c;
  for (const auto& [v, c] : b) nb += c;
  require(na == nb, "eigenvalue multisets differ in size");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // Zero multiplicities carry no mass.
  std::erase_if(a, [](const auto& e) { return e.second == 0; });
  std::erase_if(b, [](const auto& e) { return e.second == 0; });
  double worst = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  std::uint64_t ra = a.empty() ? 0 : a[0].second;
  std::uint64_t rb = b.empty() ? 0 : b[0].second;
  while (i < a.size() && j < b.size()) {
    worst = std::max(worst, std::abs(a[i].first - b[j].first));
    const std::uint64_t step = std::min(ra, rb);
    ra -= step;
    rb -= step;
    if (ra == 0 && ++i < a.size()) ra = a[i].second;
    if (rb == 0 && ++j < b.size()) rb = b[j].second;
  }
  return worst;
}

double d_w_profiles(const EigenvalueProfile& a, const EigenvalueProfile& b,
                    std::size_t grid) {
  require(a.total_multiplicity() == b.total_multiplicity(),
          "profiles have different total multiplicities");
  std::vector<double> ts = a.breakpoints();
  const auto tb = b.breakpoints();
  ts.insert(ts.end(), tb.begin(), tb.end());
  for (std::size_t i = 0; i <= grid; ++i) {
    ts.push_back(grid == 0 ? 0.0
                           : static_cast<double>(i) / static_cast<double>(grid));
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  double worst = 0.0;
  for (double t : ts) worst = std::max(worst, d_w_real(a.at(t), b.at(t)));
  return worst;
}

std::vector<std::pair<double, std::uint64_t>> gl_profile(const AlgebraSpec& spec,
                                                         double t) {
  require(t >= 0.0 && t <= 1.0, "g_L parameter must lie in [0,1]");
  return std::visit(
      [t](const auto& s) -> std::vector<std::pair<double, std::uint64_t>> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, RazakSpec>) {
          if (t == 0.0) return {{1.0, s.n * s.k}};
          return {{1.0 - t, s.k}, {1.0, (s.n - 1) * s.k}};
        } else {
          return {{t, s.fiber_size()}};
        }
      },
      spec);
}

SeparationCheck gl_separation_check(const AlgebraSpec& spec,
                                    std::span<const double> s,
                                    std::span<const double> t) {
  require(s.size() == t.size(), "parameter tuples differ in length");
  require(std::is_sorted(s.begin(), s.end()) && std::is_sorted(t.begin(), t.end()),
          "parameter tuples must be sorted ascending");
  auto spectrum = [&](std::span<const double> tuple) {
    std::vector<std::complex<double>> out;
    for (double x : tuple) {
      for (const auto& [v, c] : gl_profile(spec, x)) out.insert(out.end(), c, v);
    }
    return out;
  };
  SeparationCheck r;
  r.lhs = d_w_matrices(spectrum(s), spectrum(t));
  for (std::size_t i = 0; i < s.size(); ++i) {
    r.rhs = std::max(r.rhs, std::abs(s[i] - t[i]));
  }
  r.pass = std::abs(r.lhs - r.rhs) <= 1e-9;
  return r;
}

Measure1D pushforward_trace(const EigenvalueMapFamily& fam, const Measure1D& mu) {
  std::vector<std::pair<double, Measure1D>> parts;
  parts.reserve(fam.entries().size());
  for (const auto& e : fam.entries()) {
    parts.emplace_back(ratio(e.count, fam.size()), pushforward(mu, e.map));
  }
  return mixture(parts);
}

double wp_diagonal_pair(const EigenvalueMapFamily& a, const EigenvalueMapFamily& b,
                        const Measure1D& mu, double p) {
  require(a.size() == b.size(),
          "families have different numbers of eigenvalue maps");
  const auto ma = pushforward_trace(a, mu);
  const auto mb = pushforward_trace(b, mu);
  if (std::isinf(p)) return winf_quantile(ma, mb);
  return wp_quantile(ma, mb, p);
}

namespace {

std::vector<double> random_abscissae(std::mt19937_64& rng, std::size_t pieces) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs{0.0, 1.0};
  for (std::size_t i = 1; i < pieces; ++i) xs.push_back(u(rng));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

}  // namespace

std::vector<PiecewiseLinear> lipschitz_battery(std::size_t count,
                                               std::uint64_t seed,
                                               std::size_t pieces) {
  require(pieces >= 1, "observables need at least one piece");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> slope(-1.0, 1.0);
  std::vector<PiecewiseLinear> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const auto xs = random_abscissae(rng, pieces);
    std::vector<Knot> k{{0.0, u(rng)}};
    for (std::size_t i = 1; i < xs.size(); ++i) {
      const double y = k.back().y + slope(rng) * (xs[i] - xs[i - 1]);
      k.push_back({xs[i], std::clamp(y, 0.0, 1.0)});
    }
    out.emplace_back(std::move(k));
  }
  return out;
}

std::vector<PiecewiseLinear> unit_ball_battery(std::size_t count,
                                               std::uint64_t seed,
                                               std::size_t pieces) {
  require(pieces >= 1, "functions need at least one piece");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> v(-1.0, 1.0);
  std::vector<PiecewiseLinear> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    std::vector<Knot> k;
    for (double x : random_abscissae(rng, pieces)) k.push_back({x, v(rng)});
    out.emplace_back(std::move(k));
  }
  return out;
}

SampledDw sampled_d_w(const EigenvalueMapFamily& a, const EigenvalueMapFamily& b,
                      std::span<const PiecewiseLinear> battery,
                      std::size_t grid) {
  require(a.size() == b.size(),
          "families have different numbers of eigenvalue maps");
  SampledDw r;
  const auto id = PiecewiseLinear::identity();
  r.at_gl = d_w_profiles(a.apply(id), b.apply(id), grid);
  for (const auto& f : battery) {
    r.battery_max = std::max(r.battery_max,
                             d_w_profiles(a.apply(f), b.apply(f), grid));
  }
  r.value = std::max(r.at_gl, r.battery_max);
  return r;
}

std::vector<EigenvalueMapFamily::Entry> StepPlan::pattern() const {
  const auto id = PiecewiseLinear::identity();
  const auto cst = PiecewiseLinear::constant(c);
  std::vector<EigenvalueMapFamily::Entry> out;
  if (identity_count > 0) out.push_back({id, identity_count});
  if (constant_count > 0) out.push_back({cst, constant_count});
  if (max_count > 0) out.push_back({pointwise_max(cst, id), max_count});
  return out;
}

EigenvalueMapFamily StepPlan::ordered_family() const {
  return EigenvalueMapFamily::from_unordered(pattern());
}

StepPlan jiangsu_step(const BigInt& p, const BigInt& q, unsigned m, double c,
                      unsigned exponent_cap) {
  require(p >= 2, "p must be at least 2");
  require(p < q, "p must be smaller than q");
  require(mp::gcd(p, q) == 1, "p and q must be coprime");
  require(m >= 1, "stage index m must be at least 1");
  require(c >= 0.0 && c <= 1.0, "c must lie in [0,1]");

  StepPlan s;
  s.m = m;
  s.p = p;
  s.q = q;
  s.c = c;
  BigInt pn;
  BigInt qn;
  for (unsigned n = 2 * m; n <= exponent_cap; ++n) {
    pn = mp::pow(p, n);
    qn = mp::pow(q, n);
    const BigInt n2 = BigInt(n) * n;
    if (pn > n2 * q && qn > n2 * p) {
      s.n = n;
      break;
    }
  }
  if (s.n == 0) {
    throw ComputationError("no admissible exponent n <= " +
                           std::to_string(exponent_cap) + " for stage " +
                           std::to_string(m));
  }
  s.p_next = pn * p;
  s.q_next = qn * q;
  s.k = pn * qn;
  s.identity_count = s.k - s.q_next;
  s.constant_count = s.p_next;
  s.max_count = s.q_next - s.p_next;
  s.r0 = s.k - s.q_next;
  s.r1 = s.k - s.p_next;
  if (s.r0 != qn * (pn - q) || s.r1 != pn * (qn - p) ||
      s.identity_count + s.constant_count + s.max_count != s.k ||
      s.identity_count < 0 || s.max_count < 0) {
    throw ComputationError("stage arithmetic identities failed");
  }
  const double rest = ratio(s.q_next, s.k);
  s.identity_proportion = 1.0 - rest;
  s.defect_bound = 2.0 * rest;
  return s;
}

double intertwining_defect(std::span<const EigenvalueMapFamily::Entry> maps,
                           std::span<const PiecewiseLinear> fns) {
  require(!maps.empty(), "eigenvalue map family is empty");
  BigInt total = 0;
  for (const auto& e : maps) {
    require(e.count >= 1, "eigenvalue map counts must be positive");
    total += e.count;
  }
  double worst = 0.0;
  for (const auto& f : fns) {
    require(f.sup_abs() <= 1.0 + kMapTolerance,
            "intertwining test function has sup norm above 1");
    std::vector<PiecewiseLinear> moved;
    std::vector<double> weights;
    for (const auto& e : maps) {
      if (e.map.is_identity()) continue;
      moved.push_back(f.compose(e.map));
      weights.push_back(ratio(e.count, total));
    }
    if (moved.empty()) continue;
    std::vector<std::pair<double, const PiecewiseLinear*>> terms;
    double mass = 0.0;
    for (std::size_t i = 0; i < moved.size(); ++i) {
      terms.emplace_back(weights[i], &moved[i]);
      mass += weights[i];
    }
    terms.emplace_back(-mass, &f);
    worst = std::max(worst, linear_combination(terms).sup_abs());
  }
  return worst;
}

double intertwining_defect(const EigenvalueMapFamily& fam,
                           std::span<const PiecewiseLinear> fns) {
  return intertwining_defect(fam.entries(), fns);
}

double intertwining_defect(const StepPlan& plan,
                           std::span<const PiecewiseLinear> fns) {
  return intertwining_defect(plan.pattern(), fns);
}

TowerReport simulate_tower(const BigInt& p0, const BigInt& q0,
                           std::span<const double> c_seq, unsigned stages,
                           double density_epsilon, unsigned exponent_cap) {
  require(c_seq.size() >= stages, "fewer constants than stages");
  require(density_epsilon > 0.0, "density epsilon must be positive");
  TowerReport r;
  BigInt p = p0;
  BigInt q = q0;
  std::vector<double> seen;
  for (unsigned m = 1; m <= stages; ++m) {
    auto plan = jiangsu_step(p, q, m, c_seq[m - 1], exponent_cap);
    p = plan.p_next;
    q = plan.q_next;
    r.cumulative_defect_bound += plan.defect_bound;
    r.cumulative_square_bound += 2.0 / (static_cast<double>(m) * m);
    seen.push_back(plan.c);
    r.stages.push_back(std::move(plan));
  }
  if (!seen.empty()) {
    std::sort(seen.begin(), seen.end());
    double gap = std::max(seen.front(), 1.0 - seen.back());
    for (std::size_t i = 0; i + 1 < seen.size(); ++i) {
      gap = std::max(gap, (seen[i + 1] - seen[i]) / 2.0);
    }
    r.density_gap = gap;
  }
  r.dense = r.density_gap <= density_epsilon;
  return r;
}

std::string to_string(const BigInt& x) { return x.str(); }

}  // namespace traceport
