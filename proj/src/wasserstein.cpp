#include "traceport/wasserstein.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "traceport/error.hpp"

namespace traceport {

namespace {

void check_p(double p) {
  if (std::isinf(p)) {
    throw DomainError("p = inf is not a finite exponent; use winf");
  }
  if (!(p >= 1.0)) throw DomainError("Wasserstein exponent p must be >= 1");
}

// Integer multiplicities n_i with w_i = n_i / D for both measures, for the
// smallest common D <= cap.
struct Expansion {
  std::size_t denominator = 0;
  std::vector<std::size_t> mu_counts;
  std::vector<std::size_t> nu_counts;
};

std::optional<std::vector<std::size_t>> counts_for(
    const std::vector<double>& w, std::size_t D) {
  std::vector<std::size_t> counts;
  counts.reserve(w.size());
  std::size_t sum = 0;
  for (double x : w) {
    const double scaled = x * static_cast<double>(D);
    const double r = std::round(scaled);
    if (r < 1.0 || std::abs(scaled - r) > 1e-9) return std::nullopt;
    counts.push_back(static_cast<std::size_t>(r));
    sum += counts.back();
  }
  if (sum != D) return std::nullopt;
  return counts;
}

std::optional<Expansion> equal_weight_expansion(const DiscreteMeasure& mu,
                                                const DiscreteMeasure& nu,
                                                std::size_t cap) {
  const std::size_t start = std::max(mu.size(), nu.size());
  for (std::size_t D = start; D <= cap; ++D) {
    auto a = counts_for(mu.weights(), D);
    if (!a) continue;
    auto b = counts_for(nu.weights(), D);
    if (!b) continue;
    return Expansion{D, std::move(*a), std::move(*b)};
  }
  return std::nullopt;
}

std::vector<std::size_t> expand(const std::vector<std::size_t>& counts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out.insert(out.end(), counts[i], i);
  }
  return out;
}

solvers::Matrix cost_matrix(const FiniteMetricSpace& space,
                            const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu, double p) {
  solvers::Matrix c(mu.size(), std::vector<double>(nu.size()));
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) {
      const double d = space(mu.support()[i], nu.support()[j]);
      c[i][j] = p == 1.0 ? d : std::pow(d, p);
    }
  }
  return c;
}

TransportPlan empty_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return TransportPlan{mu.support(), nu.support(),
                       solvers::Matrix(mu.size(),
                                       std::vector<double>(nu.size(), 0.0))};
}

// Runs `solve` on the expanded square problem and folds the row-to-column
// assignment back into a plan over the original supports.
template <class Solve>
std::pair<TransportPlan, solvers::Assignment> solve_expanded(
    const FiniteMetricSpace& space, const DiscreteMeasure& mu,
    const DiscreteMeasure& nu, const Expansion& ex, double p, Solve solve) {
  const auto rows = expand(ex.mu_counts);
  const auto cols = expand(ex.nu_counts);
  const auto base = cost_matrix(space, mu, nu, p);
  solvers::Matrix cost(rows.size(), std::vector<double>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) cost[i][j] = base[rows[i]][cols[j]];
  }
  auto a = solve(cost);
  TransportPlan plan = empty_plan(mu, nu);
  const double unit = 1.0 / static_cast<double>(ex.denominator);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    plan.coupling[rows[i]][cols[a.row_to_col[i]]] += unit;
  }
  return {std::move(plan), std::move(a)};
}

}  // namespace

double coupling_error(const TransportPlan& plan, const DiscreteMeasure& mu,
                      const DiscreteMeasure& nu) {
  double err = 0.0;
  for (std::size_t i = 0; i < plan.coupling.size(); ++i) {
    double row = 0.0;
    for (double x : plan.coupling[i]) {
      if (x < 0.0) err = std::max(err, -x);
      row += x;
    }
    err = std::max(err, std::abs(row - mu.mass_at(plan.source_support[i])));
  }
  for (std::size_t j = 0; j < plan.target_support.size(); ++j) {
    double col = 0.0;
    for (const auto& row : plan.coupling) col += row[j];
    err = std::max(err, std::abs(col - nu.mass_at(plan.target_support[j])));
  }
  return err;
}

DistanceReport wp_primal(const FiniteMetricSpace& space,
                         const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         double p, const WpOptions& options) {
  check_p(p);
  mu.check_on(space);
  nu.check_on(space);
  DistanceReport report;
  double cost = 0.0;
  if (auto ex = equal_weight_expansion(mu, nu, options.expansion_cap)) {
    auto [plan, a] = solve_expanded(space, mu, nu, *ex, p, solvers::hungarian);
    cost = a.value / static_cast<double>(ex->denominator);
    report.method = "assignment";
    report.witness = std::move(plan);
  } else {
    auto sol = solvers::min_cost_transport(mu.weights(), nu.weights(),
                                           cost_matrix(space, mu, nu, p));
    cost = sol.cost;
    report.method = "min_cost_flow";
    report.witness =
        TransportPlan{mu.support(), nu.support(), std::move(sol.plan)};
  }
  report.value = std::pow(std::max(cost, 0.0), 1.0 / p);
  return report;
}

namespace {

// Visits the common refinement of two quantile functions: on each interval
// (t0, t1) both are linear; f receives the interval length and the
// differences at its ends (one-sided limits).
template <class F>
void for_each_quantile_piece(const Measure1D& mu, const Measure1D& nu, F f) {
  const auto& qa = mu.quantile_graph();
  const auto& qb = nu.quantile_graph();
  auto ts = qa.breakpoints();
  const auto tb = qb.breakpoints();
  ts.insert(ts.end(), tb.begin(), tb.end());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double t0 = ts[i];
    const double t1 = ts[i + 1];
    f(t1 - t0, qa(t0) - qb(t0), qa.left(t1) - qb.left(t1));
  }
}

}  // namespace

double wp_quantile(const Measure1D& mu, const Measure1D& nu, double p) {
  check_p(p);
  double total = 0.0;
  for_each_quantile_piece(mu, nu, [&](double len, double d0, double d1) {
    total += integrate_abs_pow(d0, d1, len, p);
  });
  return std::pow(total, 1.0 / p);
}

double winf_quantile(const Measure1D& mu, const Measure1D& nu) {
  double sup = 0.0;
  for_each_quantile_piece(mu, nu, [&](double, double d0, double d1) {
    sup = std::max({sup, std::abs(d0), std::abs(d1)});
  });
  return sup;
}

DistanceReport winf(const FiniteMetricSpace& space, const DiscreteMeasure& mu,
                    const DiscreteMeasure& nu, const WpOptions& options) {
  mu.check_on(space);
  nu.check_on(space);
  DistanceReport report;
  if (auto ex = equal_weight_expansion(mu, nu, options.expansion_cap)) {
    auto [plan, a] = solve_expanded(space, mu, nu, *ex, 1.0,
                                    solvers::bottleneck_assignment);
    report.value = a.value;
    report.method = "bottleneck_matching";
    const bool plain =
        ex->denominator == mu.size() && ex->denominator == nu.size();
    if (plain) {
      Matching m;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        m.sources.push_back(mu.support()[i]);
        m.targets.push_back(nu.support()[a.row_to_col[i]]);
      }
      report.witness = std::move(m);
    } else {
      report.witness = std::move(plan);
    }
    return report;
  }

  const auto cost = cost_matrix(space, mu, nu, 1.0);
  std::vector<double> values;
  for (const auto& row : cost) values.insert(values.end(), row.begin(), row.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  auto try_threshold = [&](double r, solvers::Matrix* plan) {
    std::vector<std::vector<char>> allowed(mu.size(),
                                           std::vector<char>(nu.size(), 0));
    for (std::size_t i = 0; i < mu.size(); ++i) {
      for (std::size_t j = 0; j < nu.size(); ++j) allowed[i][j] = cost[i][j] <= r;
    }
    double total = 0.0;
    auto flow = solvers::bipartite_max_flow(mu.weights(), nu.weights(), allowed,
                                            &total);
    if (plan != nullptr) *plan = std::move(flow);
    return total >= 1.0 - 1e-12;
  };
  std::size_t lo = 0;
  std::size_t hi = values.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (try_threshold(values[mid], nullptr)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  TransportPlan plan = empty_plan(mu, nu);
  try_threshold(values[lo], &plan.coupling);
  report.value = values[lo];
  report.method = "threshold_flow";
  report.witness = std::move(plan);
  return report;
}

DistanceReport w1_dual(const FiniteMetricSpace& space,
                       const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  mu.check_on(space);
  nu.check_on(space);
  std::vector<std::size_t> pts = mu.support();
  pts.insert(pts.end(), nu.support().begin(), nu.support().end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();

  double diam = 0.0;
  for (auto a : pts) {
    for (auto b : pts) diam = std::max(diam, space(a, b));
  }
  // Potentials f are shifted to g = f + diam >= 0; an optimal f can be taken
  // with |f| <= diam, hence g <= 2 diam.
  solvers::Matrix A;
  std::vector<double> b;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      if (k == l) continue;
      std::vector<double> row(n, 0.0);
      row[k] = 1.0;
      row[l] = -1.0;
      A.push_back(std::move(row));
      b.push_back(space(pts[k], pts[l]));
    }
    std::vector<double> row(n, 0.0);
    row[k] = 1.0;
    A.push_back(std::move(row));
    b.push_back(2.0 * diam);
  }
  std::vector<double> c(n);
  for (std::size_t k = 0; k < n; ++k) c[k] = mu.mass_at(pts[k]) - nu.mass_at(pts[k]);

  const auto sol = solvers::simplex_maximize(A, b, c);
  DualPotential f{pts, {}};
  double value = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    f.values.push_back(sol.x[k] - diam);
    value += c[k] * f.values.back();
  }
  DistanceReport report;
  report.value = std::max(value, 0.0);
  report.method = "kantorovich_dual_lp";
  report.witness = std::move(f);
  return report;
}

double levy_prokhorov(const FiniteMetricSpace& space, const DiscreteMeasure& mu,
                      const DiscreteMeasure& nu) {
  mu.check_on(space);
  nu.check_on(space);
  std::vector<std::size_t> all = mu.support();
  all.insert(all.end(), nu.support().begin(), nu.support().end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  if (all.size() > kLevyProkhorovMaxSupport) {
    throw ValidationError("support too large for exact d_P");
  }

  std::vector<double> cand{0.0};
  for (auto x : mu.support()) {
    for (auto y : nu.support()) cand.push_back(space(x, y));
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  // max over U subset of supp(a) of a(U) - b(closed r-neighbourhood of U).
  auto worst_gap = [&](const DiscreteMeasure& a, const DiscreteMeasure& b,
                       double r) {
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    std::vector<std::uint32_t> reach(na, 0);
    for (std::size_t i = 0; i < na; ++i) {
      for (std::size_t j = 0; j < nb; ++j) {
        if (space(a.support()[i], b.support()[j]) <= r) reach[i] |= 1u << j;
      }
    }
    std::vector<double> bmass(std::size_t{1} << nb, 0.0);
    for (std::size_t m = 1; m < bmass.size(); ++m) {
      const auto low = static_cast<std::size_t>(std::countr_zero(m));
      bmass[m] = bmass[m & (m - 1)] + b.weights()[low];
    }
    std::vector<std::uint32_t> nbr(std::size_t{1} << na, 0);
    std::vector<double> amass(std::size_t{1} << na, 0.0);
    double gap = 0.0;
    for (std::size_t m = 1; m < nbr.size(); ++m) {
      const auto low = static_cast<std::size_t>(std::countr_zero(m));
      nbr[m] = nbr[m & (m - 1)] | reach[low];
      amass[m] = amass[m & (m - 1)] + a.weights()[low];
      gap = std::max(gap, amass[m] - bmass[nbr[m]]);
    }
    return gap;
  };

  // The gap is a non-increasing step function of r, constant between
  // consecutive candidate distances; the answer is either a candidate or a
  // gap value inside the following interval.
  for (std::size_t k = 0; k < cand.size(); ++k) {
    const double g = std::max(worst_gap(mu, nu, cand[k]), worst_gap(nu, mu, cand[k]));
    if (g <= cand[k]) return cand[k];
    if (k + 1 < cand.size() && g < cand[k + 1]) return g;
  }
  return cand.back();
}

double schatten_p_seminorm(const EigenvalueProfile& profile,
                           const Measure1D& mu, double p) {
  check_p(p);
  double total = 0.0;
  for (const auto& e : profile.entries()) {
    total += static_cast<double>(e.multiplicity) * integral_abs_pow(e.fn, mu, p);
  }
  total /= static_cast<double>(profile.total_multiplicity());
  return std::pow(total, 1.0 / p);
}

}  // namespace traceport
