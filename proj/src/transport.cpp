#include "traceport/transport.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "traceport/error.hpp"
#include "traceport/solvers.hpp"

namespace traceport {

Rearrangement increasing_rearrangement(const Measure1D& nu, const Measure1D& mu,
                                       bool allow_relaxed) {
  const bool strict =
      nu.faithful() && nu.diffuse() && mu.faithful() && mu.diffuse();
  if (!strict && !allow_relaxed) {
    throw DomainError(
        "increasing rearrangement needs faithful, diffuse measures");
  }
  const auto& q = mu.quantile_graph();
  // Levels where the quantile of mu has a breakpoint.
  const auto levels = q.breakpoints();
  const auto& k = nu.knots();

  std::vector<Knot> out;
  out.reserve(2 * (k.size() + levels.size()));
  out.push_back({k.front().x, q(k.front().y)});
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const Knot& a = k[i];
    const Knot& b = k[i + 1];
    if (a.x == b.x) {
      // Atom of nu: h jumps to the quantile at the top of the step.
      out.push_back({b.x, q(b.y)});
    } else if (a.y == b.y) {
      // Gap in the support of nu: h is constant across it.
      out.push_back({b.x, q(a.y)});
    } else {
      auto first = std::upper_bound(levels.begin(), levels.end(), a.y);
      auto last = std::lower_bound(levels.begin(), levels.end(), b.y);
      for (auto it = first; it != last; ++it) {
        const double t =
            std::clamp(a.x + (*it - a.y) / (b.y - a.y) * (b.x - a.x), a.x, b.x);
        out.push_back({t, q.left(*it)});
        out.push_back({t, q(*it)});
      }
      out.push_back({b.x, q.left(b.y)});
      out.push_back({b.x, q(b.y)});
    }
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    out[i].y = std::max(out[i].y, out[i - 1].y);
  }
  return {MonotoneMap(PiecewiseLinear(std::move(out)).simplified()), !strict};
}

double displacement_norm(const MonotoneMap& h, const Measure1D& nu, double p) {
  if (!(p >= 1.0)) throw DomainError("displacement exponent p must be >= 1");
  std::vector<Knot> g;
  g.reserve(h.knots().size());
  for (const auto& k : h.knots()) g.push_back({k.x, k.y - k.x});
  const PiecewiseLinear gap(std::move(g));
  if (std::isinf(p)) return gap.sup_abs();
  return std::pow(integral_abs_pow(gap, nu, p), 1.0 / p);
}

TransportWitness geodesic_transport_witness(const GeodesicGraph& graph,
                                            std::span<const std::size_t> xs,
                                            std::span<const std::size_t> ys) {
  require(!xs.empty(), "transport witness needs at least one point");
  require(xs.size() == ys.size(), "point lists must have equal size");
  for (auto v : xs) require(v < graph.vertices(), "point outside vertex range");
  for (auto v : ys) require(v < graph.vertices(), "point outside vertex range");

  const auto sp = shortest_path_metric(graph);
  const auto& d = sp.metric();
  const std::size_t n = xs.size();
  solvers::Matrix cost(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i][j] = d(xs[i], ys[j]);
  }
  const auto a = solvers::bottleneck_assignment(cost);

  TransportWitness w;
  w.bottleneck = a.value;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t target = ys[a.row_to_col[i]];
    w.matching.sources.push_back(xs[i]);
    w.matching.targets.push_back(target);
    auto path = sp.path(xs[i], target);
    double length = 0.0;
    for (std::size_t s = 0; s + 1 < path.size(); ++s) {
      length += d(path[s], path[s + 1]);
    }
    w.max_displacement = std::max(w.max_displacement, length);
    w.paths.push_back(std::move(path));
  }
  return w;
}

namespace {

// Sorted atoms with merged duplicates.
std::vector<std::pair<double, double>> sorted_atoms(const ArcMeasure& m) {
  std::map<double, double> merged;
  for (std::size_t i = 0; i < m.positions.size(); ++i) {
    merged[m.positions[i]] += m.weights[i];
  }
  return {merged.begin(), merged.end()};
}

void check_arc_measure(const ArcSpace& arc, const ArcMeasure& m) {
  require(!m.positions.empty(), "arc measure has no atoms");
  require(m.positions.size() == m.weights.size(),
          "arc measure positions and weights differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < m.positions.size(); ++i) {
    require(m.positions[i] >= 0.0 && m.positions[i] <= arc.theta(),
            "arc atom outside [0, theta]");
    require(m.weights[i] > 0.0, "arc atom weights must be positive");
    total += m.weights[i];
  }
  require(std::abs(total - 1.0) <= 1e-9, "arc measure weights must sum to 1");
}

// Max distance of the alignment that pairs the u-th quantile of a with the
// u-th quantile of b (b already in the desired order).
double alignment_displacement(const ArcSpace& arc,
                              const std::vector<std::pair<double, double>>& a,
                              const std::vector<std::pair<double, double>>& b) {
  constexpr double kOverlap = 1e-12;
  double worst = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  double ca = a[0].second;
  double cb = b[0].second;
  double lo = 0.0;
  while (i < a.size() && j < b.size()) {
    const double hi = std::min(ca, cb);
    if (hi - lo > kOverlap) {
      worst = std::max(worst, arc.distance(a[i].first, b[j].first));
    }
    lo = hi;
    if (ca <= cb) {
      if (++i < a.size()) ca += a[i].second;
    } else {
      if (++j < b.size()) cb += b[j].second;
    }
  }
  return worst;
}

}  // namespace

ArcTransportEstimate arc_transport_ratio(const ArcSpace& arc,
                                         const ArcMeasure& mu,
                                         const ArcMeasure& nu) {
  check_arc_measure(arc, mu);
  check_arc_measure(arc, nu);
  const auto a = sorted_atoms(mu);
  const auto b = sorted_atoms(nu);

  std::vector<double> pts;
  for (const auto& [x, w] : a) pts.push_back(x);
  for (const auto& [x, w] : b) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const auto space = arc.sample(pts);
  auto to_measure = [&](const std::vector<std::pair<double, double>>& atoms) {
    std::vector<std::size_t> idx;
    std::vector<double> w;
    double total = 0.0;
    for (const auto& [x, m] : atoms) total += m;
    for (const auto& [x, m] : atoms) {
      idx.push_back(static_cast<std::size_t>(
          std::lower_bound(pts.begin(), pts.end(), x) - pts.begin()));
      w.push_back(m / total);
    }
    return DiscreteMeasure(std::move(idx), std::move(w));
  };

  ArcTransportEstimate est;
  est.winf = winf(space, to_measure(a), to_measure(b)).value;
  est.order_preserving = alignment_displacement(arc, a, b);
  auto reversed = b;
  std::reverse(reversed.begin(), reversed.end());
  est.order_reversing = alignment_displacement(arc, a, reversed);
  require(est.winf > 0.0, "measures coincide; the transport ratio is undefined");
  est.ratio = std::min(est.order_preserving, est.order_reversing) / est.winf;
  return est;
}

std::pair<ArcMeasure, ArcMeasure> clustered_arc_measures(double theta,
                                                         std::size_t n,
                                                         double eps) {
  require(theta > 0.0 && theta < 2.0 * std::numbers::pi,
          "theta must lie in (0, 2*pi)");
  require(n >= 2, "cluster size n must be at least 2");
  require(eps > 0.0 && eps < theta / 4.0, "eps must lie in (0, theta/4)");
  const double nn = static_cast<double>(n);
  ArcMeasure mu;
  ArcMeasure nu;
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = static_cast<double>(i) / (nn - 1.0);
    mu.positions.push_back(eps * frac);
    mu.weights.push_back((1.0 - 1.0 / nn) / nn);
    mu.positions.push_back(theta * frac);
    mu.weights.push_back(1.0 / (nn * nn));
  }
  for (std::size_t i = 0; i < mu.positions.size(); ++i) {
    nu.positions.push_back(theta - mu.positions[i]);
    nu.weights.push_back(mu.weights[i]);
  }
  return {std::move(mu), std::move(nu)};
}

ArcTransportEstimate arc_transport_ratio(double theta, std::size_t n,
                                         double eps) {
  const auto [mu, nu] = clustered_arc_measures(theta, n, eps);
  return arc_transport_ratio(ArcSpace(theta), mu, nu);
}

}  // namespace traceport
