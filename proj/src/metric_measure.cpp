#include "traceport/metric_measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "traceport/error.hpp"

namespace traceport {

// ---------------------------------------------------------------- spaces

std::string metric_violation(const std::vector<std::vector<double>>& d,
                             double tol) {
  const std::size_t n = d.size();
  std::ostringstream msg;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i].size() != n) {
      msg << "distance matrix row " << i << " has " << d[i].size()
          << " entries, expected " << n;
      return msg.str();
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i][i] != 0.0) {
      msg << "d[" << i << "][" << i << "] must be 0";
      return msg.str();
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(d[i][j]) || d[i][j] < 0.0) {
        msg << "d[" << i << "][" << j << "] must be a finite non-negative real";
        return msg.str();
      }
      if (i != j && d[i][j] <= 0.0) {
        msg << "d[" << i << "][" << j << "] must be positive for distinct points";
        return msg.str();
      }
      if (std::abs(d[i][j] - d[j][i]) > tol) {
        msg << "distance matrix is not symmetric at (" << i << "," << j << ")";
        return msg.str();
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (d[i][j] > d[i][k] + d[k][j] + tol) {
          msg << "triangle inequality fails for (" << i << "," << j << ") via "
              << k;
          return msg.str();
        }
      }
    }
  }
  return {};
}

FiniteMetricSpace::FiniteMetricSpace(std::vector<std::vector<double>> d,
                                     double tol)
    : n_(d.size()) {
  require(n_ >= 1, "metric space needs at least one point");
  const std::string why = metric_violation(d, tol);
  require(why.empty(), why);
  d_.reserve(n_ * n_);
  for (const auto& row : d) d_.insert(d_.end(), row.begin(), row.end());
}

std::vector<double> FiniteMetricSpace::sorted_distances() const {
  std::vector<double> out;
  out.reserve(n_ * (n_ - 1) / 2);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) out.push_back((*this)(i, j));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::vector<double>> FiniteMetricSpace::matrix() const {
  std::vector<std::vector<double>> out(n_, std::vector<double>(n_));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) out[i][j] = (*this)(i, j);
  }
  return out;
}

GeodesicGraph::GeodesicGraph(std::size_t vertices, std::vector<Edge> edges)
    : n_(vertices), edges_(std::move(edges)) {
  require(n_ >= 1, "graph needs at least one vertex");
  for (const auto& e : edges_) {
    require(e.u < n_ && e.v < n_, "edge endpoint out of vertex range");
    require(e.u != e.v, "self-loops are not allowed");
    require(std::isfinite(e.weight) && e.weight > 0.0,
            "edge weights must be positive");
  }
}

ShortestPaths shortest_path_metric(const GeodesicGraph& graph) {
  const std::size_t n = graph.vertices();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<double> dist(n * n, kInf);
  std::vector<std::size_t> next(n * n, kNone);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i * n + i] = 0.0;
    next[i * n + i] = i;
  }
  for (const auto& e : graph.edges()) {
    if (e.weight < dist[e.u * n + e.v]) {
      dist[e.u * n + e.v] = dist[e.v * n + e.u] = e.weight;
      next[e.u * n + e.v] = e.v;
      next[e.v * n + e.u] = e.u;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double dik = dist[i * n + k];
      if (dik == kInf) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double via = dik + dist[k * n + j];
        if (via < dist[i * n + j]) {
          dist[i * n + j] = via;
          next[i * n + j] = next[i * n + k];
        }
      }
    }
  }
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      require(dist[i * n + j] < kInf, "graph is disconnected");
      // Symmetrize: both directions are relaxed independently.
      d[i][j] = std::min(dist[i * n + j], dist[j * n + i]);
    }
  }
  return ShortestPaths(FiniteMetricSpace(std::move(d)), std::move(next), n);
}

std::vector<std::size_t> ShortestPaths::path(std::size_t i,
                                             std::size_t j) const {
  require(i < n_ && j < n_, "path endpoint out of vertex range");
  std::vector<std::size_t> out{i};
  while (i != j) {
    i = next_[i * n_ + j];
    out.push_back(i);
  }
  return out;
}

ArcSpace::ArcSpace(double theta) : theta_(theta) {
  require(theta > 0.0 && theta < 2.0 * std::numbers::pi,
          "arc angle theta must lie in (0, 2*pi)");
}

double ArcSpace::distance(double s, double t) const {
  return 2.0 * std::sin(std::abs(s - t) / 2.0);
}

FiniteMetricSpace ArcSpace::sample(std::span<const double> points) const {
  const std::size_t n = points.size();
  for (double s : points) {
    require(s >= 0.0 && s <= theta_, "arc point outside [0, theta]");
  }
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d[i][j] = d[j][i] = distance(points[i], points[j]);
    }
  }
  return FiniteMetricSpace(std::move(d));
}

FiniteMetricSpace interval_space(std::span<const double> points) {
  const std::size_t n = points.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d[i][j] = d[j][i] = std::abs(points[i] - points[j]);
    }
  }
  return FiniteMetricSpace(std::move(d));
}

// ------------------------------------------------------- discrete measure

DiscreteMeasure::DiscreteMeasure(std::vector<std::size_t> support,
                                 std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
  require(!support_.empty(), "measure support is empty");
  require(support_.size() == weights_.size(),
          "support and weights have different lengths");
  double total = 0.0;
  for (double w : weights_) {
    require(std::isfinite(w) && w > 0.0, "weights must be positive");
    total += w;
  }
  require(std::abs(total - 1.0) <= kWeightTolerance,
          "weights must sum to 1");
  auto sorted = support_;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
          "support points must be distinct");
}

DiscreteMeasure DiscreteMeasure::dirac(std::size_t point) {
  return DiscreteMeasure({point}, {1.0});
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<std::size_t> support) {
  const double w = 1.0 / static_cast<double>(support.size());
  std::vector<double> weights(support.size(), w);
  return DiscreteMeasure(std::move(support), std::move(weights));
}

double DiscreteMeasure::mass_at(std::size_t point) const {
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (support_[i] == point) return weights_[i];
  }
  return 0.0;
}

void DiscreteMeasure::check_on(const FiniteMetricSpace& space) const {
  for (auto s : support_) {
    require(s < space.size(), "measure support point " + std::to_string(s) +
                                  " is not a point of the space");
  }
}

bool DiscreteMeasure::equal_weight() const {
  return std::all_of(weights_.begin(), weights_.end(),
                     [&](double w) { return w == weights_.front(); });
}

// ------------------------------------------------------------- Measure1D

namespace {

std::vector<Knot> canonical_cdf(std::vector<Knot> k) {
  require(!k.empty(), "CDF needs at least one breakpoint");
  constexpr double kSlack = 1e-12;
  for (std::size_t i = 0; i < k.size(); ++i) {
    require(std::isfinite(k[i].x) && std::isfinite(k[i].y),
            "CDF breakpoints must be finite");
    require(k[i].x >= -kSlack && k[i].x <= 1.0 + kSlack,
            "CDF breakpoint abscissa outside [0,1]");
    require(k[i].y >= -kSlack && k[i].y <= 1.0 + kSlack,
            "CDF value outside [0,1]");
    k[i].x = std::clamp(k[i].x, 0.0, 1.0);
    k[i].y = std::clamp(k[i].y, 0.0, 1.0);
    if (i > 0) {
      require(k[i].x >= k[i - 1].x, "CDF breakpoints must be sorted by x");
      require(k[i].y >= k[i - 1].y - kSlack, "CDF must be non-decreasing");
      k[i].y = std::max(k[i].y, k[i - 1].y);
    }
  }
  require(std::abs(k.back().y - 1.0) <= kSlack, "CDF must end at 1");
  k.back().y = 1.0;
  if (k.front().y > 0.0) k.insert(k.begin(), {k.front().x, 0.0});
  if (k.front().x > 0.0) k.insert(k.begin(), {0.0, 0.0});
  if (k.back().x < 1.0) k.push_back({1.0, 1.0});
  return k;
}

// Sub-measure of mu on [a, b) (or [a, b] when include_b), as a mass curve
// starting at (a, 0).
std::vector<Knot> restrict_curve(const PiecewiseLinear& cdf, double a, double b,
                                 bool include_b) {
  const double base = cdf.left(a);
  std::vector<Knot> out{{a, 0.0}};
  for (const auto& k : cdf.knots()) {
    if (k.x < a) continue;
    if (k.x > b || (k.x == b && !include_b)) break;
    out.push_back({k.x, k.y - base});
  }
  const double end = include_b ? cdf(b) : cdf.left(b);
  out.push_back({b, end - base});
  for (auto& k : out) k.y = std::max(k.y, 0.0);
  for (std::size_t i = 1; i < out.size(); ++i) {
    out[i].y = std::max(out[i].y, out[i - 1].y);
  }
  return out;
}

}  // namespace

Measure1D::Measure1D(std::vector<Knot> cdf_knots)
    : cdf_(canonical_cdf(std::move(cdf_knots))),
      quantile_(cdf_.swapped()) {}

Measure1D Measure1D::lebesgue() { return Measure1D({{0.0, 0.0}, {1.0, 1.0}}); }

Measure1D Measure1D::uniform(double a, double b) {
  require(0.0 <= a && a < b && b <= 1.0, "uniform needs 0 <= a < b <= 1");
  return Measure1D({{a, 0.0}, {b, 1.0}});
}

Measure1D Measure1D::dirac(double x) {
  require(x >= 0.0 && x <= 1.0, "atom outside [0,1]");
  return Measure1D({{x, 0.0}, {x, 1.0}});
}

Measure1D Measure1D::from_atoms(std::span<const double> points,
                                std::span<const double> weights) {
  require(!points.empty(), "atomic measure needs at least one atom");
  require(points.size() == weights.size(),
          "atom positions and weights have different lengths");
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return points[i] < points[j]; });
  double total = 0.0;
  for (double w : weights) {
    require(std::isfinite(w) && w > 0.0, "weights must be positive");
    total += w;
  }
  require(std::abs(total - 1.0) <= kWeightTolerance, "weights must sum to 1");
  std::vector<Knot> knots;
  double cum = 0.0;
  for (auto i : order) {
    require(points[i] >= 0.0 && points[i] <= 1.0, "atom outside [0,1]");
    knots.push_back({points[i], cum});
    cum += weights[i];
    knots.push_back({points[i], cum});
  }
  return Measure1D(std::move(knots));
}

Measure1D Measure1D::from_cdf(const std::function<double(double)>& cdf,
                              std::size_t segments) {
  return Measure1D(PiecewiseLinear::sample(cdf, segments).knots());
}

double Measure1D::quantile(double t) const {
  if (!(t >= 0.0 && t < 1.0)) {
    throw DomainError("quantile level must lie in [0,1)");
  }
  return quantile_(t);
}

bool Measure1D::faithful() const {
  const auto& k = cdf_.knots();
  for (std::size_t i = 1; i < k.size(); ++i) {
    if (k[i].y == k[i - 1].y && k[i].x > k[i - 1].x) return false;
  }
  return true;
}

bool Measure1D::diffuse() const { return atoms().empty(); }

std::vector<std::pair<double, double>> Measure1D::atoms() const {
  std::vector<std::pair<double, double>> out;
  const auto& k = cdf_.knots();
  for (std::size_t i = 1; i < k.size(); ++i) {
    if (k[i].x == k[i - 1].x && k[i].y > k[i - 1].y) {
      out.emplace_back(k[i].x, k[i].y - k[i - 1].y);
    }
  }
  return out;
}

double Measure1D::mean() const {
  const auto& k = cdf_.knots();
  double m = 0.0;
  for (std::size_t i = 1; i < k.size(); ++i) {
    m += (k[i].y - k[i - 1].y) * 0.5 * (k[i].x + k[i - 1].x);
  }
  return m;
}

Measure1D pushforward(const Measure1D& mu, const MonotoneMap& h) {
  const auto& k = mu.knots();
  const auto hx = h.graph().breakpoints();
  std::vector<Knot> out;
  out.reserve(2 * (k.size() + hx.size()));
  // An atom at x is carried to h(x); a jump of h inside a slanted piece
  // opens a gap in the image.
  auto emit = [&](double x, double y, bool with_left) {
    if (with_left) out.push_back({h.left(x), y});
    out.push_back({h(x), y});
  };
  for (std::size_t i = 0; i < k.size(); ++i) {
    emit(k[i].x, k[i].y, i == 0 || k[i - 1].x != k[i].x);
    if (i + 1 == k.size() || !(k[i].x < k[i + 1].x)) continue;
    auto first = std::upper_bound(hx.begin(), hx.end(), k[i].x);
    auto last = std::lower_bound(hx.begin(), hx.end(), k[i + 1].x);
    for (auto it = first; it != last; ++it) {
      const double y = k[i].y + (k[i + 1].y - k[i].y) * (*it - k[i].x) /
                                    (k[i + 1].x - k[i].x);
      emit(*it, y, true);
    }
  }
  return Measure1D(std::move(out));
}

Measure1D pushforward(const Measure1D& mu, const PiecewiseLinear& f) {
  require(f.continuous(), "pushforward map must be continuous");
  require(f.lo() <= 0.0 && f.hi() >= 1.0, "pushforward map must cover [0,1]");
  require(f.min_value() >= -1e-12 && f.max_value() <= 1.0 + 1e-12,
          "pushforward map must take values in [0,1]");
  std::vector<double> xs{0.0};
  for (double x : f.breakpoints()) {
    if (x > 0.0 && x < 1.0) xs.push_back(x);
  }
  xs.push_back(1.0);

  std::vector<PiecewiseLinear> pieces;
  for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
    const double a = xs[s];
    const double b = xs[s + 1];
    const bool last = s + 2 == xs.size();
    auto curve = restrict_curve(mu.cdf_graph(), a, b, last);
    const double mass = curve.back().y;
    if (mass <= 0.0) continue;
    const double fa = std::clamp(f(a), 0.0, 1.0);
    const double fb = std::clamp(f.left(b), 0.0, 1.0);
    std::vector<Knot> image;
    image.reserve(curve.size());
    if (fa == fb) {
      image = {{fa, 0.0}, {fa, mass}};
    } else {
      auto map = [&](double x) {
        return std::clamp(fa + (fb - fa) * (x - a) / (b - a), 0.0, 1.0);
      };
      if (fb > fa) {
        for (const auto& k : curve) image.push_back({map(k.x), k.y});
      } else {
        for (auto it = curve.rbegin(); it != curve.rend(); ++it) {
          image.push_back({map(it->x), mass - it->y});
        }
      }
      for (std::size_t i = 1; i < image.size(); ++i) {
        image[i].x = std::max(image[i].x, image[i - 1].x);
        image[i].y = std::max(image[i].y, image[i - 1].y);
      }
    }
    pieces.emplace_back(std::move(image));
  }
  std::vector<std::pair<double, const PiecewiseLinear*>> terms;
  for (const auto& p : pieces) terms.emplace_back(1.0, &p);
  return Measure1D(linear_combination(terms).knots());
}

Measure1D mixture(std::span<const std::pair<double, Measure1D>> parts) {
  require(!parts.empty(), "mixture of no measures");
  std::vector<std::pair<double, const PiecewiseLinear*>> terms;
  double total = 0.0;
  for (const auto& [w, m] : parts) {
    require(w >= 0.0, "mixture weights must be non-negative");
    total += w;
    if (w > 0.0) terms.emplace_back(w, &m.cdf_graph());
  }
  require(std::abs(total - 1.0) <= kWeightTolerance,
          "mixture weights must sum to 1");
  return Measure1D(linear_combination(terms).knots());
}

Measure1D empirical_measure(std::span<const double> samples) {
  require(!samples.empty(), "empirical measure of an empty sample");
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  std::vector<Knot> knots;
  std::size_t count = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require(xs[i] >= 0.0 && xs[i] <= 1.0, "sample outside [0,1]");
    if (i > 0 && xs[i] == xs[i - 1]) continue;
    std::size_t j = i;
    while (j < xs.size() && xs[j] == xs[i]) ++j;
    knots.push_back({xs[i], static_cast<double>(count) / n});
    count += j - i;
    knots.push_back({xs[i], static_cast<double>(count) / n});
  }
  return Measure1D(std::move(knots));
}

double integral_abs_pow(const PiecewiseLinear& g, const Measure1D& mu,
                        double p) {
  const auto& k = mu.knots();
  const auto gx = g.breakpoints();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double mass = k[i + 1].y - k[i].y;
    if (mass <= 0.0) continue;
    if (k[i].x == k[i + 1].x) {
      total += mass * std::pow(std::abs(g(k[i].x)), p);
      continue;
    }
    const double density = mass / (k[i + 1].x - k[i].x);
    double a = k[i].x;
    auto it = std::upper_bound(gx.begin(), gx.end(), a);
    for (;;) {
      const double b = (it != gx.end() && *it < k[i + 1].x) ? *it : k[i + 1].x;
      total += density * integrate_abs_pow(g(a), g.left(b), b - a, p);
      if (b == k[i + 1].x) break;
      a = b;
      ++it;
    }
  }
  return total;
}

double cdf_sup_distance(const Measure1D& a, const Measure1D& b) {
  auto xs = a.cdf_graph().breakpoints();
  const auto xb = b.cdf_graph().breakpoints();
  xs.insert(xs.end(), xb.begin(), xb.end());
  double sup = 0.0;
  for (double x : xs) {
    sup = std::max(sup, std::abs(a.cdf(x) - b.cdf(x)));
    sup = std::max(sup, std::abs(a.cdf_left(x) - b.cdf_left(x)));
  }
  return sup;
}

}  // namespace traceport
