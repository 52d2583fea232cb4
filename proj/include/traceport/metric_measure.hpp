#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "traceport/monotone_map.hpp"
#include "traceport/piecewise_linear.hpp"

namespace traceport {

inline constexpr double kDefaultTolerance = 1e-9;
inline constexpr double kWeightTolerance = 1e-12;
inline constexpr std::size_t kDefaultCdfResolution = 1024;

// Finite metric space given by its full distance matrix.
class FiniteMetricSpace {
 public:
  // Throws ValidationError unless `d` is an n x n metric (tolerance `tol`
  // for symmetry and the triangle inequality).
  explicit FiniteMetricSpace(std::vector<std::vector<double>> d,
                             double tol = kDefaultTolerance);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const {
    return d_[i * n_ + j];
  }
  // Distinct off-diagonal distances in increasing order.
  std::vector<double> sorted_distances() const;
  std::vector<std::vector<double>> matrix() const;

 private:
  std::size_t n_;
  std::vector<double> d_;
};

// Returns an empty string when `d` is a metric, otherwise a description of
// the first violated axiom.
std::string metric_violation(const std::vector<std::vector<double>>& d,
                             double tol = kDefaultTolerance);

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double weight = 0.0;
};

// Undirected weighted graph whose shortest paths define an intrinsic metric.
class GeodesicGraph {
 public:
  GeodesicGraph(std::size_t vertices, std::vector<Edge> edges);

  std::size_t vertices() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
};

class ShortestPaths {
 public:
  const FiniteMetricSpace& metric() const { return metric_; }
  // Vertex sequence of one shortest path from i to j (inclusive).
  std::vector<std::size_t> path(std::size_t i, std::size_t j) const;

 private:
  friend ShortestPaths shortest_path_metric(const GeodesicGraph& graph);
  ShortestPaths(FiniteMetricSpace metric, std::vector<std::size_t> next,
                std::size_t n)
      : metric_(std::move(metric)), next_(std::move(next)), n_(n) {}

  FiniteMetricSpace metric_;
  std::vector<std::size_t> next_;
  std::size_t n_;
};

// All-pairs shortest paths (Floyd-Warshall). Throws ValidationError when the
// graph is disconnected.
ShortestPaths shortest_path_metric(const GeodesicGraph& graph);

// Circular arc of angle theta on the unit circle, parameterized by arc
// length, with the chordal metric.
class ArcSpace {
 public:
  explicit ArcSpace(double theta);

  double theta() const { return theta_; }
  double distance(double s, double t) const;
  FiniteMetricSpace sample(std::span<const double> points) const;

 private:
  double theta_;
};

// Points of [0,1] (or any subset of the line) with |x - y|.
FiniteMetricSpace interval_space(std::span<const double> points);

// Finitely supported probability measure on a finite metric space.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::vector<std::size_t> support, std::vector<double> weights);

  static DiscreteMeasure dirac(std::size_t point);
  static DiscreteMeasure uniform(std::vector<std::size_t> support);

  const std::vector<std::size_t>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return support_.size(); }
  // Weight at a point of the space (0 off the support).
  double mass_at(std::size_t point) const;
  // Throws unless every support index is a point of the space.
  void check_on(const FiniteMetricSpace& space) const;
  // True when all weights are equal.
  bool equal_weight() const;

 private:
  std::vector<std::size_t> support_;
  std::vector<double> weights_;
};

// Borel probability measure on [0,1] with a piecewise-linear CDF.
//
// The CDF is stored as the completed graph of F: knots non-decreasing in
// both coordinates, starting at (0,0) and ending at (1,1). A vertical pair of
// knots is an atom, a horizontal pair is a gap in the support.
class Measure1D {
 public:
  explicit Measure1D(std::vector<Knot> cdf_knots);

  static Measure1D lebesgue();
  static Measure1D uniform(double a, double b);
  static Measure1D dirac(double x);
  static Measure1D from_atoms(std::span<const double> points,
                              std::span<const double> weights);
  // Piecewise-linear interpolant of a continuous CDF on `segments` pieces.
  static Measure1D from_cdf(const std::function<double(double)>& cdf,
                            std::size_t segments = kDefaultCdfResolution);

  double cdf(double x) const { return cdf_(x); }
  double cdf_left(double x) const { return cdf_.left(x); }
  // Right-continuous generalized inverse inf{x : F(x) > t}, t in [0,1).
  double quantile(double t) const;
  const PiecewiseLinear& cdf_graph() const { return cdf_; }
  const PiecewiseLinear& quantile_graph() const { return quantile_; }
  const std::vector<Knot>& knots() const { return cdf_.knots(); }

  bool faithful() const;
  bool diffuse() const;
  // (position, mass) of every atom.
  std::vector<std::pair<double, double>> atoms() const;
  double mean() const;

 private:
  PiecewiseLinear cdf_;
  PiecewiseLinear quantile_;
};

Measure1D pushforward(const Measure1D& mu, const MonotoneMap& h);
// Pushforward along an arbitrary continuous piecewise-linear map of [0,1]
// into [0,1]; monotone pieces are pushed separately and summed.
Measure1D pushforward(const Measure1D& mu, const PiecewiseLinear& f);
// sum_i w_i mu_i with non-negative weights summing to 1.
Measure1D mixture(std::span<const std::pair<double, Measure1D>> parts);

// Equal-weight atomic measure; repeated samples merge into one atom.
Measure1D empirical_measure(std::span<const double> samples);

// Exact integral of |g|^p against mu (atoms plus piecewise-uniform density).
double integral_abs_pow(const PiecewiseLinear& g, const Measure1D& mu, double p);

// sup_x |F(x) - G(x)| over both sides of every breakpoint.
double cdf_sup_distance(const Measure1D& a, const Measure1D& b);

}  // namespace traceport
