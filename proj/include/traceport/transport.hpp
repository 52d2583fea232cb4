#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "traceport/metric_measure.hpp"
#include "traceport/monotone_map.hpp"
#include "traceport/wasserstein.hpp"

namespace traceport {

struct Rearrangement {
  MonotoneMap map;
  // Set when an input was not both faithful and diffuse and the map was
  // built from generalized inverses (it may then fail to push nu onto mu).
  bool relaxed = false;
};

// h = F^{-1} o G, the monotone map pushing nu (CDF G) onto mu (CDF F).
// Without `allow_relaxed`, non-faithful or non-diffuse inputs throw
// DomainError.
Rearrangement increasing_rearrangement(const Measure1D& nu, const Measure1D& mu,
                                       bool allow_relaxed = false);

// (int |h(t) - t|^p dnu)^(1/p); p = inf gives sup_{t in [0,1]} |h(t) - t|.
double displacement_norm(const MonotoneMap& h, const Measure1D& nu, double p);

struct TransportWitness {
  Matching matching;
  std::vector<std::vector<std::size_t>> paths;  // one geodesic per pair
  double bottleneck = 0.0;        // max_i d(x_i, y_sigma(i))
  double max_displacement = 0.0;  // max path length, summed edge by edge
};

// Bottleneck-optimal matching between two equal-size vertex lists with the
// shortest path of every matched pair.
TransportWitness geodesic_transport_witness(const GeodesicGraph& graph,
                                            std::span<const std::size_t> xs,
                                            std::span<const std::size_t> ys);

// Atomic measure on an arc, positions given by arc length.
struct ArcMeasure {
  std::vector<double> positions;
  std::vector<double> weights;
};

struct ArcTransportEstimate {
  double ratio = 0.0;
  double winf = 0.0;
  double order_preserving = 0.0;  // max chordal displacement of each
  double order_reversing = 0.0;   // monotone alignment
};

// Ratio of the best monotone-alignment displacement to W_inf for two atomic
// measures on the arc (chordal metric).
ArcTransportEstimate arc_transport_ratio(const ArcSpace& arc,
                                         const ArcMeasure& mu,
                                         const ArcMeasure& nu);

// The clustered pair: mass 1 - 1/n on n equally spaced atoms in [0, eps],
// mass 1/n on n equally spaced atoms over the whole arc; nu is its mirror
// image s -> theta - s.
std::pair<ArcMeasure, ArcMeasure> clustered_arc_measures(double theta,
                                                         std::size_t n,
                                                         double eps);

ArcTransportEstimate arc_transport_ratio(double theta, std::size_t n,
                                         double eps);

}  // namespace traceport
