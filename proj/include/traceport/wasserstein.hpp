#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "traceport/metric_measure.hpp"
#include "traceport/profile.hpp"
#include "traceport/solvers.hpp"

namespace traceport {

// Coupling of two discrete measures: coupling[i][j] is the mass moved from
// source.support()[i] to target.support()[j].
struct TransportPlan {
  std::vector<std::size_t> source_support;
  std::vector<std::size_t> target_support;
  solvers::Matrix coupling;
};

// Largest marginal violation of a plan against the two measures.
double coupling_error(const TransportPlan& plan, const DiscreteMeasure& mu,
                      const DiscreteMeasure& nu);

// Kantorovich potential on the listed points of the space.
struct DualPotential {
  std::vector<std::size_t> points;
  std::vector<double> values;
};

// Bijection between two equal-size point lists (indices into the space).
struct Matching {
  std::vector<std::size_t> sources;
  std::vector<std::size_t> targets;  // sources[i] is matched to targets[i]
};

using Witness = std::variant<std::monostate, TransportPlan, DualPotential, Matching>;

struct DistanceReport {
  double value = 0.0;
  std::string method;
  Witness witness;
};

struct WpOptions {
  // Equal-weight expansion of rationally weighted measures is used up to
  // this many expanded points per side; larger instances use the
  // transportation solver.
  std::size_t expansion_cap = 512;
};

// W_p as the minimum over couplings, p in [1, inf). Throws DomainError for
// p = inf (use winf).
DistanceReport wp_primal(const FiniteMetricSpace& space,
                         const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         double p, const WpOptions& options = {});

// W_p on [0,1] through quantile functions, p in [1, inf).
double wp_quantile(const Measure1D& mu, const Measure1D& nu, double p);
// Essential supremum of |F^{-1} - G^{-1}|, the p = inf case of the above.
double winf_quantile(const Measure1D& mu, const Measure1D& nu);

// W_inf: smallest pairwise distance r admitting a coupling supported on
// {d <= r}.
DistanceReport winf(const FiniteMetricSpace& space, const DiscreteMeasure& mu,
                    const DiscreteMeasure& nu,
                    const WpOptions& options = {});

// W_1 through the Kantorovich-Rubinstein dual linear program.
DistanceReport w1_dual(const FiniteMetricSpace& space,
                       const DiscreteMeasure& mu, const DiscreteMeasure& nu);

inline constexpr std::size_t kLevyProkhorovMaxSupport = 20;

// Levy-Prokhorov distance by subset enumeration; exact for combined
// supports of at most 20 points.
double levy_prokhorov(const FiniteMetricSpace& space, const DiscreteMeasure& mu,
                      const DiscreteMeasure& nu);

// (int (1/N) sum_j |lambda_j|^p dmu)^(1/p) for one trace measure mu.
double schatten_p_seminorm(const EigenvalueProfile& profile,
                           const Measure1D& mu, double p);

}  // namespace traceport
