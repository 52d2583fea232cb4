#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "traceport/metric_measure.hpp"
#include "traceport/piecewise_linear.hpp"

namespace traceport {

inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct PMParams {
  double alpha = 0.25;
  std::uint64_t seed = kDefaultSeed;
  std::size_t steps = 1000000;  // orbit length N

  void validate() const;
};

// Pomeau-Manneville map: t + 2^alpha t^(1+alpha) on [0, 1/2), 2t - 1 on
// [1/2, 1].
double pm_map(double alpha, double t);

// Initial point drawn uniformly from (0.1, 0.9) with the params' seed.
double initial_point(const PMParams& params);

// t0, h(t0), ..., h^(N-1)(t0).
std::vector<double> orbit(const PMParams& params, double t0);

struct InvariantEstimate {
  Measure1D measure;
  bool degenerate = false;  // a single atom (orbit trapped at a fixed point)
};

inline constexpr std::size_t kMinInvariantSamples = 10000;

// Empirical measure of the orbit after `burn` steps, started at t0 (or at
// initial_point when t0 is negative).
InvariantEstimate invariant_measure_estimate(const PMParams& params,
                                             std::size_t burn, double t0 = -1.0);

struct VarianceEstimate {
  double block = 0.0;        // variance of S_b f / sqrt(b), b = floor(sqrt(N))
  double green_kubo = 0.0;   // gamma_0 + 2 sum_{l<=L} gamma_l
  std::size_t block_length = 0;
  std::size_t lags = 0;
};

// Both estimators on an already centered sample sequence f(h^i t).
VarianceEstimate estimate_variance(std::span<const double> values);

// Quantile-formula W_1 between sum_j w_j delta_{x_j} and N(0, sigma2).
// Weights must be non-negative with positive total; they are normalized.
double w1_to_normal(std::span<const double> points, std::span<const double> weights,
                    double sigma2);

struct CLTCheckpoint {
  std::size_t n = 0;
  double w1 = 0.0;
};

struct CLTResult {
  std::vector<CLTCheckpoint> checkpoints;
  double sigma2 = 0.0;             // block estimate, used for the normal law
  double sigma2_green_kubo = 0.0;  // cross-check
  double centering_shift = 0.0;    // orbit mean of f that was subtracted
  double initial_point = 0.0;
  std::string observable;
};

inline constexpr double kCenteringTolerance = 1e-3;
inline constexpr double kDegenerateVariance = 1e-6;

struct CLTOptions {
  // Subtract the orbit mean of f. When false, f must already have orbit
  // mean below kCenteringTolerance in absolute value.
  bool center = true;
};

// Logarithmically weighted empirical measures T_n of S_k f / sqrt(k) and
// their W_1 distance to N(0, sigma^2) at every checkpoint n.
CLTResult clt_experiment(const PMParams& params, const PiecewiseLinear& f,
                         std::span<const std::size_t> checkpoints,
                         const CLTOptions& options = {});

// Worker count: hardware concurrency capped by TRACEPORT_THREADS.
unsigned worker_count();

// clt_experiment for several seeds, run in parallel; results follow the
// order of `seeds`.
std::vector<CLTResult> clt_ensemble(double alpha, std::size_t steps,
                                    std::span<const std::uint64_t> seeds,
                                    const PiecewiseLinear& f,
                                    std::span<const std::size_t> checkpoints,
                                    const CLTOptions& options = {});

std::string describe(const PiecewiseLinear& f);

}  // namespace traceport
