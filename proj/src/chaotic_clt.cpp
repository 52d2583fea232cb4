#include "traceport/chaotic_clt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "traceport/error.hpp"

namespace traceport {

void PMParams::validate() const {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw DomainError("alpha must lie in (0, 1/2)");
  }
  require(steps >= 1, "orbit length must be positive");
}

double pm_map(double alpha, double t) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw DomainError("alpha must lie in (0, 1/2)");
  }
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("t must lie in [0,1]");
  if (t >= 0.5) return 2.0 * t - 1.0;
  return std::min(1.0, t + std::pow(2.0, alpha) * std::pow(t, 1.0 + alpha));
}

double initial_point(const PMParams& params) {
  std::mt19937_64 rng(params.seed);
  return std::uniform_real_distribution<double>(0.1, 0.9)(rng);
}

std::vector<double> orbit(const PMParams& params, double t0) {
  params.validate();
  if (!(t0 >= 0.0 && t0 <= 1.0)) throw DomainError("t0 must lie in [0,1]");
  std::vector<double> out(params.steps);
  const double a = params.alpha;
  const double scale = std::pow(2.0, a);
  double t = t0;
  for (std::size_t i = 0; i < params.steps; ++i) {
    out[i] = t;
    t = t >= 0.5 ? 2.0 * t - 1.0 : std::min(1.0, t + scale * std::pow(t, 1.0 + a));
  }
  return out;
}

InvariantEstimate invariant_measure_estimate(const PMParams& params,
                                             std::size_t burn, double t0) {
  params.validate();
  require(params.steps >= burn && params.steps - burn >= kMinInvariantSamples,
          "orbit too short: need at least 10000 samples after burn-in");
  const auto o = orbit(params, t0 < 0.0 ? initial_point(params) : t0);
  auto m = empirical_measure(std::span(o).subspan(burn));
  const bool degenerate = m.atoms().size() == 1;
  return {std::move(m), degenerate};
}

VarianceEstimate estimate_variance(std::span<const double> values) {
  const std::size_t n = values.size();
  require(n >= 4, "variance estimate needs at least 4 samples");
  VarianceEstimate v;
  v.block_length = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const std::size_t blocks = n / v.block_length;
  std::vector<double> sums(blocks, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t i = 0; i < v.block_length; ++i) {
      sums[b] += values[b * v.block_length + i];
    }
    sums[b] /= std::sqrt(static_cast<double>(v.block_length));
  }
  const double mean = std::accumulate(sums.begin(), sums.end(), 0.0) /
                      static_cast<double>(blocks);
  double ss = 0.0;
  for (double s : sums) ss += (s - mean) * (s - mean);
  v.block = blocks > 1 ? ss / static_cast<double>(blocks - 1) : 0.0;

  v.lags = std::min<std::size_t>(n / 10, static_cast<std::size_t>(std::cbrt(static_cast<double>(n))));
  const double mu = std::accumulate(values.begin(), values.end(), 0.0) /
                    static_cast<double>(n);
  auto gamma = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) {
      acc += (values[i] - mu) * (values[i + lag] - mu);
    }
    return acc / static_cast<double>(n);
  };
  v.green_kubo = gamma(0);
  for (std::size_t l = 1; l <= v.lags; ++l) v.green_kubo += 2.0 * gamma(l);
  return v;
}

double w1_to_normal(std::span<const double> points, std::span<const double> weights,
                    double sigma2) {
  require(points.size() == weights.size(), "points and weights differ in length");
  require(!points.empty(), "W_1 of an empty measure");
  require(sigma2 > 0.0, "normal variance must be positive");
  const double sigma = std::sqrt(sigma2);
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  double total = 0.0;
  for (double w : weights) {
    require(w >= 0.0, "weights must be non-negative");
    total += w;
  }
  require(total > 0.0, "weights must have positive total");

  const boost::math::normal_distribution<double> std_normal;
  auto pdf = [&](double z) { return std::isinf(z) ? 0.0 : boost::math::pdf(std_normal, z); };
  // int_{za}^{zb} |x - sigma z| phi(z) dz for za <= zb, split at z = x / sigma.
  auto piece = [&](double x, double za, double zb, double ua, double ub) {
    // int (x - sigma z) phi(z) dz = x (Phi_b - Phi_a) + sigma (phi_b - phi_a).
    auto signed_part = [&](double z0, double z1, double u0, double u1) {
      return x * (u1 - u0) + sigma * (pdf(z1) - pdf(z0));
    };
    const double zc = x / sigma;
    if (zc <= za) return -signed_part(za, zb, ua, ub);
    if (zc >= zb) return signed_part(za, zb, ua, ub);
    const double uc = boost::math::cdf(std_normal, zc);
    return signed_part(za, zc, ua, uc) - signed_part(zc, zb, uc, ub);
  };
  auto quantile = [&](double u) {
    if (u <= 0.0) return -std::numeric_limits<double>::infinity();
    if (u >= 1.0) return std::numeric_limits<double>::infinity();
    return boost::math::quantile(std_normal, u);
  };

  double acc = 0.0;
  double u0 = 0.0;
  double z0 = quantile(0.0);
  double cum = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    cum += weights[order[r]];
    const double u1 = r + 1 == order.size() ? 1.0 : std::min(1.0, cum / total);
    if (u1 <= u0) continue;
    const double z1 = quantile(u1);
    acc += piece(points[order[r]], z0, z1, u0, u1);
    u0 = u1;
    z0 = z1;
  }
  return std::max(0.0, acc);
}

CLTResult clt_experiment(const PMParams& params, const PiecewiseLinear& f,
                         std::span<const std::size_t> checkpoints,
                         const CLTOptions& options) {
  params.validate();
  require(!checkpoints.empty(), "no checkpoints given");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    require(checkpoints[i] >= 1 && checkpoints[i] <= params.steps,
            "checkpoints must lie in [1, N]");
    require(i == 0 || checkpoints[i] > checkpoints[i - 1],
            "checkpoints must be strictly increasing");
  }

  CLTResult r;
  r.observable = describe(f);
  r.initial_point = initial_point(params);
  const auto o = orbit(params, r.initial_point);
  std::vector<double> values(o.size());
  for (std::size_t i = 0; i < o.size(); ++i) values[i] = f(o[i]);
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                      static_cast<double>(values.size());
  if (options.center) {
    r.centering_shift = mean;
    for (double& v : values) v -= mean;
  } else {
    require(std::abs(mean) < kCenteringTolerance,
            "observable is not centered: orbit mean exceeds 1e-3");
  }

  const auto var = estimate_variance(values);
  r.sigma2 = var.block;
  r.sigma2_green_kubo = var.green_kubo;
  if (!(r.sigma2 >= kDegenerateVariance)) {
    throw ComputationError("degenerate variance: sigma^2 estimate below 1e-6");
  }

  const std::size_t last = checkpoints.back();
  std::vector<double> points(last);
  std::vector<double> weights(last);
  double s = 0.0;
  for (std::size_t k = 1; k <= last; ++k) {
    s += values[k - 1];
    points[k - 1] = s / std::sqrt(static_cast<double>(k));
    weights[k - 1] = 1.0 / static_cast<double>(k);
  }
  for (std::size_t n : checkpoints) {
    r.checkpoints.push_back(
        {n, w1_to_normal(std::span(points).first(n), std::span(weights).first(n),
                         r.sigma2)});
  }
  return r;
}

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TRACEPORT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

std::vector<CLTResult> clt_ensemble(double alpha, std::size_t steps,
                                    std::span<const std::uint64_t> seeds,
                                    const PiecewiseLinear& f,
                                    std::span<const std::size_t> checkpoints,
                                    const CLTOptions& options) {
  std::vector<CLTResult> out(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        out[i] = clt_experiment({alpha, seeds[i], steps}, f, checkpoints, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned workers =
      std::min<unsigned>(worker_count(), static_cast<unsigned>(seeds.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string describe(const PiecewiseLinear& f) {
  std::ostringstream os;
  os.precision(17);
  os << "piecewise-linear[";
  const auto& k = f.knots();
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i) os << ", ";
    os << "(" << k[i].x << ", " << k[i].y << ")";
  }
  os << "]";
  return os.str();
}

}  // namespace traceport
