#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "traceport/metric_measure.hpp"
#include "traceport/piecewise_linear.hpp"
#include "traceport/profile.hpp"

namespace traceport {

using BigInt = boost::multiprecision::cpp_int;

// Z_{p,q}: fibers M_{pq}, pinched to M_p and M_q at the endpoints.
struct DimensionDropSpec {
  std::uint64_t p = 1;
  std::uint64_t q = 1;

  DimensionDropSpec(std::uint64_t p, std::uint64_t q);
  bool prime() const;
  std::uint64_t fiber_size() const { return p * q; }
};

// A_{n,k}: fibers M_{nk}; n copies of a k-block at 0, n-1 copies plus a zero
// block at 1.
struct RazakSpec {
  std::uint64_t n = 2;
  std::uint64_t k = 1;

  RazakSpec(std::uint64_t n, std::uint64_t k);
  std::uint64_t fiber_size() const { return n * k; }
};

// C([0,1], M_n).
struct MatrixIntervalSpec {
  std::uint64_t n = 1;

  explicit MatrixIntervalSpec(std::uint64_t n);
  std::uint64_t fiber_size() const { return n; }
};

using AlgebraSpec = std::variant<DimensionDropSpec, RazakSpec, MatrixIntervalSpec>;

// Eigenvalue maps xi_1 <= ... <= xi_l of a diagonal morphism, stored as runs
// of identical maps with (arbitrary-precision) counts.
class EigenvalueMapFamily {
 public:
  struct Entry {
    PiecewiseLinear map;
    BigInt count = 1;
  };

  // Entries must already be ordered pointwise; throws ValidationError
  // otherwise.
  explicit EigenvalueMapFamily(std::vector<Entry> entries);
  // Sorts arbitrary maps pointwise into an ordered family with the same
  // fiberwise multiset.
  static EigenvalueMapFamily from_unordered(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  const BigInt& size() const { return size_; }
  BigInt identity_count() const;
  std::vector<double> breakpoints() const;
  // Profile of phi(f) for a scalar observable f; counts must fit in 64 bits.
  EigenvalueProfile apply(const PiecewiseLinear& observable) const;

 private:
  std::vector<Entry> entries_;
  BigInt size_;
};

// Throws ValidationError unless `map` is a continuous map [0,1] -> [0,1].
void check_map(const PiecewiseLinear& map);

// sup_t max_i |xi_i^a(t) - xi_i^b(t)|.
double d_diagonal(const EigenvalueMapFamily& a, const EigenvalueMapFamily& b);

// Bottleneck matching distance between two eigenvalue multisets.
double d_w_matrices(std::span<const std::complex<double>> a,
                    std::span<const std::complex<double>> b);

// Matching distance of two real multisets given as (value, multiplicity);
// in one dimension the sorted pairing is optimal.
double d_w_real(std::vector<std::pair<double, std::uint64_t>> a,
                std::vector<std::pair<double, std::uint64_t>> b);

inline constexpr std::size_t kDefaultProfileGrid = 512;

// sup over breakpoints plus a uniform grid of the fiberwise matching
// distance between two self-adjoint eigenvalue profiles.
double d_w_profiles(const EigenvalueProfile& a, const EigenvalueProfile& b,
                    std::size_t grid = kDefaultProfileGrid);

// Eigenvalues of g_L(t) with multiplicities.
std::vector<std::pair<double, std::uint64_t>> gl_profile(const AlgebraSpec& spec,
                                                         double t);

struct SeparationCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

// d_W of the concatenated g_L spectra at s and t against max_i |s_i - t_i|.
SeparationCheck gl_separation_check(const AlgebraSpec& spec,
                                    std::span<const double> s,
                                    std::span<const double> t);

// (1/l) sum_i (xi_i)_* mu.
Measure1D pushforward_trace(const EigenvalueMapFamily& fam, const Measure1D& mu);

// W_p between the pushed-forward traces; p may be infinite.
double wp_diagonal_pair(const EigenvalueMapFamily& a, const EigenvalueMapFamily& b,
                        const Measure1D& mu, double p);

// Seeded family of 1-Lipschitz piecewise-linear observables on [0,1] with
// values in [0,1].
std::vector<PiecewiseLinear> lipschitz_battery(std::size_t count,
                                               std::uint64_t seed,
                                               std::size_t pieces = 6);

// Seeded family of piecewise-linear functions with sup norm <= 1.
std::vector<PiecewiseLinear> unit_ball_battery(std::size_t count,
                                               std::uint64_t seed,
                                               std::size_t pieces = 6);

struct SampledDw {
  double value = 0.0;         // max over the battery and g_L
  double at_gl = 0.0;         // g_L observable alone
  double battery_max = 0.0;   // random observables alone
};

// Lower estimate of the Cuntz distance of two diagonal morphisms of
// C([0,1]) (or dimension-drop) type: observables are applied to the
// eigenvalue maps and the fiberwise matching distances compared.
SampledDw sampled_d_w(const EigenvalueMapFamily& a, const EigenvalueMapFamily& b,
                      std::span<const PiecewiseLinear> battery,
                      std::size_t grid = kDefaultProfileGrid);

// One stage of the inductive-limit construction over prime dimension drop
// algebras.
struct StepPlan {
  unsigned m = 1;
  BigInt p;
  BigInt q;
  unsigned n = 0;
  BigInt p_next;   // p^{n+1}
  BigInt q_next;   // q^{n+1}
  BigInt k;        // p^n q^n, number of eigenvalue maps
  double c = 0.5;
  BigInt identity_count;  // k - q_next
  BigInt constant_count;  // p_next
  BigInt max_count;       // q_next - p_next
  BigInt r0;              // q^n (p^n - q)
  BigInt r1;              // p^n (q^n - p)
  double identity_proportion = 0.0;
  double defect_bound = 0.0;  // 2 (1 - identity_proportion)

  // The maps t, c and max{c, t} with their counts, in that order (not
  // pointwise ordered).
  std::vector<EigenvalueMapFamily::Entry> pattern() const;
  // The same multiset sorted pointwise.
  EigenvalueMapFamily ordered_family() const;
};

inline constexpr unsigned kDefaultExponentCap = 64;

StepPlan jiangsu_step(const BigInt& p, const BigInt& q, unsigned m, double c,
                      unsigned exponent_cap = kDefaultExponentCap);

// max over f of || (1/k) sum_i f o xi_i - f ||_inf. Each f must have sup
// norm at most 1.
double intertwining_defect(std::span<const EigenvalueMapFamily::Entry> maps,
                           std::span<const PiecewiseLinear> fns);
double intertwining_defect(const EigenvalueMapFamily& fam,
                           std::span<const PiecewiseLinear> fns);
double intertwining_defect(const StepPlan& plan,
                           std::span<const PiecewiseLinear> fns);

struct TowerReport {
  std::vector<StepPlan> stages;
  double cumulative_defect_bound = 0.0;  // sum of 2 (1 - rho_m)
  double cumulative_square_bound = 0.0;  // sum of 2 / m^2
  double density_gap = 1.0;  // sup distance from [0,1] to the constants
  bool dense = false;        // density_gap <= epsilon
};

TowerReport simulate_tower(const BigInt& p0, const BigInt& q0,
                           std::span<const double> c_seq, unsigned stages,
                           double density_epsilon = 0.05,
                           unsigned exponent_cap = kDefaultExponentCap);

std::string to_string(const BigInt& x);

}  // namespace traceport
