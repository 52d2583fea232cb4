#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace traceport {

struct Knot {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Knot&, const Knot&) = default;
};

// Right-continuous piecewise-linear function on [lo, hi].
//
// Knots have non-decreasing abscissae. Two consecutive knots with the same x
// encode a jump at x; the function takes the value of the last knot there.
// Outside [lo, hi] the function is extended by its end values.
//
// The same representation doubles as the completed graph of a monotone
// curve: a CDF whose knots are non-decreasing in both coordinates is turned
// into its right-continuous quantile by swapped().
class PiecewiseLinear {
 public:
  PiecewiseLinear() : PiecewiseLinear(std::vector<Knot>{{0.0, 0.0}}) {}
  explicit PiecewiseLinear(std::vector<Knot> knots);

  static PiecewiseLinear constant(double c, double lo = 0.0, double hi = 1.0);
  static PiecewiseLinear identity(double lo = 0.0, double hi = 1.0);
  // Linear interpolant of f on `segments` equal pieces of [lo, hi].
  static PiecewiseLinear sample(const std::function<double(double)>& f,
                                std::size_t segments, double lo = 0.0,
                                double hi = 1.0);

  const std::vector<Knot>& knots() const { return knots_; }
  double lo() const { return knots_.front().x; }
  double hi() const { return knots_.back().x; }

  double operator()(double x) const;
  double left(double x) const;

  bool continuous() const;
  bool non_decreasing() const;
  bool is_identity(double tol = 0.0) const;
  bool is_constant(double tol = 0.0) const;
  double min_value() const;
  double max_value() const;
  // sup |f| over the domain, including both sides of every jump.
  double sup_abs() const;
  // Distinct abscissae in increasing order.
  std::vector<double> breakpoints() const;

  // Graph reflected across the diagonal. Requires non-decreasing values.
  PiecewiseLinear swapped() const;
  // (*this) o inner. The outer function must be continuous.
  PiecewiseLinear compose(const PiecewiseLinear& inner) const;
  // Drops knots that are interior to a straight segment.
  PiecewiseLinear simplified(double tol = 0.0) const;

  PiecewiseLinear operator-() const;

 private:
  std::vector<Knot> knots_;
};

// sum_i w_i f_i on the union of the breakpoints.
PiecewiseLinear linear_combination(
    std::span<const std::pair<double, const PiecewiseLinear*>> terms);

PiecewiseLinear operator+(const PiecewiseLinear& a, const PiecewiseLinear& b);
PiecewiseLinear operator-(const PiecewiseLinear& a, const PiecewiseLinear& b);
PiecewiseLinear operator*(double s, const PiecewiseLinear& f);

// Sorts a list of continuous functions pointwise: the i-th output is the
// i-th smallest value at every x. Crossings are inserted as knots, so the
// result is exact.
std::vector<PiecewiseLinear> sort_pointwise(
    std::span<const PiecewiseLinear> fns);

PiecewiseLinear pointwise_max(const PiecewiseLinear& a,
                              const PiecewiseLinear& b);

// Exact integral over a segment of length `length` of |v(s)|^p, where v is
// linear from v0 to v1.
double integrate_abs_pow(double v0, double v1, double length, double p);

}  // namespace traceport
