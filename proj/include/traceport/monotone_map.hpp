#pragma once

#include <vector>

#include "traceport/piecewise_linear.hpp"

namespace traceport {

// Non-decreasing piecewise-linear self-map of [0,1]. Jumps are allowed (two
// knots at the same t) so that generalized inverses of non-faithful CDFs can
// be represented; evaluation is right-continuous.
class MonotoneMap {
 public:
  MonotoneMap() : MonotoneMap(PiecewiseLinear::identity()) {}
  explicit MonotoneMap(PiecewiseLinear graph);
  explicit MonotoneMap(std::vector<Knot> knots)
      : MonotoneMap(PiecewiseLinear(std::move(knots))) {}

  static MonotoneMap identity() { return MonotoneMap(); }

  double operator()(double t) const { return graph_(t); }
  double left(double t) const { return graph_.left(t); }
  const PiecewiseLinear& graph() const { return graph_; }
  const std::vector<Knot>& knots() const { return graph_.knots(); }

  // Strictly increasing, continuous, h(0) = 0 and h(1) = 1.
  bool is_homeomorphism() const;

 private:
  PiecewiseLinear graph_;
};

}  // namespace traceport
