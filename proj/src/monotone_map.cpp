#include "traceport/monotone_map.hpp"

#include "traceport/error.hpp"

namespace traceport {

MonotoneMap::MonotoneMap(PiecewiseLinear graph) : graph_(std::move(graph)) {
  require(graph_.non_decreasing(), "monotone map must be non-decreasing");
  require(graph_.lo() == 0.0 && graph_.hi() == 1.0,
          "monotone map must be defined on [0,1]");
  require(graph_.min_value() >= 0.0 && graph_.max_value() <= 1.0,
          "monotone map must take values in [0,1]");
}

bool MonotoneMap::is_homeomorphism() const {
  const auto& k = graph_.knots();
  if (k.front().y != 0.0 || k.back().y != 1.0) return false;
  for (std::size_t i = 1; i < k.size(); ++i) {
    if (!(k[i].x > k[i - 1].x && k[i].y > k[i - 1].y)) return false;
  }
  return true;
}

}  // namespace traceport
