#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "traceport/piecewise_linear.hpp"

namespace traceport {

// Eigenvalue functions of a self-adjoint element of C([0,1], M_N) up to
// unitary conjugation: each function on [0,1] with its multiplicity.
class EigenvalueProfile {
 public:
  struct Entry {
    PiecewiseLinear fn;
    std::uint64_t multiplicity = 1;
  };

  explicit EigenvalueProfile(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  std::uint64_t total_multiplicity() const { return total_; }
  // Distinct breakpoints of all eigenvalue functions.
  std::vector<double> breakpoints() const;
  // Eigenvalues at t with multiplicity, sorted ascending, as (value, count).
  std::vector<std::pair<double, std::uint64_t>> at(double t) const;

 private:
  std::vector<Entry> entries_;
  std::uint64_t total_ = 0;
};

}  // namespace traceport
