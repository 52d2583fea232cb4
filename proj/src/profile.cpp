#include "traceport/profile.hpp"

#include <algorithm>

#include "traceport/error.hpp"

namespace traceport {

EigenvalueProfile::EigenvalueProfile(std::vector<Entry> entries)
    : entries_(std::move(entries)) {
  require(!entries_.empty(), "eigenvalue profile is empty");
  for (const auto& e : entries_) {
    require(e.multiplicity > 0, "eigenvalue multiplicities must be positive");
    require(e.fn.continuous(), "eigenvalue functions must be continuous");
    total_ += e.multiplicity;
  }
}

std::vector<double> EigenvalueProfile::breakpoints() const {
  std::vector<double> xs;
  for (const auto& e : entries_) {
    const auto b = e.fn.breakpoints();
    xs.insert(xs.end(), b.begin(), b.end());
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

std::vector<std::pair<double, std::uint64_t>> EigenvalueProfile::at(
    double t) const {
  std::vector<std::pair<double, std::uint64_t>> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.emplace_back(e.fn(t), e.multiplicity);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace traceport
