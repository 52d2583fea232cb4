#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Combinatorial and linear-programming kernels shared by the distance
// computations. Dense matrices are row-major std::vector<std::vector<double>>.
namespace traceport::solvers {

using Matrix = std::vector<std::vector<double>>;

struct Assignment {
  std::vector<std::size_t> row_to_col;
  double value = 0.0;  // sum (hungarian) or max (bottleneck) of chosen costs
};

// Minimum-sum perfect assignment on a square cost matrix (Kuhn-Munkres with
// potentials, O(n^3)).
Assignment hungarian(const Matrix& cost);

// Minimum over perfect assignments of the largest chosen cost. The returned
// permutation is the lexicographically smallest among all optimal ones.
// The value is one of the matrix entries, so it is exact.
Assignment bottleneck_assignment(const Matrix& cost);

// True when the bipartite graph {(i,j) : allowed[i][j]} has a perfect
// matching.
bool has_perfect_matching(const std::vector<std::vector<char>>& allowed);

struct TransportSolution {
  Matrix plan;         // plan[i][j] >= 0, rows sum to supply, cols to demand
  double cost = 0.0;   // sum plan[i][j] * cost[i][j]
};

// Minimum-cost transportation problem, solved exactly (up to rounding) by
// successive shortest paths with Dijkstra on reduced costs. Supplies and
// demands must have equal totals; costs must be non-negative.
TransportSolution min_cost_transport(std::span<const double> supply,
                                     std::span<const double> demand,
                                     const Matrix& cost);

// Maximum flow of the bipartite network source -> i (cap supply[i]) -> j
// (uncapacitated where allowed[i][j]) -> sink (cap demand[j]). Returns the
// flow on the middle arcs.
Matrix bipartite_max_flow(std::span<const double> supply,
                          std::span<const double> demand,
                          const std::vector<std::vector<char>>& allowed,
                          double* total = nullptr);

struct LpSolution {
  std::vector<double> x;
  double objective = 0.0;
};

// Maximizes c.x subject to A x <= b, x >= 0, for b >= 0 (so the origin is
// feasible). Dense tableau simplex with Bland's rule. Throws
// ComputationError when unbounded.
LpSolution simplex_maximize(const Matrix& A, std::span<const double> b,
                            std::span<const double> c);

}  // namespace traceport::solvers
