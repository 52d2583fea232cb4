#include "traceport/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>

#include "traceport/error.hpp"

namespace traceport::solvers {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

void check_square(const Matrix& cost) {
  for (const auto& row : cost) {
    require(row.size() == cost.size(), "cost matrix must be square");
  }
}

// Kuhn's augmenting-path matching on an explicit allowed-edge matrix.
class Matcher {
 public:
  explicit Matcher(const std::vector<std::vector<char>>& allowed)
      : allowed_(allowed),
        n_(allowed.size()),
        row_(n_, kNone),
        col_(n_, kNone) {}

  bool perfect() {
    for (std::size_t i = 0; i < n_; ++i) {
      seen_.assign(n_, 0);
      if (!augment(i)) return false;
    }
    return true;
  }

  std::vector<std::size_t>& rows() { return row_; }
  std::vector<std::size_t>& cols() { return col_; }

 private:
  bool augment(std::size_t i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (!allowed_[i][j] || seen_[j]) continue;
      seen_[j] = 1;
      if (col_[j] == kNone || augment(col_[j])) {
        row_[i] = j;
        col_[j] = i;
        return true;
      }
    }
    return false;
  }

  const std::vector<std::vector<char>>& allowed_;
  std::size_t n_;
  std::vector<std::size_t> row_;
  std::vector<std::size_t> col_;
  std::vector<char> seen_;
};

std::vector<std::vector<char>> threshold_graph(const Matrix& cost, double r) {
  std::vector<std::vector<char>> allowed(cost.size(),
                                         std::vector<char>(cost.size(), 0));
  for (std::size_t i = 0; i < cost.size(); ++i) {
    for (std::size_t j = 0; j < cost.size(); ++j) {
      allowed[i][j] = cost[i][j] <= r ? 1 : 0;
    }
  }
  return allowed;
}

}  // namespace

Assignment hungarian(const Matrix& cost) {
  check_square(cost);
  const std::size_t n = cost.size();
  Assignment out;
  if (n == 0) return out;
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  out.row_to_col.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) out.row_to_col[p[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) out.value += cost[i][out.row_to_col[i]];
  return out;
}

bool has_perfect_matching(const std::vector<std::vector<char>>& allowed) {
  for (const auto& row : allowed) {
    require(row.size() == allowed.size(), "allowed matrix must be square");
  }
  return Matcher(allowed).perfect();
}

Assignment bottleneck_assignment(const Matrix& cost) {
  check_square(cost);
  const std::size_t n = cost.size();
  Assignment out;
  if (n == 0) return out;

  std::vector<double> values;
  values.reserve(n * n);
  for (const auto& row : cost) values.insert(values.end(), row.begin(), row.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  // Smallest threshold admitting a perfect matching.
  std::size_t lo = 0;
  std::size_t hi = values.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (has_perfect_matching(threshold_graph(cost, values[mid]))) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const double r = values[lo];
  const auto allowed = threshold_graph(cost, r);
  Matcher matcher(allowed);
  matcher.perfect();
  auto& row = matcher.rows();
  auto& col = matcher.cols();

  // Lexicographic improvement: row by row, move to the smallest column that
  // still admits a perfect matching of the unfixed rows. Switching row i from
  // column c to j < c needs an alternating path from j's current owner to c.
  std::vector<char> col_fixed(n, 0);
  std::vector<char> seen(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = row[i];
    for (std::size_t j = 0; j < c; ++j) {
      if (!allowed[i][j] || col_fixed[j]) continue;
      seen.assign(n, 0);
      seen[j] = 1;
      for (std::size_t k = 0; k < n; ++k) {
        if (col_fixed[k]) seen[k] = 1;
      }
      std::function<bool(std::size_t)> reroute = [&](std::size_t a) -> bool {
        for (std::size_t x = 0; x < n; ++x) {
          if (!allowed[a][x] || seen[x]) continue;
          seen[x] = 1;
          if (x == c || reroute(col[x])) {
            row[a] = x;
            col[x] = a;
            return true;
          }
        }
        return false;
      };
      if (reroute(col[j])) {
        row[i] = j;
        col[j] = i;
        break;
      }
    }
    col_fixed[row[i]] = 1;
  }
  out.row_to_col = row;
  out.value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.value = std::max(out.value, cost[i][row[i]]);
  }
  return out;
}

TransportSolution min_cost_transport(std::span<const double> supply,
                                     std::span<const double> demand,
                                     const Matrix& cost) {
  const std::size_t n = supply.size();
  const std::size_t m = demand.size();
  require(n > 0 && m > 0, "transport problem needs sources and sinks");
  require(cost.size() == n, "cost matrix row count must match supply");
  for (const auto& row : cost) {
    require(row.size() == m, "cost matrix column count must match demand");
    for (double c : row) require(c >= 0.0, "transport costs must be >= 0");
  }
  std::vector<double> s(supply.begin(), supply.end());
  std::vector<double> t(demand.begin(), demand.end());
  const double total = std::accumulate(s.begin(), s.end(), 0.0);
  require(std::abs(total - std::accumulate(t.begin(), t.end(), 0.0)) <=
              1e-12 * std::max(1.0, total),
          "supply and demand totals differ");
  const double eps = 1e-14 * std::max(1.0, total);

  Matrix flow(n, std::vector<double>(m, 0.0));
  std::vector<double> pot(n + m, 0.0);
  std::vector<double> dist(n + m);
  std::vector<std::size_t> parent(n + m);
  std::vector<char> done(n + m);

  auto remaining = [&] {
    double r = 0.0;
    for (double x : s) r += x;
    return r;
  };

  while (remaining() > eps) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), kNone);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (s[i] > eps) dist[i] = 0.0;
    }
    for (;;) {
      std::size_t u = kNone;
      for (std::size_t k = 0; k < n + m; ++k) {
        if (!done[k] && dist[k] < kInf && (u == kNone || dist[k] < dist[u])) {
          u = k;
        }
      }
      if (u == kNone) break;
      done[u] = 1;
      if (u < n) {
        for (std::size_t j = 0; j < m; ++j) {
          const double rc = std::max(0.0, cost[u][j] + pot[u] - pot[n + j]);
          if (dist[u] + rc < dist[n + j]) {
            dist[n + j] = dist[u] + rc;
            parent[n + j] = u;
          }
        }
      } else {
        const std::size_t j = u - n;
        for (std::size_t i = 0; i < n; ++i) {
          if (flow[i][j] <= eps) continue;
          const double rc = std::max(0.0, -cost[i][j] + pot[u] - pot[i]);
          if (dist[u] + rc < dist[i]) {
            dist[i] = dist[u] + rc;
            parent[i] = u;
          }
        }
      }
    }
    std::size_t sink = kNone;
    for (std::size_t j = 0; j < m; ++j) {
      if (t[j] > eps && dist[n + j] < kInf &&
          (sink == kNone || dist[n + j] < dist[n + sink])) {
        sink = j;
      }
    }
    if (sink == kNone) throw ComputationError("transport problem infeasible");
    const double reach = dist[n + sink];
    for (std::size_t k = 0; k < n + m; ++k) pot[k] += std::min(dist[k], reach);

    double delta = t[sink];
    std::size_t v = n + sink;
    while (parent[v] != kNone) {
      const std::size_t p = parent[v];
      if (v < n) delta = std::min(delta, flow[v][p - n]);  // backward arc
      v = p;
    }
    delta = std::min(delta, s[v]);
    const std::size_t start = v;
    v = n + sink;
    while (parent[v] != kNone) {
      const std::size_t p = parent[v];
      if (v >= n) {
        flow[p][v - n] += delta;
      } else {
        flow[v][p - n] -= delta;
        if (flow[v][p - n] <= eps) flow[v][p - n] = 0.0;
      }
      v = p;
    }
    s[start] -= delta;
    t[sink] -= delta;
    if (s[start] <= eps) s[start] = 0.0;
    if (t[sink] <= eps) t[sink] = 0.0;
  }

  TransportSolution out;
  out.plan = std::move(flow);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out.cost += out.plan[i][j] * cost[i][j];
  }
  return out;
}

Matrix bipartite_max_flow(std::span<const double> supply,
                          std::span<const double> demand,
                          const std::vector<std::vector<char>>& allowed,
                          double* total) {
  const std::size_t n = supply.size();
  const std::size_t m = demand.size();
  const std::size_t source = n + m;
  const std::size_t sink = n + m + 1;
  const std::size_t size = n + m + 2;
  const double scale = std::max(
      1.0, std::accumulate(supply.begin(), supply.end(), 0.0));
  const double eps = 1e-15 * scale;
  // Residual capacities; middle arcs are uncapacitated.
  Matrix cap(size, std::vector<double>(size, 0.0));
  for (std::size_t i = 0; i < n; ++i) cap[source][i] = supply[i];
  for (std::size_t j = 0; j < m; ++j) cap[n + j][sink] = demand[j];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (allowed[i][j]) cap[i][n + j] = kInf;
    }
  }
  Matrix flow(n, std::vector<double>(m, 0.0));
  double pushed = 0.0;
  std::vector<std::size_t> parent(size);
  for (;;) {
    std::fill(parent.begin(), parent.end(), kNone);
    parent[source] = source;
    std::queue<std::size_t> q;
    q.push(source);
    while (!q.empty() && parent[sink] == kNone) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v = 0; v < size; ++v) {
        if (parent[v] == kNone && cap[u][v] > eps) {
          parent[v] = u;
          q.push(v);
        }
      }
    }
    if (parent[sink] == kNone) break;
    double delta = kInf;
    for (std::size_t v = sink; v != source; v = parent[v]) {
      delta = std::min(delta, cap[parent[v]][v]);
    }
    for (std::size_t v = sink; v != source; v = parent[v]) {
      const std::size_t u = parent[v];
      if (cap[u][v] != kInf) cap[u][v] -= delta;
      if (cap[v][u] != kInf) cap[v][u] += delta;
      if (u < n && v >= n && v < n + m) flow[u][v - n] += delta;
      if (v < n && u >= n && u < n + m) flow[v][u - n] -= delta;
    }
    pushed += delta;
  }
  if (total != nullptr) *total = pushed;
  return flow;
}

LpSolution simplex_maximize(const Matrix& A, std::span<const double> b,
                            std::span<const double> c) {
  const std::size_t rows = A.size();
  const std::size_t vars = c.size();
  require(b.size() == rows, "constraint count mismatch");
  for (const auto& r : A) require(r.size() == vars, "constraint width mismatch");
  for (double x : b) require(x >= 0.0, "simplex needs b >= 0");

  constexpr double kEps = 1e-12;
  const std::size_t width = vars + rows + 1;
  // Row `rows` is the objective row holding -c (reduced costs).
  Matrix T(rows + 1, std::vector<double>(width, 0.0));
  std::vector<std::size_t> basis(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < vars; ++j) T[i][j] = A[i][j];
    T[i][vars + i] = 1.0;
    T[i][width - 1] = b[i];
    basis[i] = vars + i;
  }
  for (std::size_t j = 0; j < vars; ++j) T[rows][j] = -c[j];

  for (;;) {
    std::size_t enter = kNone;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (T[rows][j] < -kEps) {
        enter = j;
        break;
      }
    }
    if (enter == kNone) break;
    std::size_t leave = kNone;
    double best = kInf;
    for (std::size_t i = 0; i < rows; ++i) {
      if (T[i][enter] <= kEps) continue;
      const double ratio = T[i][width - 1] / T[i][enter];
      if (ratio < best - kEps ||
          (std::abs(ratio - best) <= kEps && basis[i] < basis[leave])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave == kNone) throw ComputationError("linear program is unbounded");
    const double piv = T[leave][enter];
    for (auto& x : T[leave]) x /= piv;
    for (std::size_t i = 0; i <= rows; ++i) {
      if (i == leave) continue;
      const double f = T[i][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) T[i][j] -= f * T[leave][j];
    }
    basis[leave] = enter;
  }

  LpSolution out;
  out.x.assign(vars, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    if (basis[i] < vars) out.x[basis[i]] = T[i][width - 1];
  }
  for (std::size_t j = 0; j < vars; ++j) out.objective += c[j] * out.x[j];
  return out;
}

}  // namespace traceport::solvers
