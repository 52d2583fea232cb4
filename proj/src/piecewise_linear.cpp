#include "traceport/piecewise_linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "traceport/error.hpp"

namespace traceport {

namespace {

double lerp_at(const Knot& a, const Knot& b, double x) {
  return a.y + (b.y - a.y) * ((x - a.x) / (b.x - a.x));
}

std::vector<Knot> dedupe(std::vector<Knot> knots) {
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  return knots;
}

}  // namespace

PiecewiseLinear::PiecewiseLinear(std::vector<Knot> knots)
    : knots_(dedupe(std::move(knots))) {
  require(!knots_.empty(), "piecewise-linear function needs at least one knot");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    require(std::isfinite(knots_[i].x) && std::isfinite(knots_[i].y),
            "piecewise-linear knots must be finite");
    if (i > 0) {
      require(knots_[i - 1].x <= knots_[i].x,
              "piecewise-linear knots must have non-decreasing abscissae");
    }
  }
  // A jump needs exactly two knots at the same abscissa; collapse runs.
  std::vector<Knot> out;
  out.reserve(knots_.size());
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (out.size() >= 2 && out[out.size() - 1].x == knots_[i].x &&
        out[out.size() - 2].x == knots_[i].x) {
      out.back() = knots_[i];
    } else {
      out.push_back(knots_[i]);
    }
  }
  knots_ = std::move(out);
}

PiecewiseLinear PiecewiseLinear::constant(double c, double lo, double hi) {
  return PiecewiseLinear({{lo, c}, {hi, c}});
}

PiecewiseLinear PiecewiseLinear::identity(double lo, double hi) {
  return PiecewiseLinear({{lo, lo}, {hi, hi}});
}

PiecewiseLinear PiecewiseLinear::sample(const std::function<double(double)>& f,
                                        std::size_t segments, double lo,
                                        double hi) {
  require(segments >= 1, "sampling needs at least one segment");
  require(lo < hi, "sampling interval must be non-degenerate");
  std::vector<Knot> knots;
  knots.reserve(segments + 1);
  for (std::size_t i = 0; i <= segments; ++i) {
    const double x =
        i == segments ? hi
                      : lo + (hi - lo) * static_cast<double>(i) /
                                 static_cast<double>(segments);
    knots.push_back({x, f(x)});
  }
  return PiecewiseLinear(std::move(knots));
}

double PiecewiseLinear::operator()(double x) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                             [](double v, const Knot& k) { return v < k.x; });
  if (it == knots_.begin()) return knots_.front().y;
  if (it == knots_.end()) return knots_.back().y;
  return lerp_at(*(it - 1), *it, x);
}

double PiecewiseLinear::left(double x) const {
  auto it = std::lower_bound(knots_.begin(), knots_.end(), x,
                             [](const Knot& k, double v) { return k.x < v; });
  if (it == knots_.begin()) return knots_.front().y;
  if (it == knots_.end()) return knots_.back().y;
  if (it->x == x) return it->y;
  return lerp_at(*(it - 1), *it, x);
}

bool PiecewiseLinear::continuous() const {
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (knots_[i].x == knots_[i - 1].x && knots_[i].y != knots_[i - 1].y) {
      return false;
    }
  }
  return true;
}

bool PiecewiseLinear::non_decreasing() const {
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (knots_[i].y < knots_[i - 1].y) return false;
  }
  return true;
}

bool PiecewiseLinear::is_identity(double tol) const {
  return std::all_of(knots_.begin(), knots_.end(), [tol](const Knot& k) {
    return std::abs(k.y - k.x) <= tol;
  });
}

bool PiecewiseLinear::is_constant(double tol) const {
  return max_value() - min_value() <= tol;
}

double PiecewiseLinear::min_value() const {
  return std::min_element(knots_.begin(), knots_.end(),
                          [](const Knot& a, const Knot& b) { return a.y < b.y; })
      ->y;
}

double PiecewiseLinear::max_value() const {
  return std::max_element(knots_.begin(), knots_.end(),
                          [](const Knot& a, const Knot& b) { return a.y < b.y; })
      ->y;
}

double PiecewiseLinear::sup_abs() const {
  double s = 0.0;
  for (const auto& k : knots_) s = std::max(s, std::abs(k.y));
  return s;
}

std::vector<double> PiecewiseLinear::breakpoints() const {
  std::vector<double> xs;
  xs.reserve(knots_.size());
  for (const auto& k : knots_) {
    if (xs.empty() || xs.back() != k.x) xs.push_back(k.x);
  }
  return xs;
}

PiecewiseLinear PiecewiseLinear::swapped() const {
  require(non_decreasing(), "only a monotone graph can be reflected");
  std::vector<Knot> out;
  out.reserve(knots_.size());
  for (const auto& k : knots_) out.push_back({k.y, k.x});
  return PiecewiseLinear(std::move(out));
}

PiecewiseLinear PiecewiseLinear::compose(const PiecewiseLinear& inner) const {
  require(continuous(), "outer function of a composition must be continuous");
  const auto outer_xs = breakpoints();
  const auto& in = inner.knots();
  std::vector<Knot> out;
  out.reserve(in.size() + outer_xs.size());
  for (std::size_t k = 0; k + 1 < in.size(); ++k) {
    const Knot& a = in[k];
    const Knot& b = in[k + 1];
    out.push_back({a.x, (*this)(a.y)});
    if (a.x == b.x || a.y == b.y) continue;
    const double lo = std::min(a.y, b.y);
    const double hi = std::max(a.y, b.y);
    auto first = std::upper_bound(outer_xs.begin(), outer_xs.end(), lo);
    auto last = std::lower_bound(outer_xs.begin(), outer_xs.end(), hi);
    std::vector<Knot> inner_pts;
    for (auto it = first; it != last; ++it) {
      const double t = a.x + (*it - a.y) / (b.y - a.y) * (b.x - a.x);
      inner_pts.push_back({t, (*this)(*it)});
    }
    if (b.y < a.y) std::reverse(inner_pts.begin(), inner_pts.end());
    for (const auto& p : inner_pts) {
      if (p.x > a.x && p.x < b.x) out.push_back(p);
    }
  }
  out.push_back({in.back().x, (*this)(in.back().y)});
  return PiecewiseLinear(std::move(out));
}

PiecewiseLinear PiecewiseLinear::simplified(double tol) const {
  if (knots_.size() <= 2) return *this;
  std::vector<Knot> out;
  out.push_back(knots_.front());
  for (std::size_t i = 1; i + 1 < knots_.size(); ++i) {
    const Knot& a = out.back();
    const Knot& m = knots_[i];
    const Knot& b = knots_[i + 1];
    if (a.x < m.x && m.x < b.x && std::abs(lerp_at(a, b, m.x) - m.y) <= tol) {
      continue;
    }
    out.push_back(m);
  }
  out.push_back(knots_.back());
  return PiecewiseLinear(std::move(out));
}

PiecewiseLinear PiecewiseLinear::operator-() const { return -1.0 * *this; }

PiecewiseLinear linear_combination(
    std::span<const std::pair<double, const PiecewiseLinear*>> terms) {
  require(!terms.empty(), "linear combination of nothing");
  std::vector<double> xs;
  for (const auto& [w, f] : terms) {
    const auto b = f->breakpoints();
    xs.insert(xs.end(), b.begin(), b.end());
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<Knot> out;
  out.reserve(xs.size() + 4);
  for (double x : xs) {
    double l = 0.0;
    double r = 0.0;
    for (const auto& [w, f] : terms) {
      l += w * f->left(x);
      r += w * (*f)(x);
    }
    out.push_back({x, l});
    if (r != l) out.push_back({x, r});
  }
  return PiecewiseLinear(std::move(out));
}

PiecewiseLinear operator+(const PiecewiseLinear& a, const PiecewiseLinear& b) {
  const std::pair<double, const PiecewiseLinear*> t[] = {{1.0, &a}, {1.0, &b}};
  return linear_combination(t);
}

PiecewiseLinear operator-(const PiecewiseLinear& a, const PiecewiseLinear& b) {
  const std::pair<double, const PiecewiseLinear*> t[] = {{1.0, &a}, {-1.0, &b}};
  return linear_combination(t);
}

PiecewiseLinear operator*(double s, const PiecewiseLinear& f) {
  std::vector<Knot> out = f.knots();
  for (auto& k : out) k.y *= s;
  return PiecewiseLinear(std::move(out));
}

std::vector<PiecewiseLinear> sort_pointwise(
    std::span<const PiecewiseLinear> fns) {
  if (fns.empty()) return {};
  std::vector<double> xs;
  for (const auto& f : fns) {
    require(f.continuous(), "pointwise sorting needs continuous functions");
    const auto b = f.breakpoints();
    xs.insert(xs.end(), b.begin(), b.end());
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::vector<double> crossings;
  for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
    const double a = xs[s];
    const double b = xs[s + 1];
    for (std::size_t i = 0; i < fns.size(); ++i) {
      for (std::size_t j = i + 1; j < fns.size(); ++j) {
        const double da = fns[i](a) - fns[j](a);
        const double db = fns[i](b) - fns[j](b);
        if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
          const double x = a + (b - a) * (da / (da - db));
          if (x > a && x < b) crossings.push_back(x);
        }
      }
    }
  }
  xs.insert(xs.end(), crossings.begin(), crossings.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::vector<std::vector<Knot>> knots(fns.size());
  std::vector<double> vals(fns.size());
  for (double x : xs) {
    for (std::size_t i = 0; i < fns.size(); ++i) vals[i] = fns[i](x);
    std::sort(vals.begin(), vals.end());
    for (std::size_t i = 0; i < fns.size(); ++i) knots[i].push_back({x, vals[i]});
  }
  std::vector<PiecewiseLinear> out;
  out.reserve(fns.size());
  for (auto& k : knots) out.emplace_back(std::move(k));
  return out;
}

PiecewiseLinear pointwise_max(const PiecewiseLinear& a,
                              const PiecewiseLinear& b) {
  const PiecewiseLinear pair[] = {a, b};
  return sort_pointwise(pair).back().simplified();
}

double integrate_abs_pow(double v0, double v1, double length, double p) {
  if (length <= 0.0) return 0.0;
  if ((v0 < 0.0 && v1 > 0.0) || (v0 > 0.0 && v1 < 0.0)) {
    const double a = std::abs(v0);
    const double b = std::abs(v1);
    const double l0 = length * (a / (a + b));
    return (l0 * std::pow(a, p) + (length - l0) * std::pow(b, p)) / (p + 1.0);
  }
  double lo = std::abs(v0);
  double hi = std::abs(v1);
  if (lo > hi) std::swap(lo, hi);
  if (hi == 0.0) return 0.0;
  if (lo == 0.0) return length * std::pow(hi, p) / (p + 1.0);
  // (hi^{p+1} - lo^{p+1}) / (hi - lo) written as hi^p * expm1((p+1)L) /
  // expm1(L) with L = log(lo/hi), which keeps full precision when lo ~ hi.
  const double L = std::log1p((lo - hi) / hi);
  if (L == 0.0) return length * std::pow(hi, p);
  const double ratio = std::expm1((p + 1.0) * L) / std::expm1(L);
  return length * std::pow(hi, p) * ratio / (p + 1.0);
}

}  // namespace traceport
