#include "traceport/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "traceport/chaotic_clt.hpp"
#include "traceport/error.hpp"
#include "traceport/metric_measure.hpp"
#include "traceport/nccw.hpp"
#include "traceport/transport.hpp"
#include "traceport/wasserstein.hpp"

namespace traceport::cli {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Common {
  std::string out_path;
  std::string format = "json";
  std::string summary_path;
  std::uint64_t seed = kDefaultSeed;
};

// ---- file parsing -----------------------------------------------------

json load_json(const std::string& path, const std::string& role) {
  std::ifstream in(path);
  if (!in) throw ValidationError(role + ": cannot open file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(role + ": malformed JSON in '" + path + "': " + e.what());
  }
}

const json& field(const json& j, const std::string& key, const std::string& role) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(role + ": missing field '" + key + "'");
  }
  return j.at(key);
}

double as_number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ValidationError(what + " must be a number");
  return j.get<double>();
}

std::vector<double> number_list(const json& j, const std::string& what) {
  if (!j.is_array()) throw ValidationError(what + " must be an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_number(j[i], what + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<Knot> knot_list(const json& j, const std::string& what) {
  if (!j.is_array()) throw ValidationError(what + " must be an array of [x, y]");
  std::vector<Knot> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string name = what + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != 2) {
      throw ValidationError(name + " must be a pair [x, y]");
    }
    out.push_back({as_number(j[i][0], name), as_number(j[i][1], name)});
  }
  return out;
}

std::string rethrow_prefix(const std::string& role, const std::exception& e) {
  return role + ": " + e.what();
}

struct MeasureFile {
  bool cdf = false;
  std::vector<double> points;
  std::vector<double> weights;
  std::vector<Knot> knots;
};

MeasureFile load_measure(const std::string& path, const std::string& role) {
  const json j = load_json(path, role);
  const std::string type = field(j, "type", role).get<std::string>();
  MeasureFile m;
  if (type == "discrete") {
    m.points = number_list(field(j, "points", role), role + " field 'points'");
    m.weights = number_list(field(j, "weights", role), role + " field 'weights'");
    if (m.points.size() != m.weights.size()) {
      throw ValidationError(role + ": fields 'points' and 'weights' differ in length");
    }
    if (m.points.empty()) throw ValidationError(role + ": field 'points' is empty");
  } else if (type == "cdf1d") {
    m.cdf = true;
    m.knots = knot_list(field(j, "breakpoints", role), role + " field 'breakpoints'");
  } else {
    throw ValidationError(role + ": field 'type' must be 'discrete' or 'cdf1d'");
  }
  return m;
}

Measure1D to_measure1d(const MeasureFile& m, const std::string& role) {
  try {
    if (m.cdf) return Measure1D(m.knots);
    return Measure1D::from_atoms(m.points, m.weights);
  } catch (const ValidationError& e) {
    throw ValidationError(rethrow_prefix(role, e));
  }
}

std::size_t as_index(double x, std::size_t n, const std::string& role) {
  if (x < 0.0 || x != std::floor(x) || x >= static_cast<double>(n)) {
    throw ValidationError(role + ": field 'points' must hold vertex indices below " +
                          std::to_string(n));
  }
  return static_cast<std::size_t>(x);
}

struct SpaceSetup {
  std::string type;
  std::optional<FiniteMetricSpace> space;
  std::vector<double> positions;  // for arc and interval spaces
};

SpaceSetup load_space(const std::string& path, const MeasureFile& mu,
                      const MeasureFile& nu) {
  const std::string role = "space";
  const json j = load_json(path, role);
  SpaceSetup s;
  s.type = field(j, "type", role).get<std::string>();
  if (s.type == "matrix") {
    const json& d = field(j, "d", role);
    if (!d.is_array()) throw ValidationError("space: field 'd' must be a matrix");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < d.size(); ++i) {
      rows.push_back(number_list(d[i], "space field 'd'[" + std::to_string(i) + "]"));
    }
    const std::string bad = metric_violation(rows);
    if (!bad.empty()) throw ValidationError("space: field 'd': " + bad);
    s.space.emplace(std::move(rows));
  } else if (s.type == "graph") {
    const json& e = field(j, "edges", role);
    if (!e.is_array()) throw ValidationError("space: field 'edges' must be an array");
    std::vector<Edge> edges;
    std::size_t n = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const std::string name = "space field 'edges'[" + std::to_string(i) + "]";
      if (!e[i].is_array() || e[i].size() != 3) {
        throw ValidationError(name + " must be [i, j, w]");
      }
      const double u = as_number(e[i][0], name);
      const double v = as_number(e[i][1], name);
      if (u < 0 || v < 0 || u != std::floor(u) || v != std::floor(v)) {
        throw ValidationError(name + " must name integer vertices");
      }
      edges.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v),
                       as_number(e[i][2], name)});
      n = std::max({n, edges.back().u + 1, edges.back().v + 1});
    }
    if (j.contains("vertices")) {
      n = static_cast<std::size_t>(as_number(j.at("vertices"), "space field 'vertices'"));
    }
    try {
      s.space.emplace(shortest_path_metric(GeodesicGraph(n, std::move(edges))).metric());
    } catch (const ValidationError& ex) {
      throw ValidationError(rethrow_prefix("space field 'edges'", ex));
    }
  } else if (s.type == "arc" || s.type == "interval") {
    for (const auto* m : {&mu, &nu}) {
      s.positions.insert(s.positions.end(), m->points.begin(), m->points.end());
    }
    std::sort(s.positions.begin(), s.positions.end());
    s.positions.erase(std::unique(s.positions.begin(), s.positions.end()),
                      s.positions.end());
    if (s.type == "arc") {
      const ArcSpace arc(as_number(field(j, "theta", role), "space field 'theta'"));
      for (double x : s.positions) {
        if (x < 0.0 || x > arc.theta()) {
          throw ValidationError("measure field 'points': arc position outside [0, theta]");
        }
      }
      s.space.emplace(arc.sample(s.positions));
    } else {
      s.space.emplace(interval_space(s.positions));
    }
  } else {
    throw ValidationError(
        "space: field 'type' must be 'matrix', 'graph', 'arc' or 'interval'");
  }
  return s;
}

DiscreteMeasure to_discrete(const MeasureFile& m, const SpaceSetup& s,
                            const std::string& role) {
  if (m.cdf) {
    throw ValidationError(role + ": a cdf1d measure needs the quantile method");
  }
  std::vector<std::size_t> idx;
  for (double x : m.points) {
    if (s.positions.empty()) {
      idx.push_back(as_index(x, s.space->size(), role));
    } else {
      idx.push_back(static_cast<std::size_t>(
          std::lower_bound(s.positions.begin(), s.positions.end(), x) -
          s.positions.begin()));
    }
  }
  try {
    DiscreteMeasure d(std::move(idx), m.weights);
    d.check_on(*s.space);
    return d;
  } catch (const ValidationError& e) {
    throw ValidationError(rethrow_prefix(role, e));
  }
}

BigInt parse_bigint(const json& j, const std::string& what) {
  if (j.is_number_unsigned()) return BigInt(j.get<std::uint64_t>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ValidationError(what + " must be a non-negative integer");
    }
    return BigInt(s);
  }
  throw ValidationError(what + " must be a non-negative integer");
}

BigInt parse_bigint(const std::string& s, const std::string& what) {
  return parse_bigint(json(s), what);
}

EigenvalueMapFamily load_family(const std::string& path, const std::string& role,
                                bool sort) {
  const json j = load_json(path, role);
  const json& maps = field(j, "maps", role);
  if (!maps.is_array() || maps.empty()) {
    throw ValidationError(role + ": field 'maps' must be a non-empty array");
  }
  std::vector<EigenvalueMapFamily::Entry> entries;
  BigInt total = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const std::string name = role + " field 'maps'[" + std::to_string(i) + "]";
    const json& item = maps[i];
    const json& body = item.contains("map") ? item.at("map") : item;
    BigInt count = item.contains("count") ? parse_bigint(item.at("count"), name + ".count")
                                          : BigInt(1);
    if (count < 1) throw ValidationError(name + ".count must be positive");
    try {
      PiecewiseLinear map(knot_list(field(body, "breakpoints", name), name + ".breakpoints"));
      check_map(map);
      entries.push_back({std::move(map), count});
    } catch (const ValidationError& e) {
      throw ValidationError(rethrow_prefix(name, e));
    }
    total += count;
  }
  const BigInt l = parse_bigint(field(j, "l", role), role + " field 'l'");
  if (l != total) {
    throw ValidationError(role + ": field 'l' (" + l.str() +
                          ") does not match the total map count (" + total.str() + ")");
  }
  try {
    return sort ? EigenvalueMapFamily::from_unordered(std::move(entries))
                : EigenvalueMapFamily(std::move(entries));
  } catch (const ValidationError& e) {
    throw ValidationError(rethrow_prefix(role + " field 'maps'", e));
  }
}

// ---- output -----------------------------------------------------------

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

json jnum(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json jbig(const BigInt& x) {
  if (x >= 0 && x <= std::numeric_limits<std::uint64_t>::max()) {
    return x.convert_to<std::uint64_t>();
  }
  return x.str();
}

double parse_p(const std::string& s) {
  if (s == "inf" || s == "infinity" || s == "Inf") return kInf;
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(p >= 1.0)) {
    throw ValidationError("option --p must be a number >= 1 or 'inf' (got '" + s + "')");
  }
  return p;
}

std::vector<double> parse_p_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_p(item));
  if (out.empty()) throw ValidationError("option --p-list is empty");
  return out;
}

json witness_json(const Witness& w) {
  return std::visit(
      [](const auto& v) -> json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, TransportPlan>) {
          return {{"type", "coupling"},
                  {"source_support", v.source_support},
                  {"target_support", v.target_support},
                  {"coupling", v.coupling}};
        } else if constexpr (std::is_same_v<V, DualPotential>) {
          return {{"type", "dual_potential"}, {"points", v.points}, {"values", v.values}};
        } else if constexpr (std::is_same_v<V, Matching>) {
          return {{"type", "matching"}, {"sources", v.sources}, {"targets", v.targets}};
        } else {
          return nullptr;
        }
      },
      w);
}

struct Output {
  json doc;
  std::string csv;
  std::string summary;
};

void emit(const Common& c, Output o, std::ostream& out, std::ostream& err) {
  o.doc["version"] = kVersion;
  const std::string body = c.format == "csv" ? o.csv : o.doc.dump(2) + "\n";
  if (c.out_path.empty()) {
    out << body;
    err << o.summary << "\n";
  } else {
    std::ofstream f(c.out_path, std::ios::binary);
    if (!f) throw ValidationError("option --out: cannot write '" + c.out_path + "'");
    f << body;
    out << o.summary << "\n";
  }
  if (!c.summary_path.empty()) {
    std::ofstream f(c.summary_path, std::ios::binary);
    if (!f) throw ValidationError("option --summary: cannot write '" + c.summary_path + "'");
    f << o.doc.dump(2) << "\n";
  }
}

// ---- subcommands ------------------------------------------------------

struct WassersteinArgs {
  std::string space;
  std::string mu;
  std::string nu;
  std::string p = "1";
  bool dual = false;
  bool levy = false;
  std::size_t cap = WpOptions{}.expansion_cap;
};

Output cmd_wasserstein(const WassersteinArgs& a) {
  const auto mu = load_measure(a.mu, "mu");
  const auto nu = load_measure(a.nu, "nu");
  const double p = parse_p(a.p);
  Output o;
  o.doc["command"] = "wasserstein";
  o.doc["p"] = jnum(p);
  if (mu.cdf || nu.cdf || a.space.empty()) {
    if (a.dual || a.levy) {
      throw ValidationError("options --dual and --levy-prokhorov need --space and discrete measures");
    }
    const auto m1 = to_measure1d(mu, "mu");
    const auto m2 = to_measure1d(nu, "nu");
    const double v = std::isinf(p) ? winf_quantile(m1, m2) : wp_quantile(m1, m2, p);
    const std::string method = std::isinf(p) ? "quantile_sup" : "quantile";
    o.doc["value"] = v;
    o.doc["method"] = method;
    o.doc["witness"] = nullptr;
    o.csv = "method,p,value\n" + method + "," + num(p) + "," + num(v) + "\n";
    o.summary = "wasserstein p=" + num(p) + " value=" + num(v) + " method=" + method;
    return o;
  }
  const auto setup = load_space(a.space, mu, nu);
  const auto dm = to_discrete(mu, setup, "mu");
  const auto dn = to_discrete(nu, setup, "nu");
  WpOptions opts;
  opts.expansion_cap = a.cap;
  DistanceReport r;
  if (a.dual) {
    if (p != 1.0) throw ValidationError("option --dual requires --p 1");
    r = w1_dual(*setup.space, dm, dn);
  } else if (std::isinf(p)) {
    r = winf(*setup.space, dm, dn, opts);
  } else {
    r = wp_primal(*setup.space, dm, dn, p, opts);
  }
  o.doc["value"] = r.value;
  o.doc["method"] = r.method;
  o.doc["witness"] = witness_json(r.witness);
  o.doc["space_type"] = setup.type;
  if (!setup.positions.empty()) o.doc["space_points"] = setup.positions;
  o.csv = "method,p,value\n" + r.method + "," + num(p) + "," + num(r.value) + "\n";
  if (a.levy) {
    const double lp = levy_prokhorov(*setup.space, dm, dn);
    o.doc["levy_prokhorov"] = {{"value", lp}, {"method", "subset_enumeration"}};
    o.csv += "subset_enumeration,levy_prokhorov," + num(lp) + "\n";
  }
  o.summary = "wasserstein p=" + num(p) + " value=" + num(r.value) + " method=" + r.method;
  return o;
}

struct TransportArgs {
  std::string mu;
  std::string nu;
  bool relaxed = false;
};

Output cmd_transport_map(const TransportArgs& a) {
  const auto mu = to_measure1d(load_measure(a.mu, "mu"), "mu");
  const auto nu = to_measure1d(load_measure(a.nu, "nu"), "nu");
  const auto r = increasing_rearrangement(nu, mu, a.relaxed);
  Output o;
  o.doc["command"] = "transport-map";
  o.doc["method"] = "increasing_rearrangement";
  o.doc["relaxed"] = r.relaxed;
  json knots = json::array();
  o.csv = "method,kind,x,y\n";
  for (const auto& k : r.map.knots()) {
    knots.push_back({k.x, k.y});
    o.csv += "increasing_rearrangement,knot," + num(k.x) + "," + num(k.y) + "\n";
  }
  o.doc["breakpoints"] = knots;
  json norms = json::array();
  for (double p : {1.0, 2.0, kInf}) {
    const double disp = displacement_norm(r.map, nu, p);
    const double w = std::isinf(p) ? winf_quantile(mu, nu) : wp_quantile(mu, nu, p);
    norms.push_back({{"p", jnum(p)},
                     {"displacement", disp},
                     {"displacement_method", "displacement_norm"},
                     {"wasserstein", w},
                     {"wasserstein_method", std::isinf(p) ? "quantile_sup" : "quantile"}});
    o.csv += "displacement_norm,norm," + num(p) + "," + num(disp) + "\n";
    o.csv += std::string(std::isinf(p) ? "quantile_sup" : "quantile") + ",wasserstein," +
             num(p) + "," + num(w) + "\n";
  }
  o.doc["norms"] = norms;
  o.summary = "transport-map knots=" + std::to_string(r.map.knots().size()) +
              " relaxed=" + (r.relaxed ? "true" : "false");
  return o;
}

struct ArcArgs {
  std::vector<double> thetas_pi{0.5, 1.0, 1.5, 1.9};
  std::size_t n = 50;
  double eps = 0.01;
};

Output cmd_arc_constant(const ArcArgs& a) {
  Output o;
  o.doc["command"] = "arc-constant";
  o.doc["n"] = a.n;
  o.doc["eps"] = a.eps;
  o.csv = "theta_over_pi,theta,ratio,winf,order_preserving,order_reversing,method\n";
  json rows = json::array();
  double last = 0.0;
  for (double t : a.thetas_pi) {
    const double theta = t * std::numbers::pi;
    const auto r = arc_transport_ratio(theta, a.n, a.eps);
    rows.push_back({{"theta_over_pi", t},
                    {"theta", theta},
                    {"ratio", r.ratio},
                    {"winf", r.winf},
                    {"order_preserving", r.order_preserving},
                    {"order_reversing", r.order_reversing},
                    {"method", "arc_transport_ratio"}});
    o.csv += num(t) + "," + num(theta) + "," + num(r.ratio) + "," + num(r.winf) + "," +
             num(r.order_preserving) + "," + num(r.order_reversing) +
             ",arc_transport_ratio\n";
    last = r.ratio;
  }
  o.doc["rows"] = rows;
  o.summary = "arc-constant thetas=" + std::to_string(a.thetas_pi.size()) +
              " last_ratio=" + num(last);
  return o;
}

struct DdropArgs {
  std::string a;
  std::string b;
  std::string mu;
  std::string p_list = "1,2,inf";
  std::size_t battery = 32;
  std::size_t grid = kDefaultProfileGrid;
  bool sort = false;
};

Output cmd_ddrop(const DdropArgs& a, std::uint64_t seed) {
  const auto fa = load_family(a.a, "family a", a.sort);
  const auto fb = load_family(a.b, "family b", a.sort);
  if (fa.size() != fb.size()) {
    throw ValidationError("family b: field 'l' differs from family a");
  }
  const Measure1D mu = a.mu.empty() ? Measure1D::lebesgue()
                                    : to_measure1d(load_measure(a.mu, "mu"), "mu");
  const auto ps = parse_p_list(a.p_list);
  const double dd = d_diagonal(fa, fb);
  const auto battery = lipschitz_battery(a.battery, seed);
  const auto dw = sampled_d_w(fa, fb, battery, a.grid);

  Output o;
  o.doc["command"] = "ddrop-distance";
  o.doc["l"] = jbig(fa.size());
  o.doc["d_diagonal"] = {{"value", dd}, {"method", "breakpoint_sup"}};
  o.doc["d_w"] = {{"value", dw.value},
                  {"at_g_l", dw.at_gl},
                  {"battery_max", dw.battery_max},
                  {"battery_size", a.battery},
                  {"grid", a.grid},
                  {"method", "sampled_lipschitz_family"}};
  o.csv = "quantity,p,value,method\n";
  o.csv += "d_diagonal,," + num(dd) + ",breakpoint_sup\n";
  o.csv += "d_w,," + num(dw.value) + ",sampled_lipschitz_family\n";
  json table = json::array();
  for (double p : ps) {
    const double w = wp_diagonal_pair(fa, fb, mu, p);
    const std::string method = std::isinf(p) ? "quantile_sup" : "quantile";
    table.push_back({{"p", jnum(p)}, {"value", w}, {"method", method}});
    o.csv += "w_p," + num(p) + "," + num(w) + "," + method + "\n";
  }
  o.doc["w_p"] = table;
  o.summary = "ddrop-distance d_diagonal=" + num(dd) + " d_w=" + num(dw.value);
  return o;
}

struct JiangsuArgs {
  std::string p = "2";
  std::string q = "3";
  unsigned stages = 1;
  std::vector<double> c{0.5};
  double epsilon = 0.05;
  unsigned cap = kDefaultExponentCap;
  std::size_t battery = 16;
};

Output cmd_jiangsu(const JiangsuArgs& a, std::uint64_t seed) {
  const BigInt p = parse_bigint(a.p, "option --p");
  const BigInt q = parse_bigint(a.q, "option --q");
  if (a.c.size() < a.stages) {
    throw ValidationError("option --c: fewer constants (" + std::to_string(a.c.size()) +
                          ") than stages (" + std::to_string(a.stages) + ")");
  }
  const auto tower = simulate_tower(p, q, a.c, a.stages, a.epsilon, a.cap);
  const auto battery = unit_ball_battery(a.battery, seed);

  Output o;
  o.doc["command"] = "jiangsu-build";
  o.doc["method"] = "minimal_exponent";
  o.csv = "stage,n,identity_proportion,defect_bound,defect,cumulative_defect_bound,"
          "square_bound,method\n";
  json stages = json::array();
  double cum = 0.0;
  double square = 0.0;
  for (const auto& s : tower.stages) {
    const double defect = battery.empty() ? 0.0 : intertwining_defect(s, battery);
    cum += s.defect_bound;
    square += 2.0 / (static_cast<double>(s.m) * s.m);
    const BigInt n2 = BigInt(s.n) * s.n;
    stages.push_back({{"m", s.m},
                      {"p", jbig(s.p)},
                      {"q", jbig(s.q)},
                      {"n", s.n},
                      {"p_next", jbig(s.p_next)},
                      {"q_next", jbig(s.q_next)},
                      {"k", jbig(s.k)},
                      {"c", s.c},
                      {"counts",
                       {{"identity", jbig(s.identity_count)},
                        {"constant", jbig(s.constant_count)},
                        {"max", jbig(s.max_count)}}},
                      {"r_0", jbig(s.r0)},
                      {"r_1", jbig(s.r1)},
                      {"identity_proportion", s.identity_proportion},
                      {"exceeds_1_minus_inv_n2", boost::multiprecision::pow(s.p, s.n) > n2 * s.q},
                      {"defect_bound", s.defect_bound},
                      {"defect", defect},
                      {"defect_method", "intertwining_defect"},
                      {"battery_size", battery.size()}});
    o.csv += std::to_string(s.m) + "," + std::to_string(s.n) + "," +
             num(s.identity_proportion) + "," + num(s.defect_bound) + "," + num(defect) +
             "," + num(cum) + "," + num(square) + ",minimal_exponent\n";
  }
  o.doc["stages"] = stages;
  o.doc["cumulative_defect_bound"] = tower.cumulative_defect_bound;
  o.doc["cumulative_square_bound"] = tower.cumulative_square_bound;
  o.doc["density_gap"] = tower.density_gap;
  o.doc["density_epsilon"] = a.epsilon;
  o.doc["dense"] = tower.dense;
  o.summary = "jiangsu-build stages=" + std::to_string(tower.stages.size());
  if (!tower.stages.empty()) {
    o.summary += " n1=" + std::to_string(tower.stages.front().n) +
                 " r0=" + tower.stages.front().r0.str();
  }
  return o;
}

struct ClTArgs {
  double alpha = 0.25;
  std::size_t steps = 1000000;
  std::size_t seeds = 5;
  std::vector<std::size_t> checkpoints{1000, 10000, 100000, 1000000};
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Output cmd_pm_clt(const ClTArgs& a, std::uint64_t seed) {
  if (a.seeds == 0) throw ValidationError("option --seeds must be positive");
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < a.seeds; ++i) seeds.push_back(seed + i);
  const auto f = PiecewiseLinear::identity();
  const auto results = clt_ensemble(a.alpha, a.steps, seeds, f, a.checkpoints);

  Output o;
  o.doc["command"] = "pm-clt";
  o.doc["alpha"] = a.alpha;
  o.doc["steps"] = a.steps;
  o.doc["observable"] = "f(t) = t - orbit mean";
  o.doc["centering_tolerance"] = kCenteringTolerance;
  o.doc["method"] = "quantile_w1_normal";
  o.csv = "seed,n,w1,sigma2,method\n";
  json runs = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    json cps = json::array();
    for (const auto& c : r.checkpoints) {
      cps.push_back({{"n", c.n}, {"w1", c.w1}});
      o.csv += std::to_string(seeds[i]) + "," + std::to_string(c.n) + "," + num(c.w1) +
               "," + num(r.sigma2) + ",quantile_w1_normal\n";
    }
    runs.push_back({{"seed", seeds[i]},
                    {"initial_point", r.initial_point},
                    {"centering_shift", r.centering_shift},
                    {"sigma2", r.sigma2},
                    {"sigma2_method", "block_variance"},
                    {"sigma2_green_kubo", r.sigma2_green_kubo},
                    {"checkpoints", cps}});
  }
  json med = json::array();
  for (std::size_t j = 0; j < a.checkpoints.size(); ++j) {
    std::vector<double> v;
    for (const auto& r : results) v.push_back(r.checkpoints[j].w1);
    med.push_back({{"n", a.checkpoints[j]}, {"median_w1", median(v)}});
  }
  o.doc["runs"] = runs;
  o.doc["medians"] = med;
  o.summary = "pm-clt alpha=" + num(a.alpha) + " seeds=" + std::to_string(a.seeds) +
              " final_median_w1=" + num(med.back()["median_w1"].get<double>());
  return o;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"traceport: optimal-transport and spectral distances"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out_path, "Output file (default: stdout)");
    sub->add_option("--format", common.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--summary", common.summary_path, "Also write the JSON report here");
    sub->add_option("--seed", common.seed, "Seed for randomized steps");
  };

  WassersteinArgs wa;
  auto* w = app.add_subcommand("wasserstein", "W_p / W_inf between two measures");
  w->add_option("--space", wa.space, "Space file (omit for [0,1] quantile method)");
  w->add_option("--mu", wa.mu, "Measure file")->required();
  w->add_option("--nu", wa.nu, "Measure file")->required();
  w->add_option("--p", wa.p, "Exponent >= 1 or 'inf'");
  w->add_flag("--dual", wa.dual, "Use the Kantorovich-Rubinstein dual LP (p = 1)");
  w->add_flag("--levy-prokhorov", wa.levy, "Also report the Levy-Prokhorov distance");
  w->add_option("--expansion-cap", wa.cap, "Equal-weight expansion limit");
  add_common(w);

  TransportArgs ta;
  auto* t = app.add_subcommand("transport-map", "Increasing rearrangement pushing nu onto mu");
  t->add_option("--mu", ta.mu, "Target measure file")->required();
  t->add_option("--nu", ta.nu, "Source measure file")->required();
  t->add_flag("--relaxed", ta.relaxed, "Allow non-faithful or atomic measures");
  add_common(t);

  ArcArgs aa;
  auto* arc = app.add_subcommand("arc-constant", "Transport ratio on circular arcs");
  arc->add_option("--thetas", aa.thetas_pi, "Arc angles in units of pi")->delimiter(',');
  arc->add_option("--n", aa.n, "Atoms per cluster");
  arc->add_option("--eps", aa.eps, "Cluster width");
  add_common(arc);

  DdropArgs da;
  auto* dd = app.add_subcommand("ddrop-distance", "Distances between eigenvalue-map families");
  dd->add_option("--a", da.a, "Family file")->required();
  dd->add_option("--b", da.b, "Family file")->required();
  dd->add_option("--mu", da.mu, "Trace measure file (default Lebesgue)");
  dd->add_option("--p-list", da.p_list, "Comma-separated exponents");
  dd->add_option("--battery", da.battery, "Random 1-Lipschitz observables");
  dd->add_option("--grid", da.grid, "Evaluation grid for d_W");
  dd->add_flag("--sort", da.sort, "Sort unordered maps pointwise");
  add_common(dd);

  JiangsuArgs ja;
  auto* js = app.add_subcommand("jiangsu-build", "Inductive-limit stage plans");
  js->add_option("--p", ja.p, "Initial p");
  js->add_option("--q", ja.q, "Initial q");
  js->add_option("--stages", ja.stages, "Number of stages M");
  js->add_option("--c", ja.c, "Constants c_1, c_2, ...")->delimiter(',');
  js->add_option("--epsilon", ja.epsilon, "Density threshold for the constants");
  js->add_option("--cap", ja.cap, "Largest exponent tried");
  js->add_option("--battery", ja.battery, "Unit-ball functions for the defect");
  add_common(js);

  ClTArgs ca;
  auto* pm = app.add_subcommand("pm-clt", "Almost-sure CLT for the Pomeau-Manneville map");
  pm->add_option("--alpha", ca.alpha, "Map parameter in (0, 1/2)");
  pm->add_option("--steps", ca.steps, "Orbit length N");
  pm->add_option("--seeds", ca.seeds, "Number of seeds");
  pm->add_option("--checkpoints", ca.checkpoints, "Checkpoints n")->delimiter(',');
  add_common(pm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    Output o;
    if (*w) o = cmd_wasserstein(wa);
    else if (*t) o = cmd_transport_map(ta);
    else if (*arc) o = cmd_arc_constant(aa);
    else if (*dd) o = cmd_ddrop(da, common.seed);
    else if (*js) o = cmd_jiangsu(ja, common.seed);
    else o = cmd_pm_clt(ca, common.seed);
    emit(common, std::move(o), out, err);
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const json::exception& e) {
    err << "error: malformed input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ComputationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitComputation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace traceport::cli
