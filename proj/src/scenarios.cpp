#include "seqgrad/scenarios.hpp"

#include <cmath>

#include "seqgrad/parse.hpp"
#include "seqgrad/report.hpp"

namespace seqgrad {

namespace {

Expr sq(const Expr& e) { return pow_i(e, 2); }

Scenario make_quadratic_ab() {
  // phi = a (y1+y2)^2 + b (y1-y2)^2 with a = 2, b = 1.
  const int m = 2;
  Expr y1 = var(0), y2 = var(1);
  Expr phi = 2.0 * sq(y1 + y2) + sq(y1 - y2);

  Scenario s;
  s.name = "quadratic_ab";
  s.description =
      "Anisotropic positive-definite quadratic (a=2, b=1). Axis steps contract "
      "geometrically toward the unique minimum, so the process needs infinitely "
      "many nontrivial steps.";
  s.f = AnalyticFunction(m, phi);
  s.domain = Domain::ball({0.0, 0.0}, 4.0);
  s.schedule_default = Schedule::explicit_sets({{0}, {1}});
  s.suggested_starts = {{1.0, 1.0}};
  s.known_critical_points = {{{0.0, 0.0}, CriticalPointInfo::Kind::Minimum, 0}};
  s.start_region = {{0.0, 0.0}, 2.5, {}, 0.0};
  s.notes =
      "The componentwise boundary sign condition fails on the cones |y2| > 3|y1| "
      "of the sphere; starts from the documented region keep every trajectory in "
      "the max-norm box [-2.5, 2.5]^2, well inside the ball.";
  return s;
}

Scenario make_zigzag3d() {
  // f = (x-z)^2 + 2(x+z)^2 - 2y(3x+z); unique critical point at 0, index 1.
  const int m = 3;
  Expr x = var(0), y = var(1), z = var(2);
  Expr phi = sq(x - z) + 2.0 * sq(x + z) - 2.0 * y * (3.0 * x + z);

  Scenario s;
  s.name = "zigzag3d";
  s.description =
      "Indefinite quadratic form with a single saddle at the origin; axis slices "
      "zigzag toward it inside the invariant plane y2 = 0.";
  s.f = AnalyticFunction(m, phi);
  s.domain = Domain::ball({0.0, 0.0, 0.0}, 2.0);
  s.schedule_default = Schedule::explicit_sets({{0}, {1}, {2}});
  s.suggested_starts = {{0.5, 0.0, 0.5}, {-0.4, 0.0, 0.3}};
  s.known_critical_points = {{{0.0, 0.0, 0.0}, CriticalPointInfo::Kind::Saddle, 1}};
  s.start_region = {{0.0, 0.0, 0.0}, 1.0, {0, 2}, 0.0};
  s.notes =
      "df/dy2 = -2(3 y1 + y3) does not depend on y2, so on slices with "
      "3 y1 + y3 != 0 the restricted function is affine: the flow has no "
      "stationary point and exits the ball. The process stays bounded only on "
      "the plane y2 = 0 with y1 moved before y2 in each cycle (a y1 step lands "
      "on 3 y1 + y3 = 0, making the following y2 step trivial). The start "
      "region therefore samples that plane; starts with y2 != 0 or schedules "
      "that visit y2 right after y3 end with a left_domain error.";
  return s;
}

Scenario make_saddle_basin2d() {
  // f = y1^4/4 - y1^2/2 + y2^2: minima at (+-1, 0), saddle at the origin.
  const int m = 2;
  Expr x = var(0), y = var(1);
  Expr phi = pow_i(x, 4) / 4.0 - sq(x) / 2.0 + sq(y);

  Scenario s;
  s.name = "saddle_basin2d";
  s.description =
      "Double well plus a parabola. The y2-axis slice through the saddle lies in "
      "its stable set, so every start on that slice converges to the saddle; a "
      "radial perturbation breaks the coincidence.";
  s.f = AnalyticFunction(m, phi);
  s.domain = Domain::ball({0.0, 0.0}, 3.0);
  s.schedule_default = Schedule::explicit_sets({{0}, {1}});
  s.suggested_starts = {{0.0, 0.8}, {0.5, 0.5}};
  s.known_critical_points = {{{1.0, 0.0}, CriticalPointInfo::Kind::Minimum, 0},
                             {{-1.0, 0.0}, CriticalPointInfo::Kind::Minimum, 0},
                             {{0.0, 0.0}, CriticalPointInfo::Kind::Saddle, 1}};
  s.start_region = {{0.0, 0.0}, 1.5, {}, 0.0};
  s.notes =
      "Trapping slice: {y1 = 0}. Restricted flows stay in max(|y1|, 1) and |y2|, "
      "so trajectories from the start region never approach the boundary.";
  return s;
}

Scenario make_finite_hit2d() {
  // f = y1^2 + (y2 - y1^2)^2: unique minimum at the origin.
  const int m = 2;
  Expr x = var(0), y = var(1);
  Expr phi = sq(x) + sq(y - sq(x));

  Scenario s;
  s.name = "finite_hit2d";
  s.description =
      "Axis steps land exactly on the critical locus (a y2 step lands on the "
      "parabola y2 = y1^2, a y1 step then lands on y1 = 0), so the process hits "
      "the minimum after finitely many steps and stays constant.";
  s.f = AnalyticFunction(m, phi);
  s.domain = Domain::ball({0.0, 0.0}, 3.0);
  s.schedule_default = Schedule::explicit_sets({{0}, {1}});
  s.suggested_starts = {{0.6, 0.8}};
  s.known_critical_points = {{{0.0, 0.0}, CriticalPointInfo::Kind::Minimum, 0}};
  s.start_region = {{0.0, 0.0}, 1.0, {}, 0.0};
  s.notes =
      "From the start region every restricted flow stays in the unit square, far "
      "from the boundary.";
  return s;
}

Scenario make_navfn_demo(int kappa = 4) {
  // Two disk robots (radius 0.1) in the unit disk, M = 4 with robot A at
  // (y1, y2) and robot B at (y3, y4), targets (-0.4, 0) and (0.4, 0).
  // phi = gamma / (gamma^kappa + beta)^(1/kappa) with gamma the squared
  // distance to the targets and beta the product of clearances.
  const int m = 4;
  Expr y1 = var(0), y2 = var(1), y3 = var(2), y4 = var(3);

  Expr gamma = sq(y1 + 0.4) + sq(y2) + sq(y3 - 0.4) + sq(y4);
  Expr beta_a = 0.81 - sq(y1) - sq(y2);
  Expr beta_b = 0.81 - sq(y3) - sq(y4);
  Expr beta_ab = sq(y1 - y3) + sq(y2 - y4) - 0.04;
  Expr beta = beta_a * beta_b * beta_ab;
  Expr phi = gamma / root(pow_i(gamma, kappa) + beta, kappa);

  Scenario s;
  s.name = "navfn_demo";
  s.description =
      "Navigation-style potential for two disk robots in a planar disk "
      "(demo-quality, kappa=4): unique zero minimum at the target "
      "configuration, value 1 on the boundary of the free space.";
  s.f = AnalyticFunction(m, phi);

  std::vector<AnalyticFunction> walls;
  walls.emplace_back(m, sq(var(0)) + sq(var(1)) - 0.81);
  walls.emplace_back(m, sq(var(2)) + sq(var(3)) - 0.81);
  walls.emplace_back(m, 0.04 - sq(var(0) - var(2)) - sq(var(1) - var(3)));
  const Point target = {-0.4, 0.0, 0.4, 0.0};
  s.domain = Domain::level_set(std::move(walls), target);

  s.schedule_default = Schedule::explicit_sets({{0, 1}, {2, 3}});
  s.suggested_starts = {{-0.1, -0.5, 0.1, 0.5}, {0.3, 0.4, -0.3, -0.4}};
  s.known_critical_points = {{target, CriticalPointInfo::Kind::Minimum, 0}};
  s.start_region = {{-0.2, 0.0, 0.2, 0.0}, 0.45, {}, 0.05};
  s.notes =
      "phi < 1 strictly inside the free space and phi = 1 on its boundary, so "
      "descent trajectories from interior starts never reach the boundary. The "
      "componentwise sign condition is not certified on the full boundary; the "
      "barrier argument replaces it for starts from the documented region. "
      "Saddles near the obstacle pairing are legitimate limits.";
  return s;
}

}  // namespace

std::optional<Point> Scenario::designated_minimum() const {
  for (const auto& kc : known_critical_points)
    if (kc.kind == CriticalPointInfo::Kind::Minimum) return kc.point;
  return std::nullopt;
}

Scenario builtin(const std::string& name) {
  if (name == "quadratic_ab") return make_quadratic_ab();
  if (name == "zigzag3d") return make_zigzag3d();
  if (name == "saddle_basin2d") return make_saddle_basin2d();
  if (name == "finite_hit2d") return make_finite_hit2d();
  if (name == "navfn_demo") return make_navfn_demo();
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

std::vector<std::tuple<std::string, int, std::string>> list_scenarios() {
  std::vector<std::tuple<std::string, int, std::string>> out;
  for (const char* name :
       {"quadratic_ab", "zigzag3d", "saddle_basin2d", "finite_hit2d", "navfn_demo"}) {
    const Scenario s = builtin(name);
    out.emplace_back(s.name, s.f.arity(), s.description);
  }
  return out;
}

Point sample_start(const Scenario& scenario, Rng& rng) {
  const int m = scenario.f.arity();
  const auto& region = scenario.start_region;
  std::vector<int> coords = region.coords;
  if (coords.empty())
    for (int j = 0; j < m; ++j) coords.push_back(j);

  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<double> dir(coords.size());
    double len = 0.0;
    for (auto& c : dir) c = rng.gaussian();
    for (double c : dir) len += c * c;
    len = std::sqrt(len);
    if (len < 1e-12) continue;
    const double radius =
        region.radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(coords.size()));
    Point x = region.center;
    for (size_t i = 0; i < coords.size(); ++i) x[coords[i]] += radius * dir[i] / len;
    if (scenario.domain.contains(x, -region.margin)) return x;
  }
  throw std::runtime_error("could not sample a start inside the domain");
}

std::vector<Point> sample_starts(const Scenario& scenario, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(sample_start(scenario, rng));
  return out;
}

namespace {

json start_region_to_json(const StartRegion& r) {
  json out;
  out["center"] = point_to_json(r.center);
  out["radius"] = r.radius;
  if (!r.coords.empty()) {
    json coords = json::array();
    for (int j : r.coords) coords.push_back(j + 1);
    out["coords"] = coords;
  }
  out["margin"] = r.margin;
  return out;
}

StartRegion start_region_from_json(const json& j) {
  StartRegion r;
  r.center = point_from_json(j.at("center"));
  r.radius = j.at("radius").get<double>();
  if (j.contains("coords"))
    for (const auto& v : j.at("coords")) r.coords.push_back(v.get<int>() - 1);
  r.margin = j.value("margin", 0.0);
  return r;
}

CriticalPointInfo::Kind kind_from_string(const std::string& s) {
  if (s == "minimum") return CriticalPointInfo::Kind::Minimum;
  if (s == "saddle") return CriticalPointInfo::Kind::Saddle;
  if (s == "maximum") return CriticalPointInfo::Kind::Maximum;
  if (s == "degenerate") return CriticalPointInfo::Kind::Degenerate;
  throw std::invalid_argument("unknown critical point kind '" + s + "'");
}

}  // namespace

std::string scenario_to_text(const Scenario& s) {
  json out;
  out["schema_version"] = 1;
  out["kind"] = "scenario";
  out["name"] = s.name;
  out["description"] = s.description;
  out["dim"] = s.f.arity();
  out["phi"] = to_string(s.f);
  out["domain"] = domain_to_json(s.domain);
  out["schedule"] = schedule_to_json(s.schedule_default);
  json starts = json::array();
  for (const auto& p : s.suggested_starts) starts.push_back(point_to_json(p));
  out["suggested_starts"] = starts;
  json known = json::array();
  for (const auto& kc : s.known_critical_points)
    known.push_back(json{{"point", point_to_json(kc.point)},
                         {"kind", to_cstring(kc.kind)},
                         {"morse_index", kc.morse_index}});
  out["known_critical_points"] = known;
  out["start_region"] = start_region_to_json(s.start_region);
  out["notes"] = s.notes;
  return out.dump(2) + "\n";
}

Scenario scenario_from_text(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("kind", "") != "scenario")
    throw std::invalid_argument("not a scenario file (kind != 'scenario')");
  const int dim = j.at("dim").get<int>();

  Scenario s;
  s.name = j.at("name").get<std::string>();
  s.description = j.value("description", "");
  s.f = parse_function(j.at("phi").get<std::string>(), dim);
  s.domain = domain_from_json(j.at("domain"), dim);
  s.schedule_default = schedule_from_json(j.at("schedule"));
  for (const auto& p : j.at("suggested_starts")) s.suggested_starts.push_back(point_from_json(p));
  if (j.contains("known_critical_points"))
    for (const auto& kc : j.at("known_critical_points"))
      s.known_critical_points.push_back({point_from_json(kc.at("point")),
                                         kind_from_string(kc.at("kind").get<std::string>()),
                                         kc.value("morse_index", 0)});
  if (j.contains("start_region")) s.start_region = start_region_from_json(j.at("start_region"));
  s.notes = j.value("notes", "");
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  return scenario_from_text(read_text_file(path));
}

void save_scenario_file(const Scenario& scenario, const std::string& path) {
  write_text_file(path, scenario_to_text(scenario));
}

}  // namespace seqgrad
