#pragma once

#include <optional>
#include <string>
#include <tuple>

#include "seqgrad/process.hpp"
#include "seqgrad/rng.hpp"

namespace seqgrad {

/// Region used to draw reproducible random starts: a ball around `center`
/// restricted to the listed coordinates (empty = all), kept strictly inside
/// the domain by `margin`.
struct StartRegion {
  Point center;
  double radius = 0.0;
  std::vector<int> coords;  // 0-based; empty means every coordinate
  double margin = 0.0;
};

struct KnownCriticalPoint {
  Point point;
  CriticalPointInfo::Kind kind = CriticalPointInfo::Kind::Minimum;
  int morse_index = 0;
};

/// Named, reproducible system: potential, domain, default schedule, starts
/// and the critical points the tests pin down.
struct Scenario {
  std::string name;
  std::string description;
  AnalyticFunction f;
  Domain domain = Domain::ball({0.0}, 1.0);
  Schedule schedule_default = Schedule::explicit_sets({{0}});
  std::vector<Point> suggested_starts;
  std::vector<KnownCriticalPoint> known_critical_points;
  StartRegion start_region;
  std::string notes;

  std::optional<Point> designated_minimum() const;
};

/// Builtin scenarios: quadratic_ab, zigzag3d, saddle_basin2d, finite_hit2d,
/// navfn_demo. Throws on unknown names.
Scenario builtin(const std::string& name);

/// (name, dimension, description) for every builtin, stable order.
std::vector<std::tuple<std::string, int, std::string>> list_scenarios();

/// One random start from the scenario's start region (rejection sampling
/// against the domain with the region's interior margin).
Point sample_start(const Scenario& scenario, Rng& rng);
std::vector<Point> sample_starts(const Scenario& scenario, int count, std::uint64_t seed);

/// Scenario file I/O (JSON; expressions in the documented text grammar).
/// Builtins export and reload with bit-identical evaluation.
Scenario load_scenario_file(const std::string& path);
void save_scenario_file(const Scenario& scenario, const std::string& path);
std::string scenario_to_text(const Scenario& scenario);
Scenario scenario_from_text(const std::string& text);

}  // namespace seqgrad
