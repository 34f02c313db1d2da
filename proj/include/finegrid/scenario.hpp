#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "finegrid/body_map.hpp"
#include "finegrid/geometry.hpp"
#include "finegrid/movement.hpp"
#include "finegrid/speed_control.hpp"

namespace finegrid {

/// Piecewise-linear arrival rate (pedestrians/s); constant outside the breakpoints.
struct DemandSchedule {
  struct Breakpoint {
    double time;
    double rate;
  };
  std::vector<Breakpoint> breakpoints;

  double rate_at(double t) const;
  void validate() const;
};

struct ProfileShare {
  BodyProfile profile;
  double weight = 1.0;
};

struct Sink {
  std::string name;
  Rect area;
};

struct Source {
  std::string name;
  Rect area;
  DemandSchedule demand;
  std::vector<ProfileShare> profiles;
  std::size_t sink = 0;  // index into Scenario::sinks
};

struct Scenario {
  double width = 30.0;
  double height = 4.0;
  double cell_size = 0.05;
  std::vector<Rect> obstacles;
  std::vector<Source> sources;
  std::vector<Sink> sinks;
  std::optional<Rect> reporting_area;

  std::string curve_path;  // empty: built-in closed form
  SpeedDensityCurve curve = SpeedDensityCurve::kladek(KladekForm{});
  PerceptionConfig perception;
  TransitionConfig transition;
  double dt = 0.025;
  uint64_t seed = 1;
  double duration = 2000.0;

  /// Throws Validation naming the offending field or element.
  void validate() const;
};

/// The default walkway: 30 m x 4 m corridor bounded by the lattice edges, a 1 m deep
/// source across the west end, a cross wall at x = 26 m with a 0.5 m door, a 1 m wide
/// exit centered on the east end, reporting
/// area between x = 10 m and x = 20 m, demand ramped from 1 to 7 ped/s over `ramp` s.
Scenario walkway_scenario(double cell_size = 0.05, double ramp = 2000.0);

/// Sectioned key-value text: [grid], [obstacle], [source], [sink], [reporting], [model].
/// Unknown sections and keys are errors; relative curve paths resolve against `base_dir`.
Scenario parse_scenario(std::istream& in, const std::string& source_name, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

void write_scenario(std::ostream& out, const Scenario& s);

}  // namespace finegrid
