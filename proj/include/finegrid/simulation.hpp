#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "finegrid/body_map.hpp"
#include "finegrid/grid.hpp"
#include "finegrid/pedestrian.hpp"
#include "finegrid/scenario.hpp"

namespace finegrid {

struct SpeedDensitySample {
  double time = 0.0;
  PedId ped_id = 0;
  double density = 0.0;  // ped/m^2 in the pedestrian's perception rectangle
  double speed = 0.0;    // path length over the trailing second, m/s

  friend bool operator==(const SpeedDensitySample&, const SpeedDensitySample&) = default;
};

struct RunCounters {
  std::size_t spawned = 0;
  std::size_t exited = 0;
  std::size_t peak_population = 0;
  int64_t steps = 0;

  friend bool operator==(const RunCounters&, const RunCounters&) = default;
};

struct RunOutput {
  std::vector<SpeedDensitySample> samples;
  RunCounters counters;
  std::size_t remaining = 0;
  std::string final_snapshot;

  friend bool operator==(const RunOutput&, const RunOutput&) = default;
};

/// One simulation: owns its grid, population and random stream. Not thread safe;
/// independent instances share nothing mutable.
class Simulation {
 public:
  /// Places obstacles and prepares body maps. Throws Validation for a bad scenario.
  explicit Simulation(const Scenario& scenario, std::optional<uint64_t> seed = std::nullopt);

  /// Adds spawns from `source` for the current step; returns the new ids.
  std::vector<PedId> spawn_step(std::size_t source);

  /// One time step: spawning, every pedestrian in shuffled order, absorption,
  /// clock advance, and sampling when a whole second is crossed.
  void step();

  /// Samples for pedestrians in the reporting area (done automatically each second).
  void record_samples();

  /// Runs ceil(duration / dt) steps. `after_step` (optional) is invoked after each.
  RunOutput run(double duration, const std::function<void(const Simulation&)>& after_step = {});

  /// Places a pedestrian with its center at `center`. Returns nullopt when the body
  /// does not fit. Used by spawning and by tests that build scenes by hand.
  std::optional<PedId> place(CellCoord center, std::size_t profile, const Rect& target);

  const Scenario& scenario() const { return scenario_; }
  const Grid& grid() const { return grid_; }
  Grid& grid() { return grid_; }
  const std::vector<Pedestrian>& pedestrians() const { return peds_; }
  const Pedestrian* find(PedId id) const;
  Pedestrian* find(PedId id);
  const BodyMapSet& body_maps(std::size_t profile) const { return maps_.at(profile); }

  double time() const { return static_cast<double>(step_index_) * scenario_.dt; }
  int64_t step_index() const { return step_index_; }
  int steps_per_second() const { return steps_per_second_; }
  const RunCounters& counters() const { return counters_; }
  const std::vector<SpeedDensitySample>& samples() const { return samples_; }
  double spawn_budget(std::size_t source) const { return budgets_.at(source); }

  /// Perceived density for one pedestrian right now.
  double perceived_density(const Pedestrian& ped) const;

  /// Realized speed over the trailing second; nullopt for pedestrians younger than 1 s.
  std::optional<double> trailing_speed(const Pedestrian& ped) const;

  /// Forces a move-probability override (1 = ungated) for tests; nullopt restores gating.
  void set_gate_override(std::optional<double> p) { gate_override_ = p; }

  /// Counts occupancy violations: footprint cells not owned by their pedestrian plus
  /// any mismatch between owned cells and the sum of footprint sizes. 0 when consistent.
  std::size_t occupancy_violations() const;

  /// '#' obstacle, '.' free, 'o' body, '@' center; first line is the northmost row.
  std::string snapshot() const;

  Rng& rng() { return rng_; }

 private:
  void move_pedestrian(std::size_t index);
  void remove_dead();

  Scenario scenario_;
  Grid grid_;
  std::vector<BodyMapSet> maps_;          // per (source, profile), flattened
  std::vector<std::size_t> source_maps_;  // first maps_ index for each source
  Rng rng_;

  std::vector<Pedestrian> peds_;
  std::vector<float> xs_;  // centers, meters, parallel to peds_
  std::vector<float> ys_;
  std::vector<uint8_t> dead_;
  std::vector<std::vector<CellCoord>> source_cells_;
  std::vector<double> budgets_;

  std::vector<SpeedDensitySample> samples_;
  RunCounters counters_;
  int64_t step_index_ = 0;
  int steps_per_second_ = 40;
  PedId next_id_ = 1;
  std::optional<double> gate_override_;
  std::vector<std::size_t> order_;
};

void write_samples_csv(std::ostream& out, const std::vector<SpeedDensitySample>& samples);
void write_summary_json(std::ostream& out, const RunOutput& run, const Scenario& scenario, uint64_t seed);

}  // namespace finegrid
