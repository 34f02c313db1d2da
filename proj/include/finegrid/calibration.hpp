#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finegrid/scenario.hpp"
#include "finegrid/simulation.hpp"
#include "finegrid/speed_control.hpp"

namespace finegrid {

struct DensityBin {
  double center = 0.0;
  std::size_t count = 0;
  double mean_speed = 0.0;
};

/// Groups samples into [k * bin_width, (k + 1) * bin_width) bins over [0, max_density);
/// samples at or beyond max_density are dropped. Only nonempty bins are returned.
std::vector<DensityBin> bin_samples(std::span<const SpeedDensitySample> samples, double bin_width, double max_density);

/// Mean over bins holding at least `min_count` samples of (mean speed - curve(bin center))^2.
/// nullopt when no bin qualifies (undefined score).
std::optional<double> mse(std::span<const SpeedDensitySample> samples, const SpeedDensityCurve& curve,
                          double bin_width = 0.25, std::size_t min_count = 10);

struct SweepSpec {
  std::vector<double> widths;
  std::vector<double> lengths;
  int repeats = 5;
  double duration = 2000.0;
  double bin_width = 0.25;
  std::size_t min_bin_count = 10;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
};

struct SweepCell {
  double width = 0.0;
  double length = 0.0;
  double amse = 0.0;     // mean of the repeat MSEs
  double std_mse = 0.0;  // population standard deviation of the repeat MSEs
  std::vector<double> mses;
  std::vector<std::string> failures;  // one message per failed repeat

  bool ok() const { return failures.empty() && !mses.empty(); }
  friend bool operator==(const SweepCell&, const SweepCell&) = default;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // width-major: cells[wi * lengths + li]

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// Seed of repeat `repeat` at lattice position (wi, li).
uint64_t derive_seed(uint64_t base, std::size_t wi, std::size_t li, std::size_t repeat);

/// Everything the sweep needs from one run, so tests can substitute a cheap model.
using RunScorer = std::function<double(const Scenario&, uint64_t seed)>;

/// Default scorer: simulate for spec.duration and score the samples with mse().
RunScorer simulation_scorer(const SweepSpec& spec);

struct SweepHooks {
  /// Called once per lattice cell, in lattice order, as soon as it and all cells
  /// before it are complete.
  std::function<void(const SweepCell&)> on_cell;
  /// Permutation of run indices to execute (tests); empty means natural order.
  std::vector<std::size_t> run_order;
};

/// Runs every (width, length, repeat) with perception overridden and seed derived
/// from the scenario seed. Failed runs are recorded in their cell and do not stop
/// the sweep.
SweepResult sweep(const SweepSpec& spec, const Scenario& base, const RunScorer& scorer, const SweepHooks& hooks = {});

/// Minimum AMSE, ties by lower std_mse, then smaller area. Throws Validation if no
/// cell completed.
const SweepCell& best_area(const SweepResult& result);

void write_sweep_header(std::ostream& out);
void write_sweep_row(std::ostream& out, const SweepCell& cell);

}  // namespace finegrid
