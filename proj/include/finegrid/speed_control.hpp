#pragma once

#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "finegrid/geometry.hpp"

namespace finegrid {

using Rng = std::mt19937_64;

/// Closed-form speed-density relation v0 * (1 - exp(-gamma * (1/rho - 1/rho_max))).
struct KladekForm {
  double v0 = 1.34;
  double gamma = 1.913;
  double rho_max = 5.4;

  double operator()(double density) const;
};

/// Monotone nonincreasing speed (m/s) as a function of density (ped/m^2).
class SpeedDensityCurve {
 public:
  struct Sample {
    double density;
    double speed;
  };

  /// Piecewise-linear curve through `samples`. Throws Validation unless densities are
  /// strictly increasing, speeds are nonincreasing and nonnegative.
  static SpeedDensityCurve from_samples(std::vector<Sample> samples);

  /// Evaluates the closed form exactly; `samples` holds a tabulation at `step` for export.
  static SpeedDensityCurve kladek(KladekForm form, double step = 0.01);

  /// Curve file: one "density speed" pair per line, '#' starts a comment.
  static SpeedDensityCurve parse(std::istream& in, const std::string& source_name = "<stream>");
  static SpeedDensityCurve load(const std::string& path);

  /// Clamped below the first and above the last sample.
  double speed_at(double density) const;

  double free_flow_speed() const { return speed_at(0.0); }
  double max_density() const { return samples_.back().density; }
  const std::vector<Sample>& samples() const { return samples_; }
  const std::optional<KladekForm>& analytic() const { return analytic_; }

  void write(std::ostream& out) const;

 private:
  std::vector<Sample> samples_;
  std::optional<KladekForm> analytic_;
};

struct PerceptionConfig {
  double width = 2.5;   // across the heading
  double length = 3.5;  // along the heading

  /// Throws Validation unless both lie in [0.1, 10] m.
  void validate() const;
};

inline constexpr int kSectors = 12;

/// 30 degree sectors centered on 0, 30, ..., 330 degrees; boundaries belong to the
/// counterclockwise sector. Throws UndefinedDirection for the zero vector.
int heading_sector(double dx, double dy);

/// Forward perception rectangle: near short edge centered on `center`, extending
/// `length` along the sector's central direction.
OrientedRect perception_rect(Point center, int sector, const PerceptionConfig& cfg);

/// Pedestrian centers in structure-of-arrays form, meters, single precision.
struct PopulationView {
  std::span<const float> xs;
  std::span<const float> ys;
};

/// Centers inside `rect` (excluding index `self` if given) divided by the area of
/// `rect` clipped to `bounds`. Zero when the clipped area vanishes.
double local_density(PopulationView peds, const OrientedRect& rect, const Rect& bounds,
                     std::optional<std::size_t> self = std::nullopt);

inline double desired_speed(const SpeedDensityCurve& curve, double density) { return curve.speed_at(density); }

struct SpeedGate {
  double allowed_moves_per_second = 0.0;  // M_A
  double max_moves_per_second = 0.0;      // M_M
  double move_probability = 0.0;         // P = M_A / M_M
};

/// M_M = 1/dt, M_A = min(desired / step_displacement, M_M), P = M_A / M_M.
SpeedGate gate_probability(double desired, double step_displacement, double dt);

/// One Bernoulli(P) draw.
bool sample_move_allowed(const SpeedGate& gate, Rng& rng);

/// Per-pedestrian displacement accumulated within the current one-second window
/// of the pedestrian's own clock.
struct DisplacementLedger {
  double window_start = 0.0;
  double accumulated = 0.0;
};

/// Admits a move of `proposed` meters at local time `now` iff the window total stays
/// within min(free_flow, desired) * 1 s. Admitted moves are added to the ledger.
bool apply_speed_cap(DisplacementLedger& ledger, double proposed, double free_flow, double desired, double now);

}  // namespace finegrid
