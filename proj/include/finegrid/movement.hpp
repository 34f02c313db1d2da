#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "finegrid/body_map.hpp"
#include "finegrid/grid.hpp"
#include "finegrid/pedestrian.hpp"
#include "finegrid/speed_control.hpp"

namespace finegrid {

enum class TransitionModel { Full, Simplified, Greedy };

const char* to_string(TransitionModel m);
TransitionModel transition_model_from_string(const std::string& s);

struct TransitionConfig {
  TransitionModel model = TransitionModel::Simplified;
  double beta = 10.0;   // sharpness of the full model, > 0
  double lambda = 0.5;  // Poisson parameter of the ranked model, in (0, 1]

  void validate() const;
};

inline constexpr int kStayIndex = 8;

struct NeighborCandidate {
  int index = 0;             // Direction index 0..7
  CellCoord cell;
  double distance = 0.0;     // R_i, cell center to the target point
  bool feasible = false;     // n_i
  double weight = 0.0;       // M_i
};

using Candidates = std::array<NeighborCandidate, kDirections>;

/// What the kernel needs to know about one pedestrian in one step.
struct MoveQuery {
  const Grid& grid;
  const BodyMapSet& maps;
  PedId id;
  CellCoord center;
  Direction current;  // orientation of the body as placed
  Direction next;     // orientation the moved body will take
  Rect target;
};

/// Orientation toward the target from `center`; `fallback` when already on it.
Direction facing_target(const Grid& grid, CellCoord center, const Rect& target, Direction fallback);

/// Distances and feasibility for the eight neighbors. Distances are measured to the
/// point of the target region nearest to the current center. Feasibility checks the
/// moved body (orientation `next`) against the grid, ignoring the mover's own cells.
Candidates evaluate_candidates(const MoveQuery& q);

/// Full-model weights: n_i exp(beta Rmin / R_i) when Rmin > 0; n_i for candidates on
/// the target and 0 for the rest when Rmin = 0. Rmin is taken over all eight.
void candidate_weights_full(Candidates& c, double beta);

/// Convenience: evaluate_candidates followed by candidate_weights_full.
Candidates candidate_weights_full(const MoveQuery& q, double beta);

/// P_i = M_i / sum M. Empty when every weight is zero (no feasible move).
std::optional<std::array<double, kDirections>> normalize(const Candidates& c);

/// Index drawn with probability p[i].
int select_full(const std::array<double, kDirections>& p, Rng& rng);

/// Feasible candidates ordered by descending n_i / R_i (ties shuffled uniformly),
/// followed by kStayIndex. When some candidate lies on the target only those
/// candidates are ranked.
std::vector<int> candidate_ranks_simplified(const Candidates& c, Rng& rng);

/// ranked[k] with k ~ Poisson(lambda), redrawn while k >= ranked.size().
int select_ranked(const std::vector<int>& ranked, double lambda, Rng& rng);

/// Feasible candidate with minimum R_i (uniform among ties), or kStayIndex.
int select_greedy(const Candidates& c, Rng& rng);

/// Runs the configured model; nullopt means stay.
std::optional<Direction> choose_step(const MoveQuery& q, const TransitionConfig& cfg, Rng& rng);

/// Moves the body one step (or re-orients it in place when `step` is empty) and
/// updates the pedestrian. Throws Collision with nothing changed if blocked.
void commit_step(Grid& grid, Pedestrian& ped, const BodyMapSet& maps, Direction next, std::optional<Direction> step);

enum class StepOutcome { Moved, Stayed, Arrived };

/// choose_step + commit_step, ungated. Collisions degrade to Stayed.
StepOutcome step_center(Pedestrian& ped, Grid& grid, const BodyMapSet& maps, const TransitionConfig& cfg, Rng& rng);

}  // namespace finegrid
