#include "finegrid/movement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "finegrid/error.hpp"

namespace finegrid {

const char* to_string(TransitionModel m) {
  switch (m) {
    case TransitionModel::Full: return "full";
    case TransitionModel::Simplified: return "simplified";
    case TransitionModel::Greedy: return "greedy";
  }
  return "unknown";
}

TransitionModel transition_model_from_string(const std::string& s) {
  if (s == "full") return TransitionModel::Full;
  if (s == "simplified") return TransitionModel::Simplified;
  if (s == "greedy") return TransitionModel::Greedy;
  throw Error(ErrorKind::Validation, "unknown transition model '" + s + "' (full|simplified|greedy)");
}

void TransitionConfig::validate() const {
  if (!(beta > 0.0)) throw Error(ErrorKind::Validation, "beta must be > 0");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw Error(ErrorKind::Validation, "lambda must lie in (0, 1]");
}

Direction facing_target(const Grid& grid, CellCoord center, const Rect& target, Direction fallback) {
  const Point here = grid.center_of(center);
  const Point aim = target.nearest_point(here);
  if (aim == here) return fallback;
  return orientation_from_direction(aim.x - here.x, aim.y - here.y);
}

Candidates evaluate_candidates(const MoveQuery& q) {
  // the target is the point of the region nearest to the pedestrian, fixed for this step
  const Point aim = q.target.nearest_point(q.grid.center_of(q.center));
  Candidates out;
  for (int i = 0; i < kDirections; ++i) {
    NeighborCandidate& c = out[i];
    c.index = i;
    c.cell = q.center + step_of(static_cast<Direction>(i));
    c.distance = distance(q.grid.center_of(c.cell), aim);
    c.feasible = true;
    for (const CellCoord& o : q.maps.leading_cells(q.current, q.next, i)) {
      const int32_t v = q.grid.raw(q.center + o);
      if (v != Grid::kFree && v != q.id) {
        c.feasible = false;
        break;
      }
    }
    c.weight = 0.0;
  }
  return out;
}

void candidate_weights_full(Candidates& cands, double beta) {
  double r_min = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) r_min = std::min(r_min, c.distance);
  for (auto& c : cands) {
    const double n = c.feasible ? 1.0 : 0.0;
    if (r_min > 0.0) {
      c.weight = n * std::exp(beta * r_min / c.distance);
    } else {
      c.weight = c.distance == r_min ? n : 0.0;
    }
  }
}

Candidates candidate_weights_full(const MoveQuery& q, double beta) {
  Candidates c = evaluate_candidates(q);
  candidate_weights_full(c, beta);
  return c;
}

std::optional<std::array<double, kDirections>> normalize(const Candidates& c) {
  double total = 0.0;
  for (const auto& x : c) total += x.weight;
  if (!(total > 0.0)) return std::nullopt;
  const double norm = 1.0 / total;
  std::array<double, kDirections> p{};
  for (int i = 0; i < kDirections; ++i) p[i] = c[i].weight * norm;
  return p;
}

int select_full(const std::array<double, kDirections>& p, Rng& rng) {
  return std::discrete_distribution<int>(p.begin(), p.end())(rng);
}

std::vector<int> candidate_ranks_simplified(const Candidates& c, Rng& rng) {
  const bool on_target = std::any_of(c.begin(), c.end(), [](const auto& x) { return x.distance == 0.0; });
  std::vector<int> ranked;
  for (const auto& x : c) {
    if (x.feasible && (!on_target || x.distance == 0.0)) ranked.push_back(x.index);
  }
  // shuffle then stable sort: candidates with equal n_i / R_i end up in uniform random order
  std::shuffle(ranked.begin(), ranked.end(), rng);
  std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) { return c[a].distance < c[b].distance; });
  ranked.push_back(kStayIndex);
  return ranked;
}

int select_ranked(const std::vector<int>& ranked, double lambda, Rng& rng) {
  if (ranked.size() == 1) return ranked.front();
  std::poisson_distribution<int> poisson(lambda);
  for (;;) {
    const int k = poisson(rng);
    if (k < static_cast<int>(ranked.size())) return ranked[static_cast<std::size_t>(k)];
  }
}

int select_greedy(const Candidates& c, Rng& rng) {
  const bool on_target = std::any_of(c.begin(), c.end(), [](const auto& x) { return x.distance == 0.0; });
  double best = std::numeric_limits<double>::infinity();
  std::array<int, kDirections> ties{};
  int n_ties = 0;
  for (const auto& x : c) {
    if (!x.feasible || (on_target && x.distance != 0.0)) continue;
    if (x.distance < best) {
      best = x.distance;
      n_ties = 0;
    }
    if (x.distance == best) ties[n_ties++] = x.index;
  }
  if (n_ties == 0) return kStayIndex;
  if (n_ties == 1) return ties[0];
  return ties[std::uniform_int_distribution<int>(0, n_ties - 1)(rng)];
}

std::optional<Direction> choose_step(const MoveQuery& q, const TransitionConfig& cfg, Rng& rng) {
  int pick = kStayIndex;
  switch (cfg.model) {
    case TransitionModel::Full: {
      const Candidates c = candidate_weights_full(q, cfg.beta);
      if (const auto p = normalize(c)) pick = select_full(*p, rng);
      break;
    }
    case TransitionModel::Simplified: {
      const Candidates c = evaluate_candidates(q);
      pick = select_ranked(candidate_ranks_simplified(c, rng), cfg.lambda, rng);
      break;
    }
    case TransitionModel::Greedy: pick = select_greedy(evaluate_candidates(q), rng); break;
  }
  if (pick == kStayIndex) return std::nullopt;
  return static_cast<Direction>(pick);
}

void commit_step(Grid& grid, Pedestrian& ped, const BodyMapSet& maps, Direction next, std::optional<Direction> step) {
  const CellCoord to = step ? ped.center + step_of(*step) : ped.center;
  const auto old_cells = footprint_cells(maps.map(ped.orientation), ped.center);
  const auto new_cells = footprint_cells(maps.map(next), to);
  grid.transfer_occupancy(ped.id, old_cells, new_cells);
  ped.center = to;
  ped.orientation = next;
}

StepOutcome step_center(Pedestrian& ped, Grid& grid, const BodyMapSet& maps, const TransitionConfig& cfg, Rng& rng) {
  const Direction next = facing_target(grid, ped.center, ped.target, ped.orientation);
  const MoveQuery q{grid, maps, ped.id, ped.center, ped.orientation, next, ped.target};
  const auto step = choose_step(q, cfg, rng);
  if (!step) return StepOutcome::Stayed;
  try {
    commit_step(grid, ped, maps, next, step);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Collision) throw;
    return StepOutcome::Stayed;
  }
  if (ped.target.distance_to(grid.center_of(ped.center)) == 0.0) return StepOutcome::Arrived;
  return StepOutcome::Moved;
}

}  // namespace finegrid
