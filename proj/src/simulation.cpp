#include "finegrid/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include "finegrid/error.hpp"
#include "finegrid/simd/kernels.hpp"

namespace finegrid {

namespace {

constexpr int kPlacementAttempts = 32;

bool body_fits(const Grid& grid, const BodyMap& map, CellCoord center, PedId self) {
  for (const RowRun& run : map.rows) {
    const int32_t row = center.row + run.drow;
    const int32_t c0 = center.col + run.dcol_begin;
    if (row < 0 || row >= grid.height_cells() || c0 < 0 || c0 + run.len > grid.width_cells()) return false;
    if (!simd::span_free_or_owned(grid.row_span(row, c0, run.len), self)) return false;
  }
  return true;
}

}  // namespace

Simulation::Simulation(const Scenario& scenario, std::optional<uint64_t> seed)
    : scenario_(scenario),
      grid_(scenario.width, scenario.height, scenario.cell_size),
      rng_(seed.value_or(scenario.seed)) {
  scenario_.validate();
  for (const Rect& o : scenario_.obstacles) grid_.mark_obstacle(o);
  for (const Source& src : scenario_.sources) {
    source_maps_.push_back(maps_.size());
    for (const ProfileShare& p : src.profiles) maps_.emplace_back(p.profile, scenario_.cell_size);
    auto cells = grid_.cells_in(src.area);
    std::erase_if(cells, [&](CellCoord c) { return grid_.raw(c) != Grid::kFree; });
    source_cells_.push_back(std::move(cells));
    budgets_.push_back(0.0);
  }
  if (maps_.empty()) maps_.emplace_back(BodyProfile{}, scenario_.cell_size);
  steps_per_second_ = std::max(1, static_cast<int>(std::lround(1.0 / scenario_.dt)));
}

const Pedestrian* Simulation::find(PedId id) const {
  const auto it = std::find_if(peds_.begin(), peds_.end(), [&](const Pedestrian& p) { return p.id == id; });
  return it == peds_.end() ? nullptr : &*it;
}

Pedestrian* Simulation::find(PedId id) {
  return const_cast<Pedestrian*>(std::as_const(*this).find(id));
}

std::optional<PedId> Simulation::place(CellCoord center, std::size_t profile, const Rect& target) {
  const BodyMapSet& maps = maps_.at(profile);
  const Direction facing = facing_target(grid_, center, target, Direction::East);
  if (!body_fits(grid_, maps.map(facing), center, 0)) return std::nullopt;

  Pedestrian p;
  p.id = next_id_++;
  p.profile = static_cast<int>(profile);
  p.center = center;
  p.orientation = facing;
  p.target = target;
  p.free_flow_speed = maps.profile().free_flow_speed;
  const Point here = grid_.center_of(center);
  const Point aim = target.nearest_point(here);
  p.sector = aim == here ? 0 : heading_sector(aim.x - here.x, aim.y - here.y);
  p.spawn_step = step_index_;
  p.ledger.window_start = 0.0;
  p.recent_moves.assign(static_cast<std::size_t>(steps_per_second_), 0);

  grid_.transfer_occupancy(p.id, {}, footprint_cells(maps.map(facing), center));
  peds_.push_back(std::move(p));
  xs_.push_back(static_cast<float>(here.x));
  ys_.push_back(static_cast<float>(here.y));
  dead_.push_back(0);
  ++counters_.spawned;
  counters_.peak_population = std::max(counters_.peak_population, peds_.size());
  return peds_.back().id;
}

std::vector<PedId> Simulation::spawn_step(std::size_t source) {
  const Source& src = scenario_.sources.at(source);
  double& budget = budgets_.at(source);
  budget += src.demand.rate_at(time()) * scenario_.dt;

  std::vector<PedId> spawned;
  const auto& cells = source_cells_[source];
  if (cells.empty()) return spawned;
  const Rect target = scenario_.sinks[src.sink].area;
  while (budget >= 1.0 - 1e-9) {
    std::size_t profile = source_maps_[source];
    if (src.profiles.size() > 1) {
      std::vector<double> w;
      for (const ProfileShare& p : src.profiles) w.push_back(p.weight);
      profile += static_cast<std::size_t>(std::discrete_distribution<int>(w.begin(), w.end())(rng_));
    }
    std::optional<PedId> id;
    std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
    for (int attempt = 0; attempt < kPlacementAttempts && !id; ++attempt) id = place(cells[pick(rng_)], profile, target);
    if (!id) break;  // saturated: keep the budget for a later step
    spawned.push_back(*id);
    budget -= 1.0;
  }
  return spawned;
}

double Simulation::perceived_density(const Pedestrian& ped) const {
  const std::size_t index = static_cast<std::size_t>(&ped - peds_.data());
  const OrientedRect rect = perception_rect(grid_.center_of(ped.center), ped.sector, scenario_.perception);
  return local_density(PopulationView{xs_, ys_}, rect, grid_.bounds(), index);
}

std::optional<double> Simulation::trailing_speed(const Pedestrian& ped) const {
  if (step_index_ - ped.spawn_step < steps_per_second_) return std::nullopt;
  double cells = 0.0;
  for (uint8_t m : ped.recent_moves) cells += m == 2 ? std::numbers::sqrt2 : static_cast<double>(m);
  return cells * grid_.cell_size() / (steps_per_second_ * scenario_.dt);
}

void Simulation::move_pedestrian(std::size_t index) {
  Pedestrian& ped = peds_[index];
  const BodyMapSet& maps = maps_[static_cast<std::size_t>(ped.profile)];
  const double cs = grid_.cell_size();
  const Point here = grid_.center_of(ped.center);
  const Point aim = ped.target.nearest_point(here);
  if (!(aim == here)) ped.sector = heading_sector(aim.x - here.x, aim.y - here.y);

  uint8_t moved = 0;
  const double density = perceived_density(ped);
  const double desired = desired_speed(scenario_.curve, density);
  SpeedGate direct = gate_probability(desired, cs, scenario_.dt);
  if (gate_override_) direct.move_probability = *gate_override_;

  if (sample_move_allowed(direct, rng_)) {
    const Direction next = facing_target(grid_, ped.center, ped.target, ped.orientation);
    const MoveQuery q{grid_, maps, ped.id, ped.center, ped.orientation, next, ped.target};
    if (const auto step = choose_step(q, scenario_.transition, rng_)) {
      const bool diagonal = is_diagonal(*step);
      const double displacement = diagonal ? cs * std::numbers::sqrt2 : cs;
      bool allowed = true;
      if (diagonal && !gate_override_) {
        // diagonal steps cover more ground, so they pass with P_diag / P_direct
        const SpeedGate diag = gate_probability(desired, displacement, scenario_.dt);
        allowed = std::bernoulli_distribution(diag.move_probability / direct.move_probability)(rng_);
      }
      const double local_now = static_cast<double>(step_index_ - ped.spawn_step) * scenario_.dt;
      const double cap_speed = gate_override_ ? ped.free_flow_speed : desired;
      if (allowed && apply_speed_cap(ped.ledger, displacement, ped.free_flow_speed, cap_speed, local_now)) {
        commit_step(grid_, ped, maps, next, step);
        moved = diagonal ? 2 : 1;
        const Point now = grid_.center_of(ped.center);
        xs_[index] = static_cast<float>(now.x);
        ys_[index] = static_cast<float>(now.y);
        if (ped.target.distance_to(now) == 0.0) {
          grid_.transfer_occupancy(ped.id, footprint_cells(maps.map(ped.orientation), ped.center), {});
          dead_[index] = 1;
          xs_[index] = ys_[index] = std::numeric_limits<float>::quiet_NaN();
          ++counters_.exited;
        }
      }
    }
  }
  ped.recent_moves[ped.recent_pos] = moved;
  ped.recent_pos = (ped.recent_pos + 1) % ped.recent_moves.size();
}

void Simulation::remove_dead() {
  std::size_t out = 0;
  for (std::size_t i = 0; i < peds_.size(); ++i) {
    if (dead_[i]) continue;
    if (out != i) {
      peds_[out] = std::move(peds_[i]);
      xs_[out] = xs_[i];
      ys_[out] = ys_[i];
    }
    dead_[out] = 0;
    ++out;
  }
  peds_.resize(out);
  xs_.resize(out);
  ys_.resize(out);
  dead_.resize(out);
}

void Simulation::step() {
  for (std::size_t s = 0; s < scenario_.sources.size(); ++s) spawn_step(s);

  order_.resize(peds_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::shuffle(order_.begin(), order_.end(), rng_);
  for (std::size_t i : order_) move_pedestrian(i);
  remove_dead();

  ++step_index_;
  ++counters_.steps;
  if (step_index_ % steps_per_second_ == 0) record_samples();
}

void Simulation::record_samples() {
  if (!scenario_.reporting_area) return;
  const double t = time();
  for (const Pedestrian& ped : peds_) {
    if (!scenario_.reporting_area->contains(grid_.center_of(ped.center))) continue;
    const auto speed = trailing_speed(ped);
    if (!speed) continue;
    samples_.push_back({t, ped.id, perceived_density(ped), *speed});
  }
}

RunOutput Simulation::run(double duration, const std::function<void(const Simulation&)>& after_step) {
  const auto steps = static_cast<int64_t>(std::ceil(duration / scenario_.dt - 1e-9));
  for (int64_t i = 0; i < steps; ++i) {
    step();
    if (after_step) after_step(*this);
  }
  RunOutput out;
  out.samples = samples_;
  out.counters = counters_;
  out.remaining = peds_.size();
  out.final_snapshot = snapshot();
  return out;
}

std::size_t Simulation::occupancy_violations() const {
  std::size_t bad = 0;
  std::size_t footprint_total = 0;
  for (const Pedestrian& p : peds_) {
    const auto cells = footprint_cells(maps_[static_cast<std::size_t>(p.profile)].map(p.orientation), p.center);
    footprint_total += cells.size();
    for (const CellCoord& c : cells) bad += grid_.raw(c) != p.id;
  }
  const std::size_t occupied = grid_.occupied_count();
  bad += occupied > footprint_total ? occupied - footprint_total : footprint_total - occupied;
  return bad;
}

std::string Simulation::snapshot() const {
  const int32_t w = grid_.width_cells();
  const int32_t h = grid_.height_cells();
  std::string out;
  out.reserve(static_cast<std::size_t>(w + 1) * h);
  for (int32_t row = h - 1; row >= 0; --row) {
    for (int32_t col = 0; col < w; ++col) {
      const int32_t v = grid_.raw({col, row});
      out += v == Grid::kObstacle ? '#' : v == Grid::kFree ? '.' : 'o';
    }
    out += '\n';
  }
  for (const Pedestrian& p : peds_) {
    const std::size_t line = static_cast<std::size_t>(h - 1 - p.center.row);
    out[line * static_cast<std::size_t>(w + 1) + static_cast<std::size_t>(p.center.col)] = '@';
  }
  return out;
}

void write_samples_csv(std::ostream& out, const std::vector<SpeedDensitySample>& samples) {
  out << "time,ped_id,density,speed\n";
  char buf[128];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.3f,%d,%.6f,%.6f\n", s.time, s.ped_id, s.density, s.speed);
    out << buf;
  }
}

void write_summary_json(std::ostream& out, const RunOutput& run, const Scenario& scenario, uint64_t seed) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "{\n  \"seed\": %llu,\n  \"dt\": %.6g,\n  \"cell_size\": %.6g,\n  \"steps\": %lld,\n"
                "  \"spawned\": %zu,\n  \"exited\": %zu,\n  \"remaining\": %zu,\n  \"peak_population\": %zu,\n"
                "  \"samples\": %zu\n}\n",
                static_cast<unsigned long long>(seed), scenario.dt, scenario.cell_size,
                static_cast<long long>(run.counters.steps), run.counters.spawned, run.counters.exited, run.remaining,
                run.counters.peak_population, run.samples.size());
  out << buf;
}

}  // namespace finegrid
