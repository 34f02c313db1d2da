// Acceptance suite: one PASS/FAIL line per criterion.
//
//   finegrid_acceptance [--only=N,...] [--expect-fail=N,...]
//
// Exit status is 0 when the failing criteria are exactly the --expect-fail set.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "finegrid/body_map.hpp"
#include "finegrid/calibration.hpp"
#include "finegrid/movement.hpp"
#include "finegrid/scenario.hpp"
#include "finegrid/simulation.hpp"
#include "finegrid/speed_control.hpp"

using namespace finegrid;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const fs::path kWalkway = fs::path(FINEGRID_SOURCE_DIR) / "scenarios" / "walkway.scn";

// --- 1: per-second move counts under a 1.4 m/s cap ---------------------------

Verdict table_one() {
  struct Row {
    double cell;
    bool diagonal;
    int moves;
    double error_pct;
  };
  // published: 28 / 0%, 19 / 4.04%, 3 / ~14%, 2 / ~20%
  const Row expected[] = {{0.05, false, 28, 0.0}, {0.05, true, 19, 4.04}, {0.4, false, 3, 14.0}, {0.4, true, 2, 20.0}};
  bool ok = true;
  std::string detail;
  for (const Row& r : expected) {
    const double step = r.diagonal ? r.cell * std::numbers::sqrt2 : r.cell;
    DisplacementLedger ledger;
    int moves = 0;
    for (int k = 0; k < 40; ++k) moves += apply_speed_cap(ledger, step, 1.4, 1.4, k * 0.025);
    const double covered = moves * step;
    const double err = (1.4 - covered) / 1.4 * 100.0;
    const bool row_ok = moves == r.moves && std::abs(err - r.error_pct) <= 0.5;
    ok &= row_ok;
    detail += fmt("%s%gcm %s: %d moves %.4f m err %.2f%% (want %d, %.2f%%)", detail.empty() ? "" : "; ",
                  r.cell * 100, r.diagonal ? "diag" : "direct", moves, covered, err, r.moves, r.error_pct);
  }
  return {ok, detail};
}

// --- 2: distinct direct-move speeds on the 5 cm / 25 ms lattice --------------

Verdict speed_levels() {
  std::set<long> displacements;  // in cells per second
  for (int milli = 0; milli <= 2500; ++milli) {
    const double cap = milli / 1000.0;
    for (double p : {1.0, 0.5}) {
      Rng rng(static_cast<uint64_t>(milli));
      DisplacementLedger ledger;
      const SpeedGate gate{p * 40, 40, p};
      int moves = 0;
      for (int k = 0; k < 40; ++k)
        if (sample_move_allowed(gate, rng) && apply_speed_cap(ledger, 0.05, 2.5, cap, k * 0.025)) ++moves;
      displacements.insert(moves);
    }
  }
  const bool ok = displacements.size() == 41 && *displacements.begin() == 0 && *displacements.rbegin() == 40;
  return {ok, fmt("%zu distinct per-second displacements, %ld..%ld cells (0..%.2f m/s)", displacements.size(),
                  *displacements.begin(), *displacements.rbegin(), *displacements.rbegin() * 0.05)};
}

// --- 3: greedy packing of adult bodies in 1 m^2 ------------------------------

Verdict packing() {
  Grid g(1.0, 1.0, 0.05);
  const BodyMapSet maps(BodyProfile{}, 0.05);
  PedId id = 1;
  int placed = 0;
  for (Direction d : {Direction::East, Direction::North, Direction::NorthEast})
    for (int r = 0; r < 20; ++r)
      for (int c = 0; c < 20; ++c) {
        const auto cells = footprint_cells(maps.map(d), {c, r});
        if (!g.cells_free(cells, id)) continue;
        g.transfer_occupancy(id++, {}, cells);
        ++placed;
      }
  std::size_t owned = 0;
  for (int32_t v : g.raw_cells()) owned += v > 0;
  return {placed >= 7, fmt("%d adults placed without overlap, %zu of 400 cells covered", placed, owned)};
}

// --- 4 and 5: random neighbourhoods through the real kernel ------------------

struct Neighbourhood {
  Grid grid{3.0, 3.0, 0.05};
  Rect target;
};

// A 1-cell body at the middle of a 3 m square, target point anywhere on the
// square, each of the eight neighbours blocked with probability 1/4.
Neighbourhood random_neighbourhood(Rng& rng) {
  Neighbourhood n;
  std::uniform_real_distribution<double> where(0.0, 3.0);
  const Point t{where(rng), where(rng)};
  n.target = Rect{t.x, t.y, t.x, t.y};
  std::bernoulli_distribution blocked(0.25);
  std::vector<CellCoord> walls;
  for (int d = 0; d < kDirections; ++d)
    if (blocked(rng)) walls.push_back(CellCoord{30, 30} + step_of(static_cast<Direction>(d)));
  n.grid.transfer_occupancy(999, {}, walls);
  return n;
}

const BodyMapSet& dot_maps() {
  static const BodyMapSet maps(BodyProfile{"dot", 0.05, 0.05, 1.34}, 0.05);
  return maps;
}

Verdict beta_limit() {
  Rng rng(4);
  int configs = 0, full_hits = 0, greedy_hits = 0;
  double mean_p = 0.0;
  while (configs < 10000) {
    const Neighbourhood n = random_neighbourhood(rng);
    const MoveQuery q{n.grid, dot_maps(), 1, {30, 30}, Direction::East, Direction::East, n.target};
    Candidates c = evaluate_candidates(q);
    int best = -1, feasible = 0;
    bool tie = false, on_target = false;
    for (const auto& x : c) {
      on_target |= x.distance == 0.0;
      if (!x.feasible) continue;
      ++feasible;
      if (best < 0 || x.distance < c[best].distance) {
        tie = false;
        best = x.index;
      } else if (x.distance == c[best].distance) {
        tie = true;
      }
    }
    if (feasible == 0 || tie || on_target) continue;
    ++configs;
    candidate_weights_full(c, 50.0);
    const auto p = *normalize(c);
    mean_p += p[best];
    full_hits += select_full(p, rng) == best;
    greedy_hits += select_greedy(c, rng) == best;
  }
  const double freq = full_hits / double(configs);
  return {freq >= 0.999 && greedy_hits == configs,
          fmt("beta=50 picked argmin in %.4f of %d configurations (mean P %.4f, want >= 0.999); greedy %d/%d", freq,
              configs, mean_p / configs, greedy_hits, configs)};
}

Verdict normalization() {
  Rng rng(5);
  int configs = 0;
  double worst = 0.0;
  while (configs < 10000) {
    const Neighbourhood n = random_neighbourhood(rng);
    const MoveQuery q{n.grid, dot_maps(), 1, {30, 30}, Direction::East, Direction::East, n.target};
    for (double beta : {1.0, 10.0, 50.0}) {
      const auto p = normalize(candidate_weights_full(q, beta));
      if (!p) continue;
      double sum = 0.0;
      for (double x : *p) sum += x;
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    ++configs;
  }
  return {worst <= 1e-9, fmt("max |sum P - 1| = %.3g over %d configurations x 3 betas", worst, configs)};
}

// --- 6 and 7: the default corridor -------------------------------------------

struct CorridorRun {
  bool done = false;
  RunOutput out;
  Scenario scenario;
  std::size_t worst_violations = 0;
  int64_t conservation_breaks = 0;
  double wall = 0.0;
};

CorridorRun& corridor_run() {
  static CorridorRun run;
  if (run.done) return run;
  run.scenario = load_scenario(kWalkway.string());
  const auto t0 = std::chrono::steady_clock::now();
  Simulation sim(run.scenario);
  run.out = sim.run(2000.0, [&](const Simulation& m) {
    run.worst_violations = std::max(run.worst_violations, m.occupancy_violations());
    if (m.counters().spawned != m.counters().exited + m.pedestrians().size()) ++run.conservation_breaks;
  });
  run.wall = seconds_since(t0);
  run.done = true;
  return run;
}

Verdict no_overlap() {
  const CorridorRun& r = corridor_run();
  const auto& c = r.out.counters;
  const bool ok = r.worst_violations == 0 && r.conservation_breaks == 0 &&
                  c.spawned == c.exited + r.out.remaining && r.wall < 600.0;
  return {ok, fmt("%lld steps, max violations %zu, conservation breaks %lld, spawned %zu = exited %zu + remaining "
                  "%zu, %.1f s wall",
                  static_cast<long long>(c.steps), r.worst_violations, static_cast<long long>(r.conservation_breaks),
                  c.spawned, c.exited, r.out.remaining, r.wall)};
}

Verdict fundamental_diagram() {
  const CorridorRun& r = corridor_run();
  double peak = 0.0;
  for (const auto& s : r.out.samples) peak = std::max(peak, s.density);
  const double bin = 0.25;
  double worst = 0.0;
  double worst_at = 0.0;
  int checked = 0;
  for (const DensityBin& b : bin_samples(r.out.samples, bin, r.scenario.curve.max_density())) {
    if (b.center - bin / 2 < 0.5 - 1e-9 || b.center + bin / 2 > 4.0 + 1e-9 || b.count < 50) continue;
    ++checked;
    const double err = b.mean_speed - r.scenario.curve.speed_at(b.center);
    if (std::abs(err) > std::abs(worst)) {
      worst = err;
      worst_at = b.center;
    }
  }
  const bool ok = checked > 0 && std::abs(worst) <= 0.15 && peak >= 4.0;
  return {ok, fmt("%d bins in [0.5, 4.0] checked, worst error %+.3f m/s at %.3f ped/m^2, peak density %.2f, "
                  "%zu samples",
                  checked, worst, worst_at, peak, r.out.samples.size())};
}

// --- 8: reduced calibration sweep ---------------------------------------------

Verdict calibration_trend() {
  Scenario s = load_scenario(kWalkway.string());
  s.sources[0].demand.breakpoints = {{0.0, 1.0}, {600.0, 7.0}};
  SweepSpec spec;
  spec.widths = {0.5, 2.0, 3.5};
  spec.lengths = {0.5, 2.0, 3.5};
  spec.repeats = 2;
  spec.duration = 600.0;
  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult r = sweep(spec, s, simulation_scorer(spec));
  auto at = [&](double w, double l) -> const SweepCell& {
    for (const auto& c : r.cells)
      if (c.width == w && c.length == l) return c;
    throw std::logic_error("missing cell");
  };
  const SweepCell& small = at(0.5, 0.5);
  const SweepCell& ref = at(2.0, 3.5);  // 3.5 m long, 2.0 m wide
  bool all_ok = true;
  for (const auto& c : r.cells) all_ok &= c.ok();
  const SweepCell& best = best_area(r);
  return {all_ok && small.amse > ref.amse,
          fmt("AMSE 0.5x0.5 = %.5f, 3.5(L)x2.0(W) = %.5f; best %gx%g (W x L, %.2f m^2) AMSE %.5f; %.0f s", small.amse,
              ref.amse, best.width, best.length, best.width * best.length, best.amse, seconds_since(t0))};
}

// --- 9: 10 cm against 5 cm ------------------------------------------------------

Verdict coarse_grid() {
  auto timed = [](double cell) {
    Scenario s = load_scenario(kWalkway.string());
    s.cell_size = cell;
    const auto t0 = std::chrono::steady_clock::now();
    const RunOutput out = Simulation(s).run(2000.0);
    const double wall = seconds_since(t0);
    return std::pair{*mse(out.samples, s.curve), wall};
  };
  const auto [fine, fine_wall] = timed(0.05);
  const auto [coarse, coarse_wall] = timed(0.10);
  const bool ok = coarse >= 1.5 * fine && coarse_wall < fine_wall;
  return {ok, fmt("MSE 5 cm %.5f, 10 cm %.5f (ratio %.2f, want >= 1.5); wall %.1f s vs %.1f s", fine, coarse,
                  coarse / fine, fine_wall, coarse_wall)};
}

// --- 10: byte-identical CSV -------------------------------------------------------

Verdict determinism() {
  const fs::path dir = fs::path(FINEGRID_BINARY_DIR) / "acceptance_determinism";
  fs::remove_all(dir);
  std::string csv[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path out = dir / std::to_string(i);
    const std::string scn = kWalkway.string(), o = out.string();
    const char* argv[] = {"finegrid", "run", "--scenario", scn.c_str(), "--out", o.c_str(), "--duration", "300"};
    std::ostringstream sink_out, sink_err;
    if (cli::run_cli(8, argv, sink_out, sink_err) != 0) return {false, "run failed: " + sink_err.str()};
    std::ifstream in(out / "samples.csv", std::ios::binary);
    csv[i].assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  const bool ok = !csv[0].empty() && csv[0] == csv[1];
  return {ok, fmt("two runs, %zu bytes each, %s", csv[0].size(), ok ? "identical" : "different")};
}

std::set<int> parse_list(const char* s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, expect_fail;
  for (int i = 1; i < argc; ++i) {
    if (std::strncmp(argv[i], "--only=", 7) == 0) only = parse_list(argv[i] + 7);
    else if (std::strncmp(argv[i], "--expect-fail=", 14) == 0) expect_fail = parse_list(argv[i] + 14);
    else {
      std::cerr << "usage: finegrid_acceptance [--only=N,...] [--expect-fail=N,...]\n";
      return 2;
    }
  }
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"cap move counts per second", table_one},
      {"41 direct speed levels", speed_levels},
      {"packing >= 7 per m^2", packing},
      {"beta = 50 limit", beta_limit},
      {"normalization", normalization},
      {"no overlap, conservation", no_overlap},
      {"fundamental diagram", fundamental_diagram},
      {"calibration trend", calibration_trend},
      {"grid coarseness", coarse_grid},
      {"determinism", determinism},
  };
  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(n)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) failed.insert(n);
    std::cout << (v.pass ? "PASS" : "FAIL") << " C" << n << " " << criteria[i].first << ": " << v.detail << std::endl;
  }
  if (!only.empty()) {
    std::set<int> filtered;
    for (int n : expect_fail)
      if (only.count(n)) filtered.insert(n);
    expect_fail = filtered;
  }
  if (failed != expect_fail) {
    std::cout << "unexpected outcome: failing set differs from the expected one\n";
    return 1;
  }
  return 0;
}
