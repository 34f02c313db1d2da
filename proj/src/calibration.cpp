#include "finegrid/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>
#include <tuple>

#include "finegrid/error.hpp"

namespace finegrid {

std::vector<DensityBin> bin_samples(std::span<const SpeedDensitySample> samples, double bin_width, double max_density) {
  std::map<long, std::pair<std::size_t, double>> acc;
  for (const auto& s : samples) {
    if (!(s.density >= 0.0) || s.density >= max_density) continue;
    auto& [n, sum] = acc[static_cast<long>(std::floor(s.density / bin_width))];
    ++n;
    sum += s.speed;
  }
  std::vector<DensityBin> bins;
  for (const auto& [k, v] : acc) bins.push_back({(static_cast<double>(k) + 0.5) * bin_width, v.first, v.second / v.first});
  return bins;
}

std::optional<double> mse(std::span<const SpeedDensitySample> samples, const SpeedDensityCurve& curve,
                          double bin_width, std::size_t min_count) {
  double total = 0.0;
  std::size_t used = 0;
  for (const DensityBin& b : bin_samples(samples, bin_width, curve.max_density())) {
    if (b.count < min_count) continue;
    const double err = b.mean_speed - curve.speed_at(b.center);
    total += err * err;
    ++used;
  }
  if (used == 0) return std::nullopt;
  return total / static_cast<double>(used);
}

void SweepSpec::validate() const {
  if (widths.empty() || lengths.empty()) throw Error(ErrorKind::Validation, "sweep needs at least one width and length");
  if (repeats < 1) throw Error(ErrorKind::Validation, "sweep repeats must be >= 1");
  if (!(bin_width > 0.0)) throw Error(ErrorKind::Validation, "sweep bin_width must be > 0");
  if (!(duration > 0.0)) throw Error(ErrorKind::Validation, "sweep duration must be > 0");
}

uint64_t derive_seed(uint64_t base, std::size_t wi, std::size_t li, std::size_t repeat) {
  // splitmix64 finalizer folded over the indices
  auto mix = [](uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  uint64_t h = mix(base);
  h = mix(h ^ wi);
  h = mix(h ^ li);
  return mix(h ^ repeat);
}

RunScorer simulation_scorer(const SweepSpec& spec) {
  return [duration = spec.duration, bin = spec.bin_width, min_count = spec.min_bin_count](const Scenario& s,
                                                                                          uint64_t seed) {
    Simulation sim(s, seed);
    const RunOutput out = sim.run(duration);
    const auto score = mse(out.samples, s.curve, bin, min_count);
    if (!score) throw Error(ErrorKind::Validation, "no density bin reached the minimum sample count");
    return *score;
  };
}

SweepResult sweep(const SweepSpec& spec, const Scenario& base, const RunScorer& scorer, const SweepHooks& hooks) {
  spec.validate();
  const std::size_t n_len = spec.lengths.size();
  const std::size_t n_cells = spec.widths.size() * n_len;
  const std::size_t reps = static_cast<std::size_t>(spec.repeats);
  const std::size_t n_runs = n_cells * reps;

  std::vector<std::size_t> order = hooks.run_order;
  if (order.empty()) {
    order.resize(n_runs);
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  if (order.size() != n_runs) throw Error(ErrorKind::Validation, "run_order must be a permutation of all runs");

  std::vector<std::optional<double>> scores(n_runs);
  std::vector<std::string> errors(n_runs);
  std::vector<std::size_t> pending(n_cells, reps);

  SweepResult result;
  result.cells.resize(n_cells);
  for (std::size_t wi = 0; wi < spec.widths.size(); ++wi) {
    for (std::size_t li = 0; li < n_len; ++li) {
      result.cells[wi * n_len + li].width = spec.widths[wi];
      result.cells[wi * n_len + li].length = spec.lengths[li];
    }
  }

  std::mutex mu;
  std::size_t next_flush = 0;
  auto finish_cell = [&](std::size_t ci) {
    SweepCell& cell = result.cells[ci];
    for (std::size_t r = 0; r < reps; ++r) {
      const std::size_t run = ci * reps + r;
      if (scores[run]) cell.mses.push_back(*scores[run]);
      else cell.failures.push_back(errors[run]);
    }
    if (!cell.mses.empty()) {
      const double n = static_cast<double>(cell.mses.size());
      cell.amse = std::accumulate(cell.mses.begin(), cell.mses.end(), 0.0) / n;
      double ss = 0.0;
      for (double m : cell.mses) ss += (m - cell.amse) * (m - cell.amse);
      cell.std_mse = std::sqrt(ss / n);
    } else {
      cell.amse = cell.std_mse = std::nan("");
    }
  };

  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = cursor.fetch_add(1);
      if (k >= n_runs) return;
      const std::size_t run = order[k];
      const std::size_t ci = run / reps;
      const std::size_t rep = run % reps;
      const std::size_t wi = ci / n_len;
      const std::size_t li = ci % n_len;
      std::optional<double> score;
      std::string err;
      try {
        Scenario s = base;
        s.perception.width = spec.widths[wi];
        s.perception.length = spec.lengths[li];
        s.perception.validate();
        score = scorer(s, derive_seed(base.seed, wi, li, rep));
      } catch (const std::exception& e) {
        char id[96];
        std::snprintf(id, sizeof id, "width=%g length=%g repeat=%zu: ", spec.widths[wi], spec.lengths[li], rep);
        err = id + std::string(e.what());
      }
      std::lock_guard lock(mu);
      scores[run] = score;
      errors[run] = std::move(err);
      if (--pending[ci] == 0) {
        finish_cell(ci);
        while (next_flush < n_cells && pending[next_flush] == 0) {
          if (hooks.on_cell) hooks.on_cell(result.cells[next_flush]);
          ++next_flush;
        }
      }
    }
  };

  unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_runs));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  return result;
}

const SweepCell& best_area(const SweepResult& result) {
  const SweepCell* best = nullptr;
  for (const SweepCell& c : result.cells) {
    if (!c.ok()) continue;
    if (!best) {
      best = &c;
      continue;
    }
    const auto key = [](const SweepCell& x) { return std::tuple(x.amse, x.std_mse, x.width * x.length); };
    if (key(c) < key(*best)) best = &c;
  }
  if (!best) throw Error(ErrorKind::Validation, "sweep produced no completed cell");
  return *best;
}

void write_sweep_header(std::ostream& out) { out << "width,length,amse,std_mse,repeats\n"; }

void write_sweep_row(std::ostream& out, const SweepCell& cell) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%g,%g,%.9g,%.9g,%zu\n", cell.width, cell.length, cell.amse, cell.std_mse,
                cell.mses.size());
  out << buf;
}

}  // namespace finegrid
