#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "finegrid/calibration.hpp"
#include "finegrid/error.hpp"
#include "finegrid/scenario.hpp"
#include "finegrid/simulation.hpp"

namespace finegrid::cli {

namespace {

namespace fs = std::filesystem;

struct Invocation {
  std::string scenario_path;
  std::string out_dir = ".";
  std::optional<uint64_t> seed;
  std::optional<double> duration;
  std::optional<double> perception_width;
  std::optional<double> perception_length;
  std::vector<double> snapshot_at;
  std::vector<double> widths;
  std::vector<double> lengths;
  int repeats = 5;
  double bin_width = 0.25;
  unsigned threads = 0;
};

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

int report(std::ostream& err, int code, const std::string& kind, const std::string& message) {
  err << "finegrid: error: " << kind << ": " << one_line(message) << '\n';
  return code;
}

// Marks errors raised while reading or validating the scenario (exit code 2).
struct ScenarioFailure {
  Error error;
};

Scenario load(const Invocation& inv) {
  try {
    Scenario s = load_scenario(inv.scenario_path);
    if (inv.seed) s.seed = *inv.seed;
    if (inv.duration) s.duration = *inv.duration;
    if (inv.perception_width) s.perception.width = *inv.perception_width;
    if (inv.perception_length) s.perception.length = *inv.perception_length;
    s.validate();
    return s;
  } catch (const Error& e) {
    throw ScenarioFailure{e};
  }
}

std::string snapshot_name(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshot_%g.txt", t);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path.string());
  f << text;
}

// Steps the simulation, writing each requested snapshot at the first step whose
// clock reaches its time.
RunOutput simulate(const Invocation& inv, const Scenario& s, bool keep_samples) {
  std::vector<double> pending = inv.snapshot_at;
  std::sort(pending.begin(), pending.end());
  Simulation sim(s);
  const fs::path dir(inv.out_dir);
  auto flush_snapshots = [&](const Simulation& now) {
    while (!pending.empty() && now.time() >= pending.front() - 1e-9) {
      write_text(dir / snapshot_name(pending.front()), now.snapshot());
      pending.erase(pending.begin());
    }
  };
  flush_snapshots(sim);
  RunOutput out = sim.run(s.duration, flush_snapshots);
  if (!keep_samples) out.samples.clear();
  return out;
}

int cmd_run(const Invocation& inv, std::ostream& out) {
  const Scenario s = load(inv);
  const RunOutput result = simulate(inv, s, true);
  const fs::path dir(inv.out_dir);
  {
    std::ofstream csv(dir / "samples.csv", std::ios::binary);
    if (!csv) throw Error(ErrorKind::Io, "cannot write " + (dir / "samples.csv").string());
    write_samples_csv(csv, result.samples);
  }
  {
    std::ofstream json(dir / "summary.json", std::ios::binary);
    if (!json) throw Error(ErrorKind::Io, "cannot write " + (dir / "summary.json").string());
    write_summary_json(json, result, s, s.seed);
  }
  out << "spawned=" << result.counters.spawned << " exited=" << result.counters.exited
      << " remaining=" << result.remaining << " samples=" << result.samples.size() << '\n';
  return kOk;
}

int cmd_snapshot(Invocation inv, std::ostream& out) {
  if (inv.snapshot_at.empty()) inv.snapshot_at.push_back(0.0);
  if (!inv.duration) inv.duration = std::max(*std::max_element(inv.snapshot_at.begin(), inv.snapshot_at.end()), 1e-9);
  const Scenario s = load(inv);
  simulate(inv, s, false);
  out << "snapshots=" << inv.snapshot_at.size() << '\n';
  return kOk;
}

int cmd_sweep(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const Scenario s = load(inv);
  SweepSpec spec;
  spec.widths = inv.widths.empty() ? std::vector<double>{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5} : inv.widths;
  spec.lengths = inv.lengths.empty() ? std::vector<double>{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5} : inv.lengths;
  spec.repeats = inv.repeats;
  spec.duration = s.duration;
  spec.bin_width = inv.bin_width;
  spec.threads = inv.threads;
  spec.validate();

  const fs::path path = fs::path(inv.out_dir) / "sweep.csv";
  std::ofstream csv(path, std::ios::binary);
  if (!csv) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_sweep_header(csv);
  csv.flush();

  SweepHooks hooks;
  hooks.on_cell = [&](const SweepCell& cell) {
    write_sweep_row(csv, cell);
    csv.flush();
  };
  const SweepResult result = sweep(spec, s, simulation_scorer(spec), hooks);

  std::size_t failures = 0;
  for (const SweepCell& cell : result.cells) {
    for (const std::string& f : cell.failures) {
      err << "finegrid: run-failure: " << one_line(f) << '\n';
      ++failures;
    }
  }
  try {
    const SweepCell& best = best_area(result);
    char buf[200];
    std::snprintf(buf, sizeof buf, "best width=%g length=%g amse=%.9g std_mse=%.9g\n", best.width, best.length,
                  best.amse, best.std_mse);
    out << buf;
  } catch (const Error&) {
    return report(err, kRuntimeFailure, "runtime-failure", "no perception area completed");
  }
  return failures ? kRuntimeFailure : kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fine-grid cellular automata pedestrian simulator", "finegrid"};
  app.require_subcommand(1);
  Invocation inv;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", inv.scenario_path, "Scenario file")->required();
    cmd->add_option("--out", inv.out_dir, "Output directory (created if missing)");
    cmd->add_option("--seed", inv.seed, "Override the scenario seed");
    cmd->add_option("--duration", inv.duration, "Simulated seconds");
    cmd->add_option("--perception-width", inv.perception_width, "Perception rectangle width (m)");
    cmd->add_option("--perception-length", inv.perception_length, "Perception rectangle length (m)");
  };

  CLI::App* run = app.add_subcommand("run", "Run one simulation; writes samples.csv and summary.json");
  add_common(run);
  run->add_option("--snapshot-at", inv.snapshot_at, "Snapshot times in seconds")->delimiter(',');

  CLI::App* snap = app.add_subcommand("snapshot", "Write text rasters at the given times");
  add_common(snap);
  snap->add_option("--snapshot-at", inv.snapshot_at, "Snapshot times in seconds")->delimiter(',');

  CLI::App* sw = app.add_subcommand("sweep", "Calibrate the perception area; writes sweep.csv");
  add_common(sw);
  sw->add_option("--widths", inv.widths, "Perception widths (m)")->delimiter(',');
  sw->add_option("--lengths", inv.lengths, "Perception lengths (m)")->delimiter(',');
  sw->add_option("--repeats", inv.repeats, "Runs per perception area");
  sw->add_option("--bin-width", inv.bin_width, "Density bin width (ped/m^2)");
  sw->add_option("--threads", inv.threads, "Worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    return report(err, kUsage, "usage", e.what());
  }

  try {
    if (!fs::exists(inv.scenario_path)) {
      return report(err, kScenarioError, "io-error", "scenario file not found: " + inv.scenario_path);
    }
    std::error_code ec;
    fs::create_directories(inv.out_dir, ec);
    if (ec) return report(err, kRuntimeFailure, "io-error", "cannot create " + inv.out_dir + ": " + ec.message());
    if (*run) return cmd_run(inv, out);
    if (*snap) return cmd_snapshot(inv, out);
    return cmd_sweep(inv, out, err);
  } catch (const ScenarioFailure& f) {
    return report(err, kScenarioError, to_string(f.error.kind()), f.error.what());
  } catch (const Error& e) {
    return report(err, e.kind() == ErrorKind::Validation ? kUsage : kRuntimeFailure, to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report(err, kRuntimeFailure, "runtime-failure", e.what());
  }
}

}  // namespace finegrid::cli
