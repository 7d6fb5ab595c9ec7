// secnav: scenario generation, seeded navigation experiments and plots.
//
//   secnav generate [--out DIR] [--seed N] [--width W --height H]
//   secnav run      [--scenario FILE] [--trials N] [--seed N] [--approach 1|2|both] [--jobs N] [--out DIR]
//   secnav plot     [--out DIR] [--scenario FILE]
//
// The default output directory is $SECNAV_OUT_DIR, or ./secnav_out.
// Exit status: 0 ok, 2 bad configuration, 3 bad scenario, 4 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "secnav/experiment.hpp"
#include "secnav/plot.hpp"
#include "secnav/scenario.hpp"
#include "secnav/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace secnav;

namespace {

enum Exit { kOk = 0, kConfig = 2, kScenario = 3, kRuntime = 4 };

struct ScenarioError : Error {
  using Error::Error;
  explicit ScenarioError(const Error& e) : Error(e) {}
};

std::string default_out_dir() {
  const char* env = std::getenv("SECNAV_OUT_DIR");
  return env && *env ? env : "secnav_out";
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + p.string() + " for writing");
  return f;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + p.string());
  return f;
}

Scenario load_or_throw(const std::string& path) {
  try {
    return load_scenario(path);
  } catch (const Error& e) {
    throw ScenarioError(e);
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure navigation experiments on a simulated battlefield map"};
  app.require_subcommand(1);

  std::string out_dir = default_out_dir();

  GenerateOptions gen;
  std::optional<double> gen_sigma;
  auto* generate = app.add_subcommand("generate", "write the built-in scenario file");
  generate->add_option("--out", out_dir, "output directory");
  generate->add_option("--seed", gen.seed, "layout seed");
  generate->add_option("--width", gen.width, "map width (m)");
  generate->add_option("--height", gen.height, "map height (m)");
  generate->add_option("--margin", gen.margin, "corridor half-width (m)");
  generate->add_option("--sigma-range", gen_sigma, "range noise std-dev (m)");

  ExperimentConfig cfg;
  cfg.jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string scenario_path;
  std::string approach = "both";
  std::optional<double> dt;
  auto* run = app.add_subcommand("run", "run seeded trials and write per-trial results");
  run->add_option("--scenario", scenario_path, "scenario file (default: built-in scenario)");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--trials", cfg.trials, "trials per path and approach");
  run->add_option("--seed", cfg.base_seed, "base seed; trial i uses seed + i");
  run->add_option("--approach", approach, "1, 2 or both")->check(CLI::IsMember({"1", "2", "both"}));
  run->add_option("--jobs", cfg.jobs, "worker threads");
  run->add_option("--margin", cfg.margin, "override corridor half-width (m)");
  run->add_option("--sigma-range", cfg.sigma_range, "override range noise std-dev (m)");
  run->add_option("--dt", dt, "override time step (s)");
  run->add_option("--speed", cfg.nav.desired_speed, "desired speed (m/s)");
  run->add_option("--trace-trial", cfg.traced_trial, "trial whose trajectories are saved for plotting");

  auto* plot = app.add_subcommand("plot", "render SVG figures from a results directory");
  plot->add_option("--out", out_dir, "results directory");
  plot->add_option("--scenario", scenario_path, "scenario file (default: the one saved by run)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const fs::path out(out_dir);
    if (*generate) {
      if (gen_sigma) {
        if (*gen_sigma < 0) throw Error(ErrorCode::InvalidArgument, "sigma-range must be >= 0");
        gen.noise.measurement.sigma_range = *gen_sigma;
      }
      const Scenario sc = generate_scenario(gen);
      ensure_dir(out);
      save_scenario(sc, (out / "scenario.json").string());
      std::cout << "wrote " << (out / "scenario.json").string() << " (" << sc.map.landmarks.size() << " landmarks, "
                << sc.paths.size() << " paths)\n";
      return kOk;
    }

    if (*run) {
      if (approach == "1") cfg.approaches = {Approach::BmmLanBLoc};
      if (approach == "2") cfg.approaches = {Approach::BmmEkfLanBLoc};
      if (dt) cfg.motion.dt = *dt;
      cfg.validate();
      Scenario sc = scenario_path.empty() ? generate_scenario({}) : load_or_throw(scenario_path);
      try {
        sc = apply_overrides(sc, cfg);
      } catch (const Error& e) {
        throw ScenarioError(e);
      }
      ensure_dir(out);
      const ExperimentResult result = run_experiment(sc, cfg);
      save_scenario(sc, (out / "scenario_used.json").string());
      {
        auto f = open_out(out / "trials.csv");
        write_trials_csv(f, result.records);
      }
      {
        auto f = open_out(out / "trajectories.csv");
        write_traces_csv(f, result.traces);
      }
      const BatchSummary summary = batch_evaluate(result.records);
      {
        auto f = open_out(out / "summary.txt");
        write_summary(f, summary);
      }
      write_summary(std::cout, summary);
      return kOk;
    }

    if (*plot) {
      const Scenario sc = load_or_throw(scenario_path.empty() ? (out / "scenario_used.json").string() : scenario_path);
      auto trials_in = open_in(out / "trials.csv");
      const std::vector<TrialRecord> records = read_trials_csv(trials_in);
      std::vector<TracedRun> traces;
      if (fs::exists(out / "trajectories.csv")) {
        auto f = open_in(out / "trajectories.csv");
        traces = read_traces_csv(f);
      }
      const auto files = plot_results(out / "plots", sc, records, traces);
      for (const auto& p : files) std::cout << "wrote " << p.string() << '\n';
      return kOk;
    }
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return kScenario;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::InvalidArgument:
      case ErrorCode::ZeroSpeed:
        return kConfig;
      case ErrorCode::ParseError:
      case ErrorCode::VersionMismatch:
      case ErrorCode::EmptyCluster:
      case ErrorCode::DisconnectedCorridor:
        return kScenario;
      default:
        return kRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
