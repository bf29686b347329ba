// signvar: posterior sampling for sign-identified SVARs.
//
//   signvar run <config.json>
//   signvar toy-sweep [--grid a,b,...] [--points N] [--steps N] [--reps N] [--seed S] [--out FILE]
//   signvar diagnose <draws-file> [--batch-size B] [--wall-minutes M] [--shocks i,j,...]

#include "signvar/diagnostics.hpp"
#include "signvar/error.hpp"
#include "signvar/io.hpp"
#include "signvar/pipeline.hpp"
#include "signvar/toy_circle.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

namespace {

// Accepts plain numbers, "pi", "2pi" and "pi/k".
double parse_arc(const std::string& s) {
  const double pi = std::numbers::pi;
  if (s == "pi") return pi;
  if (s == "2pi") return 2.0 * pi;
  if (s.rfind("pi/", 0) == 0) return pi / std::stod(s.substr(3));
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw signvar::ConfigError("cannot parse arc length '" + s + "'");
  return v;
}

int toy_sweep(const std::vector<std::string>& grid_text, int points, long long steps,
              long long reps, std::uint64_t seed, const std::string& out_path) {
  std::vector<double> grid;
  for (const auto& g : grid_text) {
    try {
      grid.push_back(parse_arc(g));
    } catch (const std::invalid_argument&) {
      throw signvar::ConfigError("cannot parse arc length '" + g + "'");
    }
  }
  if (grid.empty()) grid = signvar::default_arc_grid(points);
  signvar::SweepOptions opt;
  opt.ess_steps = steps;
  opt.ar_reps = reps;
  opt.seed = seed;
  opt.workers = signvar::worker_count();
  const auto rows = signvar::sweep_arc_costs(grid, opt);
  if (out_path.empty() || out_path == "-") {
    signvar::write_sweep_csv(std::cout, rows);
  } else {
    signvar::atomic_write(out_path, [&](std::ostream& os) { signvar::write_sweep_csv(os, rows); });
  }
  return 0;
}

int diagnose(const std::string& path, int batch_size, std::optional<double> wall_minutes,
             const std::vector<int>& shocks) {
  const signvar::DrawsFile file = signvar::read_draws_file(path);
  const auto matrix = signvar::contemporaneous_irf_matrix(file.draws, shocks);
  const auto report = signvar::diagnose(matrix, batch_size, wall_minutes);
  std::cout << signvar::to_json(report).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posterior sampler for SVARs identified by sign and ranking restrictions"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the pipeline described by a JSON config");
  run->add_option("config", config_path, "Config file")->required();

  std::vector<std::string> grid;
  int points = 30;
  long long steps = 10'000;
  long long reps = 1'000;
  std::uint64_t seed = 1;
  std::string out_path;
  auto* sweep = app.add_subcommand("toy-sweep", "Circle example: trials per draw against arc length");
  sweep->add_option("--grid", grid, "Arc lengths (numbers, pi, 2pi, pi/k)")->delimiter(',');
  sweep->add_option("--points", points, "Default grid size")->check(CLI::PositiveNumber);
  sweep->add_option("--steps", steps, "ESS steps per arc")->check(CLI::Range(1000LL, 1LL << 40));
  sweep->add_option("--reps", reps, "Accept-reject draws per arc")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed, "Seed");
  sweep->add_option("--out", out_path, "Output CSV (default stdout)");

  std::string draws_path;
  int batch_size = signvar::kDefaultBatchSize;
  std::optional<double> wall_minutes;
  std::vector<int> shocks;
  auto* diag = app.add_subcommand("diagnose", "Effective sample size of a draws file");
  diag->add_option("draws", draws_path, "Draws file written by run")->required();
  diag->add_option("--batch-size", batch_size, "Batch size")->check(CLI::PositiveNumber);
  diag->add_option("--wall-minutes", wall_minutes, "Wall time, for minutes per 1000 effective");
  diag->add_option("--shocks", shocks, "Shock columns of L_0 to use (default all)")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return signvar::run_file(config_path, std::cerr, std::cerr);
    if (*sweep) return toy_sweep(grid, points, steps, reps, seed, out_path);
    if (*diag) return diagnose(draws_path, batch_size, wall_minutes, shocks);
  } catch (const signvar::Error& e) {
    std::cerr << "signvar: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "signvar: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
