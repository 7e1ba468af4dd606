#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gpgrad/chain_io.hpp"

namespace gpgrad {

// Flat key-value configuration for a benchmark sweep.  Keys mirror the field
// names; command-line overrides use the same key=value syntax.
struct ExperimentConfig {
  std::string function = "squiggle";
  double sigma = 0.05;  // squiggle ridge width
  int D = 2;
  int n = 25;
  int reps = 10;
  std::vector<std::string> models{"gp", "dgp", "gegp", "gedgp"};
  McmcSettings shallow = McmcSettings::shallow_defaults();
  McmcSettings deep = McmcSettings::deep_defaults();
  bool vecchia = false;
  int m = 25;
  std::uint64_t seed = 1;
  std::string outdir = "out";
  int workers = 0;  // 0 = GPGRAD_WORKERS or hardware
  bool save_chains = true;

  void validate() const;
};

ExperimentConfig parse_config(const std::vector<std::string>& kv_lines);
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

struct ResultRow {
  std::string function, model;
  int repetition = 0;
  std::uint64_t seed = 0;
  int n = 0, D = 0;
  double rmse_y = 0.0, crps_y = 0.0, rmse_grad = 0.0, crps_grad = 0.0;
  double wall_time_s = 0.0;
};

// Monte Carlo sweep over (model x repetition).  Writes results.csv (scores;
// byte-deterministic for a fixed config and seed), runtime.csv (wall times),
// and optionally one chain file per fit.  Failed repetitions are logged and
// skipped; the return value is the number of failures.
int run_experiment(const ExperimentConfig& cfg);

// Fits a model to a CSV with columns x1..xD, y and optionally
// dy_dx1..dy_dxD.  Inputs are scaled to the unit cube and responses
// standardized; the maps are recorded in the returned model.
FittedModel fit_file(const std::string& csv_path, const std::string& model,
                     const McmcSettings& settings, std::uint64_t seed);

// Predicts at the x1..xD rows of a CSV; writes mean/var columns for y and,
// when requested, each partial derivative mapped back through the recorded
// input scaling.
void predict_file(const FittedModel& m, const std::string& xp_csv,
                  const std::string& out_csv, bool want_gradient);

// One file per (function, metric, target) with log-scale scores, models
// ordered GP, DGP, geGP, geDGP.
void emit_plot_data(const std::string& results_csv, const std::string& outdir);

}  // namespace gpgrad
