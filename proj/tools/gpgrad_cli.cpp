// Command-line harness: benchmark sweeps, file-based fitting and prediction,
// and plot-ready exports.
#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "gpgrad/chain_io.hpp"
#include "gpgrad/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gpgrad: GP/DGP surrogates with gradients"};
  app.require_subcommand(1);

  // bench run <config>
  auto* bench = app.add_subcommand("bench", "benchmark sweeps");
  bench->require_subcommand(1);
  auto* bench_run = bench->add_subcommand("run", "run a configured sweep");
  std::string config_path;
  std::vector<std::string> overrides;
  bench_run->add_option("config", config_path, "flat key-value config file")
      ->required();
  bench_run->add_option("--set", overrides,
                        "override config entries as key=value");

  // fit <csv> --model ...
  auto* fit = app.add_subcommand("fit", "fit a surrogate to a CSV file");
  std::string fit_csv, fit_model, fit_out = "model.chain";
  gpgrad::McmcSettings fit_shallow = gpgrad::McmcSettings::shallow_defaults();
  int fit_nmcmc = -1, fit_burn = -1, fit_thin = -1, fit_m = 25;
  bool fit_vecchia = false;
  double fit_eps = 1e-8;
  std::uint64_t fit_seed = 1;
  fit->add_option("csv", fit_csv, "training CSV with x1..xD, y[, dy_dx*]")
      ->required();
  fit->add_option("--model", fit_model, "gp | gegp | dgp | gedgp")
      ->required()
      ->check(CLI::IsMember({"gp", "gegp", "dgp", "gedgp"}));
  fit->add_option("--out", fit_out, "chain file to write");
  fit->add_option("--nmcmc", fit_nmcmc, "MCMC iterations");
  fit->add_option("--burn", fit_burn, "burn-in iterations");
  fit->add_option("--thin", fit_thin, "thinning stride");
  fit->add_option("--eps", fit_eps, "jitter");
  fit->add_flag("--vecchia", fit_vecchia, "use Vecchia approximation");
  fit->add_option("--m", fit_m, "Vecchia conditioning budget");
  fit->add_option("--seed", fit_seed, "RNG seed");

  // predict <chain> <csv> [--grad]
  auto* predict = app.add_subcommand("predict", "predict from a chain file");
  std::string pr_chain, pr_csv, pr_out = "predictions.csv";
  bool pr_grad = false;
  predict->add_option("chain", pr_chain, "chain file")->required();
  predict->add_option("csv", pr_csv, "CSV with predictive x1..xD rows")
      ->required();
  predict->add_flag("--grad", pr_grad, "also predict partial derivatives");
  predict->add_option("--out", pr_out, "output CSV");

  // plotdata <results.csv>
  auto* plot = app.add_subcommand("plotdata", "emit per-panel plot CSVs");
  std::string plot_results, plot_outdir = "plotdata";
  plot->add_option("results", plot_results, "results.csv from a sweep")
      ->required();
  plot->add_option("--outdir", plot_outdir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bench_run->parsed()) {
      const gpgrad::ExperimentConfig cfg =
          gpgrad::load_config(config_path, overrides);
      const int failures = gpgrad::run_experiment(cfg);
      if (failures > 0) {
        std::fprintf(stderr, "[gpgrad] %d repetition(s) failed\n", failures);
        return 1;
      }
      std::printf("results written to %s/results.csv\n", cfg.outdir.c_str());
      return 0;
    }
    if (fit->parsed()) {
      const bool deep = fit_model == "dgp" || fit_model == "gedgp";
      gpgrad::McmcSettings s = deep ? gpgrad::McmcSettings::deep_defaults()
                                    : gpgrad::McmcSettings::shallow_defaults();
      if (fit_nmcmc > 0) s.nmcmc = fit_nmcmc;
      if (fit_burn >= 0) s.burn = fit_burn;
      if (fit_thin > 0) s.thin = fit_thin;
      s.eps = fit_eps;
      s.vecchia = fit_vecchia;
      s.m = fit_m;
      const gpgrad::FittedModel m =
          gpgrad::fit_file(fit_csv, fit_model, s, fit_seed);
      gpgrad::save_model(fit_out, m);
      std::printf("chain written to %s\n", fit_out.c_str());
      return 0;
    }
    if (predict->parsed()) {
      const gpgrad::FittedModel m = gpgrad::load_model(pr_chain);
      gpgrad::predict_file(m, pr_csv, pr_out, pr_grad);
      std::printf("predictions written to %s\n", pr_out.c_str());
      return 0;
    }
    if (plot->parsed()) {
      gpgrad::emit_plot_data(plot_results, plot_outdir);
      std::printf("panel files written to %s\n", plot_outdir.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
