#include "gpgrad/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "gpgrad/bench.hpp"
#include "gpgrad/csv.hpp"
#include "gpgrad/parallel.hpp"

namespace gpgrad {

namespace {

const std::vector<std::string> kKnownModels{"gp", "gegp", "dgp", "gedgp"};

// fixed per-model stream slots keep results invariant to the model list
int model_slot(const std::string& model) {
  if (model == "gp") return 1;
  if (model == "gegp") return 2;
  if (model == "dgp") return 3;
  if (model == "gedgp") return 4;
  throw std::invalid_argument("unknown model: " + model);
}

bool model_is_deep(const std::string& model) {
  return model == "dgp" || model == "gedgp";
}

bool model_is_ge(const std::string& model) {
  return model == "gegp" || model == "gedgp";
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean value '" + v + "'");
}

std::vector<std::string> split_csv_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void apply_kv(ExperimentConfig& cfg, const std::string& key,
              const std::string& value) {
  if (key == "function") cfg.function = value;
  else if (key == "sigma") cfg.sigma = std::stod(value);
  else if (key == "d") cfg.D = std::stoi(value);
  else if (key == "n") cfg.n = std::stoi(value);
  else if (key == "reps") cfg.reps = std::stoi(value);
  else if (key == "models") cfg.models = split_csv_list(value);
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "outdir") cfg.outdir = value;
  else if (key == "vecchia") cfg.vecchia = parse_bool(value);
  else if (key == "m") cfg.m = std::stoi(value);
  else if (key == "workers") cfg.workers = std::stoi(value);
  else if (key == "save_chains") cfg.save_chains = parse_bool(value);
  else if (key == "eps") cfg.shallow.eps = cfg.deep.eps = std::stod(value);
  else if (key == "gp_nmcmc") cfg.shallow.nmcmc = std::stoi(value);
  else if (key == "gp_burn") cfg.shallow.burn = std::stoi(value);
  else if (key == "gp_thin") cfg.shallow.thin = std::stoi(value);
  else if (key == "dgp_nmcmc") cfg.deep.nmcmc = std::stoi(value);
  else if (key == "dgp_burn") cfg.deep.burn = std::stoi(value);
  else if (key == "dgp_thin") cfg.deep.thin = std::stoi(value);
  else if (key == "prior_shape")
    cfg.shallow.theta_prior_inner.shape = cfg.shallow.theta_prior_outer.shape =
        cfg.deep.theta_prior_inner.shape = cfg.deep.theta_prior_outer.shape =
            std::stod(value);
  else if (key == "prior_rate")
    cfg.shallow.theta_prior_inner.rate = cfg.shallow.theta_prior_outer.rate =
        cfg.deep.theta_prior_inner.rate = cfg.deep.theta_prior_outer.rate =
            std::stod(value);
  else if (key == "latent_identity_prior_mean")
    cfg.deep.latent_identity_prior_mean = parse_bool(value);
  else if (key == "sample_warp") cfg.deep.sample_warp = parse_bool(value);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

struct Standardized {
  TrainingSet data;       // unit-cube inputs, standardized responses
  double y_center = 0.0;
  double y_scale = 1.0;
};

Standardized standardize(const Eigen::MatrixXd& U, const Eigen::VectorXd& y,
                         const Eigen::MatrixXd* grad_unit) {
  Standardized s;
  s.data.X = U;
  s.y_center = y.mean();
  const double var =
      (y.array() - s.y_center).square().sum() / static_cast<double>(y.size());
  s.y_scale = var > 0.0 ? std::sqrt(var) : 1.0;
  s.data.y = (y.array() - s.y_center) / s.y_scale;
  if (grad_unit) s.data.grad = *grad_unit / s.y_scale;
  return s;
}

FittedModel fit_standardized(const std::string& model, Standardized s,
                             const McmcSettings& settings, RngEngine& rng) {
  FittedModel fm;
  fm.model = model;
  fm.y_center = s.y_center;
  fm.y_scale = s.y_scale;
  const int D = s.data.D();
  fm.x_lo = Eigen::VectorXd::Zero(D);
  fm.x_hi = Eigen::VectorXd::Ones(D);
  if (!model_is_ge(model)) s.data.grad.reset();  // not part of the likelihood
  if (model == "gp") fm.gp = fit_gp(s.data, settings, rng);
  else if (model == "gegp") fm.gp = fit_gegp(s.data, settings, rng);
  else if (model == "dgp") fm.dgp = fit_dgp(s.data, settings, rng);
  else if (model == "gedgp") fm.dgp = fit_gedgp(s.data, settings, rng);
  else throw std::invalid_argument("unknown model: " + model);
  return fm;
}

// moments in standardized/unit coordinates for y and all gradient blocks
PosteriorMoments predict_all_blocks(const FittedModel& fm,
                                    const Eigen::MatrixXd& U) {
  PredictRequest req;
  req.Xp = U;
  req.want_gradient = true;
  if (fm.model == "gp") return predict_gp_all(*fm.gp, req);
  if (fm.model == "gegp") return predict_gegp_all(*fm.gp, req);
  if (fm.model == "dgp") return predict_dgp_grad(*fm.dgp, req);
  return predict_gedgp_grad(*fm.dgp, req);
}

std::string chain_filename(const ExperimentConfig& cfg,
                           const std::string& model, int rep) {
  std::ostringstream os;
  os << cfg.outdir << "/chains/" << cfg.function << "_" << model << "_rep"
     << rep << ".chain";
  return os.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (D < 1 || n < 1 || reps < 1)
    throw std::invalid_argument("config: d, n, reps must be >= 1");
  if (models.empty()) throw std::invalid_argument("config: no models");
  for (const auto& m : models) model_slot(m);
  shallow.validate();
  deep.validate();
  if (vecchia && m < 1)
    throw std::invalid_argument("config: vecchia budget m must be >= 1");
}

ExperimentConfig parse_config(const std::vector<std::string>& kv_lines) {
  ExperimentConfig cfg;
  for (const auto& raw : kv_lines) {
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string key, value;
    std::istringstream is(line);
    if (!(is >> key)) continue;  // blank line
    const auto eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
      if (value.empty()) is >> value;
    } else {
      std::string tok;
      if (is >> tok) value = tok == "=" ? (is >> tok, tok) : tok;
    }
    if (value.empty())
      throw std::invalid_argument("config: missing value for '" + key + "'");
    apply_kv(cfg, key, value);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  lines.insert(lines.end(), overrides.begin(), overrides.end());
  return parse_config(lines);
}

int run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const TestFunction fn = make_test_function(cfg.function, cfg.D, cfg.sigma);
  std::filesystem::create_directories(cfg.outdir);
  if (cfg.save_chains)
    std::filesystem::create_directories(cfg.outdir + "/chains");

  McmcSettings shallow = cfg.shallow, deep = cfg.deep;
  shallow.vecchia = deep.vecchia = cfg.vecchia;
  shallow.m = deep.m = cfg.m;

  const int nm = static_cast<int>(cfg.models.size());
  const int ntest = 100 * cfg.D;
  const Eigen::VectorXd width = fn.hi - fn.lo;

  std::vector<std::optional<ResultRow>> rows(
      static_cast<std::size_t>(cfg.reps) * nm);
  std::vector<std::string> failures;
  std::mutex fail_mutex;

  parallel_for(
      cfg.reps,
      [&](std::size_t rep) {
        RngEngine design_rng = make_stream(cfg.seed, rep * 8);
        const Eigen::MatrixXd U = lhs(cfg.n, cfg.D, design_rng);
        const Eigen::MatrixXd Ut = lhs(ntest, cfg.D, design_rng);

        Eigen::VectorXd y(cfg.n);
        Eigen::MatrixXd grad_unit(cfg.n, cfg.D);
        for (int i = 0; i < cfg.n; ++i) {
          const Eigen::VectorXd x = fn.lo + width.cwiseProduct(U.row(i).transpose());
          const EvalResult r = fn(x);
          y[i] = r.y;
          grad_unit.row(i) = r.grad.cwiseProduct(width).transpose();
        }
        Eigen::VectorXd truth_y(ntest);
        Eigen::MatrixXd truth_grad(ntest, cfg.D);  // original-scale gradients
        for (int i = 0; i < ntest; ++i) {
          const Eigen::VectorXd x = fn.lo + width.cwiseProduct(Ut.row(i).transpose());
          const EvalResult r = fn(x);
          truth_y[i] = r.y;
          truth_grad.row(i) = r.grad.transpose();
        }
        const Standardized base = standardize(U, y, &grad_unit);

        for (int mi = 0; mi < nm; ++mi) {
          const std::string& model = cfg.models[mi];
          try {
            RngEngine fit_rng =
                make_stream(cfg.seed, rep * 8 + model_slot(model));
            const McmcSettings& s = model_is_deep(model) ? deep : shallow;
            const auto t0 = std::chrono::steady_clock::now();
            const FittedModel fm = fit_standardized(model, base, s, fit_rng);
            const PosteriorMoments pm = predict_all_blocks(fm, Ut);
            const auto t1 = std::chrono::steady_clock::now();

            ResultRow row;
            row.function = cfg.function;
            row.model = model;
            row.repetition = static_cast<int>(rep);
            row.seed = cfg.seed;
            row.n = cfg.n;
            row.D = cfg.D;
            row.wall_time_s =
                std::chrono::duration<double>(t1 - t0).count();

            const double ys = base.y_scale, ycn = base.y_center;
            Eigen::VectorXd my =
                (pm.mean.head(ntest).array() * ys + ycn).matrix();
            row.rmse_y = rmse(my, truth_y);
            double crps_sum = 0.0;
            for (int i = 0; i < ntest; ++i)
              crps_sum += crps_gaussian(
                  my[i], ys * std::sqrt(pm.var[i]), truth_y[i]);
            row.crps_y = crps_sum / ntest;

            // each partial scored independently on the original scale, then
            // averaged across dimensions
            double rmse_g = 0.0, crps_g = 0.0;
            for (int d = 1; d <= cfg.D; ++d) {
              const double scale = ys / width[d - 1];
              const Eigen::VectorXd md =
                  (pm.mean.segment(d * ntest, ntest).array() * scale).matrix();
              rmse_g += rmse(md, truth_grad.col(d - 1));
              double cs = 0.0;
              for (int i = 0; i < ntest; ++i)
                cs += crps_gaussian(
                    md[i], scale * std::sqrt(pm.var[d * ntest + i]),
                    truth_grad(i, d - 1));
              crps_g += cs / ntest;
            }
            row.rmse_grad = rmse_g / cfg.D;
            row.crps_grad = crps_g / cfg.D;
            rows[rep * nm + mi] = std::move(row);

            if (cfg.save_chains)
              save_model(chain_filename(cfg, model, static_cast<int>(rep)),
                         fm);
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(fail_mutex);
            std::ostringstream os;
            os << cfg.function << ' ' << model << " rep " << rep << " seed "
               << cfg.seed << ": " << e.what();
            failures.push_back(os.str());
          }
        }
      },
      cfg.workers);

  CsvTable results;
  results.header = {"function", "model",  "repetition", "seed",      "n",
                    "D",        "rmse_y", "crps_y",     "rmse_grad",
                    "crps_grad"};
  CsvTable runtime;
  runtime.header = {"function", "model", "repetition", "wall_time_s"};
  for (const auto& opt : rows) {
    if (!opt) continue;
    const ResultRow& r = *opt;
    results.rows.push_back({r.function, r.model, std::to_string(r.repetition),
                            std::to_string(r.seed), std::to_string(r.n),
                            std::to_string(r.D), num17(r.rmse_y),
                            num17(r.crps_y), num17(r.rmse_grad),
                            num17(r.crps_grad)});
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", r.wall_time_s);
    runtime.rows.push_back(
        {r.function, r.model, std::to_string(r.repetition), buf});
  }
  write_csv(cfg.outdir + "/results.csv", results);
  write_csv(cfg.outdir + "/runtime.csv", runtime);

  if (!failures.empty()) {
    std::ofstream log(cfg.outdir + "/failures.log");
    for (const auto& f : failures) {
      log << f << '\n';
      std::fprintf(stderr, "[gpgrad] failed: %s\n", f.c_str());
    }
  }
  return static_cast<int>(failures.size());
}

FittedModel fit_file(const std::string& csv_path, const std::string& model,
                     const McmcSettings& settings, std::uint64_t seed) {
  model_slot(model);
  const CsvTable t = read_csv(csv_path);
  int D = 0;
  while (t.col("x" + std::to_string(D + 1)) >= 0) ++D;
  if (D == 0) throw std::runtime_error(csv_path + ": no x1..xD columns");
  const int ycol = t.col("y");
  if (ycol < 0) throw std::runtime_error(csv_path + ": missing column y");
  const int n = static_cast<int>(t.rows.size());
  if (n < 2) throw std::runtime_error(csv_path + ": need at least two rows");

  Eigen::MatrixXd X(n, D);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < D; ++d)
      X(i, d) = std::stod(t.rows[i][t.col("x" + std::to_string(d + 1))]);
    y[i] = std::stod(t.rows[i][ycol]);
  }

  std::optional<Eigen::MatrixXd> grad;
  if (model_is_ge(model)) {
    Eigen::MatrixXd G(n, D);
    for (int d = 0; d < D; ++d) {
      const std::string name = "dy_dx" + std::to_string(d + 1);
      const int c = t.col(name);
      if (c < 0)
        throw std::runtime_error(csv_path + ": missing column " + name +
                                 " required for model " + model);
      for (int i = 0; i < n; ++i) G(i, d) = std::stod(t.rows[i][c]);
    }
    grad = std::move(G);
  }

  Eigen::VectorXd lo = X.colwise().minCoeff();
  Eigen::VectorXd hi = X.colwise().maxCoeff();
  for (int d = 0; d < D; ++d)
    if (!(hi[d] > lo[d]))
      throw std::runtime_error(csv_path + ": column x" + std::to_string(d + 1) +
                               " is constant; cannot scale");
  const Eigen::VectorXd width = hi - lo;
  Eigen::MatrixXd U(n, D);
  for (int i = 0; i < n; ++i)
    U.row(i) = ((X.row(i).transpose() - lo).cwiseQuotient(width)).transpose();
  std::optional<Eigen::MatrixXd> grad_unit;
  if (grad) {
    grad_unit = *grad;
    for (int d = 0; d < D; ++d) grad_unit->col(d) *= width[d];
  }

  const Standardized s =
      standardize(U, y, grad_unit ? &*grad_unit : nullptr);
  RngEngine rng = make_stream(seed, model_slot(model));
  FittedModel fm = fit_standardized(model, s, settings, rng);
  fm.x_lo = lo;
  fm.x_hi = hi;
  return fm;
}

void predict_file(const FittedModel& m, const std::string& xp_csv,
                  const std::string& out_csv, bool want_gradient) {
  const CsvTable t = read_csv(xp_csv);
  const int D = m.D();
  for (int d = 0; d < D; ++d)
    if (t.col("x" + std::to_string(d + 1)) < 0)
      throw std::runtime_error(xp_csv + ": missing column x" +
                               std::to_string(d + 1));
  const int np = static_cast<int>(t.rows.size());
  if (np == 0) throw std::runtime_error(xp_csv + ": no rows");
  const Eigen::VectorXd width = m.x_hi - m.x_lo;
  Eigen::MatrixXd U(np, D);
  for (int i = 0; i < np; ++i)
    for (int d = 0; d < D; ++d)
      U(i, d) = (std::stod(t.rows[i][t.col("x" + std::to_string(d + 1))]) -
                 m.x_lo[d]) /
                width[d];

  PredictRequest req;
  req.Xp = U;
  req.want_gradient = want_gradient;
  PosteriorMoments pm;
  if (m.model == "gp")
    pm = want_gradient ? predict_gp_all(*m.gp, req) : predict_gp(*m.gp, req);
  else if (m.model == "gegp")
    pm = want_gradient ? predict_gegp_all(*m.gp, req)
                       : predict_gegp(*m.gp, req);
  else if (m.model == "dgp")
    pm = want_gradient ? predict_dgp_grad(*m.dgp, req)
                       : predict_dgp(*m.dgp, req);
  else
    pm = want_gradient ? predict_gedgp_grad(*m.dgp, req)
                       : predict_gedgp(*m.dgp, req);

  CsvTable out;
  out.header = {"mean", "var"};
  if (want_gradient)
    for (int d = 1; d <= D; ++d) {
      out.header.push_back("mean_dy_dx" + std::to_string(d));
      out.header.push_back("var_dy_dx" + std::to_string(d));
    }
  const double ys = m.y_scale;
  for (int i = 0; i < np; ++i) {
    std::vector<std::string> row;
    row.push_back(num17(pm.mean[i] * ys + m.y_center));
    row.push_back(num17(pm.var[i] * ys * ys));
    if (want_gradient)
      for (int d = 1; d <= D; ++d) {
        const double scale = ys / width[d - 1];
        row.push_back(num17(pm.mean[d * np + i] * scale));
        row.push_back(num17(pm.var[d * np + i] * scale * scale));
      }
    out.rows.push_back(std::move(row));
  }
  write_csv(out_csv, out);
}

void emit_plot_data(const std::string& results_csv, const std::string& outdir) {
  const CsvTable t = read_csv(results_csv);
  if (t.rows.empty())
    throw std::runtime_error(results_csv + ": empty result table");
  const int cfun = t.col("function"), cmod = t.col("model"),
            crep = t.col("repetition");
  if (cfun < 0 || cmod < 0 || crep < 0)
    throw std::runtime_error(results_csv + ": missing required columns");
  std::filesystem::create_directories(outdir);

  std::set<std::string> functions;
  for (const auto& r : t.rows) functions.insert(r[cfun]);

  // non-gradient-enhanced models first, mirroring the benchmark panels
  const std::vector<std::string> model_order{"gp", "dgp", "gegp", "gedgp"};
  const std::vector<std::pair<std::string, std::string>> panels{
      {"rmse", "y"}, {"crps", "y"}, {"rmse", "grad"}, {"crps", "grad"}};

  for (const auto& fname : functions) {
    for (const auto& [metric, target] : panels) {
      const int cval = t.col(metric + "_" + target);
      if (cval < 0)
        throw std::runtime_error(results_csv + ": missing column " + metric +
                                 "_" + target);
      CsvTable panel;
      panel.header = {"model", "repetition",
                      "log_" + metric + "_" + target};
      for (const auto& model : model_order)
        for (const auto& r : t.rows)
          if (r[cfun] == fname && r[cmod] == model)
            panel.rows.push_back(
                {model, r[crep], num17(std::log(std::stod(r[cval])))});
      write_csv(outdir + "/" + fname + "_" + metric + "_" + target + ".csv",
                panel);
    }
  }
}

}  // namespace gpgrad
