// Command line front end: validate, solve-invariant, simulate, estimate,
// study, report. Exit codes: 0 success, 2 configuration error, 3 numeric
// failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "mckv/errors.hpp"
#include "mckv/experiments.hpp"
#include "mckv/invariant.hpp"
#include "mckv/io.hpp"
#include "mckv/wasserstein.hpp"

namespace fs = std::filesystem;
using namespace mckv;

namespace {

struct CommonOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::optional<double> a;
};

ExperimentConfig load_config(const std::string& path, const CommonOverrides& ov) {
  auto cfg = parse_config_file(path);
  if (ov.seed) cfg.seed0 = *ov.seed;
  if (ov.out) cfg.out_dir = *ov.out;
  if (ov.a) cfg.a = *ov.a;
  if (ov.mode) {
    if (*ov.mode == "oracle")
      cfg.mode = RegMode::oracle_shift;
    else if (*ov.mode == "clip")
      cfg.mode = RegMode::clip;
    else
      throw ConfigError("--mode must be 'oracle' or 'clip'");
  }
  return cfg;
}

InitSpec init_from_config(const ExperimentConfig& cfg, const GridDensity& pi) {
  if (cfg.init_kind == "point") return InitSpec::point(cfg.init_x0);
  if (cfg.init_kind == "invariant") return InitSpec::from_density(pi);
  return InitSpec::gaussian(cfg.init_mean, cfg.init_sd);
}

int cmd_validate(const std::string& config_path) {
  const auto cfg = parse_config_file(config_path);
  const auto model = builtin_model(cfg.model_name, cfg.model_params);
  const auto report = validate_assumptions(model);
  std::cout << "model: " << model.model_id << " (lambda = " << model.lambda << ")\n"
            << report.to_string();
  if (!report.overall) throw ConfigError("model fails the standing assumptions");
  return 0;
}

int cmd_solve_invariant(const std::string& config_path, const CommonOverrides& ov,
                        double tol, bool binary) {
  const auto cfg = load_config(config_path, ov);
  const auto model = builtin_model(cfg.model_name, cfg.model_params);
  auto pi = solve_invariant(model, default_invariant_grid(), tol);
  exact_log_derivative(model, pi, 0.0);  // populate pi'
  std::cout << "residual = " << residual(model, pi) << ", Z_pi = " << pi.normalizer << "\n";
  const std::string out = cfg.out_dir.empty() ? "invariant_density" : cfg.out_dir;
  fs::create_directories(fs::path(out));
  write_density_csv(pi, (fs::path(out) / "pi.csv").string());
  if (binary) write_density_binary(pi, (fs::path(out) / "pi.bin").string());
  std::cout << "wrote " << (fs::path(out) / "pi.csv").string() << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const CommonOverrides& ov, bool binary) {
  const auto cfg = load_config(config_path, ov);
  const auto model = builtin_model(cfg.model_name, cfg.model_params);
  const auto pi = solve_invariant(model, default_invariant_grid());
  const std::size_t N = cfg.N_list.back();
  const double T = cfg.t_rule.horizon(N, model.lambda);
  const auto e = simulate_system(model, N, T, cfg.dt, cfg.seed0, init_from_config(cfg, pi));
  std::cout << "simulated N = " << N << ", T = " << T << ", W1 to invariant = "
            << wasserstein1(e.positions, pi) << "\n";
  const std::string out = cfg.out_dir.empty() ? "ensemble" : cfg.out_dir;
  fs::create_directories(fs::path(out));
  write_ensemble_csv(e, (fs::path(out) / "ensemble.csv").string());
  if (binary) write_ensemble_binary(e, (fs::path(out) / "ensemble.bin").string());
  std::cout << "wrote " << (fs::path(out) / "ensemble.csv").string() << "\n";
  return 0;
}

int cmd_estimate(const std::string& config_path, const CommonOverrides& ov) {
  const auto cfg = load_config(config_path, ov);
  const auto model = builtin_model(cfg.model_name, cfg.model_params);
  const Grid grid = default_invariant_grid();
  const auto pi = solve_invariant(model, grid);
  const std::size_t N = cfg.N_list.back();
  const double T = cfg.t_rule.horizon(N, model.lambda);
  const auto e = simulate_system(model, N, T, cfg.dt, cfg.seed0, init_from_config(cfg, pi));

  const auto est_cfg = derive_config(model, N, T, cfg.m, cfg.eps, cfg.a);
  DeconvolutionSettings s{cfg.a, cfg.y_max, cfg.n_freq, 0.0, cfg.mode};
  const auto est = estimate_interaction(e, model, est_cfg, s, grid, bump_weight(cfg.eps),
                                        std::optional<GridDensity>(pi));

  const std::string out = cfg.out_dir.empty() ? "estimate" : cfg.out_dir;
  fs::create_directories(fs::path(out));
  const auto pi_prime_est =
      estimate_density_derivative(e, make_kernel(est.config.m), est.config.h1, grid);
  write_estimates_csv(est.pi_est, pi_prime_est, est.l_est, (fs::path(out) / "estimates.csv").string());
  write_grid_function_csv(est.psi, (fs::path(out) / "psi.csv").string(), "psi");
  write_grid_function_csv(est.w_prime, (fs::path(out) / "wprime.csv").string(), "w_prime");

  std::ofstream rj(fs::path(out) / "report.json");
  rj << "{\n  \"alpha_hat\": " << est.alpha_hat << ",\n  \"psi\": \"psi.csv\",\n"
     << "  \"w_prime\": \"wprime.csv\",\n  \"min_denominator\": " << est.min_denominator
     << ",\n  \"eps_NT\": " << est.config.eps_NT
     << ",\n  \"imag_residue_ratio\": " << est.imag_residue_ratio << "\n}\n";
  std::cout << "alpha_hat = " << est.alpha_hat
            << ", min |denominator| = " << est.min_denominator << " (eps_NT = "
            << est.config.eps_NT << ")\n";
  for (const auto& w : est.warnings) std::cout << "warning: " << w << "\n";
  std::cout << "wrote " << out << "/{estimates,psi,wprime}.csv\n";
  return 0;
}

int cmd_study(const std::string& config_path, const CommonOverrides& ov) {
  auto cfg = load_config(config_path, ov);
  if (cfg.out_dir.empty()) cfg.out_dir = "study_out";
  const auto result = run_convergence_study(cfg);
  const auto rep = report(result);
  std::cout << rep.text;
  std::ofstream pc(fs::path(cfg.out_dir) / "plot.csv");
  pc << rep.plot_csv;
  std::cout << "persisted to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_report(const std::string& dir) {
  const auto result = load(dir);
  const auto rep = report(result);
  std::cout << rep.text;
  std::ofstream pc(fs::path(dir) / "plot.csv");
  pc << rep.plot_csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"McKean-Vlasov particle simulation and interaction-function estimation"};
  app.require_subcommand(1);

  std::string config_path, report_dir;
  CommonOverrides ov;
  double tol = 1e-10;
  bool binary = false;

  auto add_common = [&](CLI::App* sub, bool with_config = true) {
    if (with_config)
      sub->add_option("config", config_path, "JSON experiment config")->required();
    sub->add_option("--seed", ov.seed, "override seed0");
    sub->add_option("--out", ov.out, "override output directory");
    sub->add_option("--mode", ov.mode, "regularization mode: oracle | clip");
    sub->add_option("--a", ov.a, "line offset for the complex-line transforms");
  };

  auto* validate = app.add_subcommand("validate", "check model assumptions");
  validate->add_option("config", config_path, "JSON experiment config")->required();

  auto* solve = app.add_subcommand("solve-invariant", "solve the invariant density");
  add_common(solve);
  solve->add_option("--tol", tol, "fixed-point residual tolerance");
  solve->add_flag("--binary", binary, "also write the MKVD1 binary");

  auto* simulate = app.add_subcommand("simulate", "run one particle simulation");
  add_common(simulate);
  simulate->add_flag("--binary", binary, "also write the MKVE1 binary");

  auto* estimate = app.add_subcommand("estimate", "run the 4-step estimation pipeline once");
  add_common(estimate);

  auto* study = app.add_subcommand("study", "run a full seeded convergence study");
  add_common(study);

  auto* rep = app.add_subcommand("report", "summarize a persisted study");
  rep->add_option("dir", report_dir, "study output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return (code == 0) ? 0 : 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(config_path);
    if (solve->parsed()) return cmd_solve_invariant(config_path, ov, tol, binary);
    if (simulate->parsed()) return cmd_simulate(config_path, ov, binary);
    if (estimate->parsed()) return cmd_estimate(config_path, ov);
    if (study->parsed()) return cmd_study(config_path, ov);
    if (rep->parsed()) return cmd_report(report_dir);
  } catch (const ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 2;
  } catch (const NumericError& ex) {
    std::cerr << "numeric failure: " << ex.what() << "\n";
    return 3;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 3;
  }
  return 0;
}
