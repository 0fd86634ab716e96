#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mckv/deconvolution.hpp"
#include "mckv/potentials.hpp"

namespace mckv {

struct TRule {
  enum class Kind { fixed, balanced };
  Kind kind = Kind::balanced;
  double value = 0.0;  // horizon for the fixed rule

  // balanced: T = ceil(log(N)/lambda), so exp(-lambda T) <= 1/N
  double horizon(std::size_t N, double lambda) const;
};

struct ExperimentConfig {
  std::string model_name = "hermite";
  std::map<std::string, double> model_params;
  std::vector<std::size_t> N_list;
  TRule t_rule;
  double dt = 0.01;
  int m = 2;
  double eps = 0.9;
  double a = 0.0;
  RegMode mode = RegMode::oracle_shift;
  int replicates = 1;
  std::uint64_t seed0 = 1;
  std::string out_dir;

  bool estimate = true;  // run the full estimation pipeline per cell
  bool coupled = false;  // also simulate synchronously coupled copies
  std::complex<double> probe{2.0, 1.0};
  double y_max = 20.0;
  std::size_t n_freq = 4097;
  std::string init_kind = "gaussian";  // gaussian | point | invariant
  double init_mean = 0.0;
  double init_sd = 1.0;
  double init_x0 = 0.0;
  bool write_cell_artifacts = true;

  void validate() const;  // throws ConfigError
};

// JSON config parsing (file or text). Unknown keys are rejected.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

struct CellResult {
  std::size_t N = 0;
  int replicate = 0;
  double T = 0.0;
  double N_T = 0.0;
  std::map<std::string, double> metrics;
  bool failed = false;
  std::string error;
  // per-cell exports (w_prime, psi); written by persist, not restored by load
  std::map<std::string, GridFunction> artifacts;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::size_t n_points = 0;
};

struct ExperimentResult {
  int schema_version = 1;
  ExperimentConfig config;
  double gamma = 0.0;  // schedule exponent echoed for the report header
  double c_u = 0.0;
  double lambda = 0.0;
  std::vector<CellResult> cells;
  // metric -> N -> median over replicates
  std::map<std::string, std::map<std::size_t, double>> medians;
  // metric -> log-log fit of the medians against N_T
  std::map<std::string, RateFit> slopes;
};

// Least squares of log(err) on log(n). Requires >= 2 points, all positive.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

// Full seeded sweep over (N, replicate) cells. Metrics per cell (when
// applicable): w1_pi, charfn_sq_error, alpha_hat, alpha_error,
// l2_psi_error, l2_wprime_error, l2_wprime_norm, min_denominator, eps_NT,
// coupled_m2, coupled_m4. Component failures mark the cell failed but do
// not abort the study. Deterministic given seed0.
ExperimentResult run_convergence_study(const ExperimentConfig& cfg);

// Files written under dir: config.json, cells.csv, summary.json, and
// per-cell artifact CSVs under dir/cells when enabled.
void persist(const ExperimentResult& result, const std::string& dir);
ExperimentResult load(const std::string& dir);

struct ReportOutput {
  std::string text;      // metric x N table plus slope-vs-theory lines
  std::string plot_csv;  // long-format rows for external plotting
};
ReportOutput report(const ExperimentResult& result);

}  // namespace mckv
