#pragma once

#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "surfpde/interface.hpp"
#include "surfpde/problems.hpp"
#include "surfpde/timestep.hpp"

namespace surfpde {

enum class Experiment { Poisson, Consistency, Eigen, Heat, Interface, Ablation };

Experiment experiment_from_name(std::string_view name);
const char* experiment_name(Experiment e);

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::Poisson;
  std::string surface;  // empty: the experiment's usual surface
  std::vector<Index> N{1600, 3200, 6400, 12800};
  int trials = 12;
  std::uint64_t seed = 1;
  AutotuneConfig autotune;
  double dt = 1e-3, t_end = 0.05, nu = 0.1;
  int bdf_order = 4;
  int startup_substeps = 16;  // nested startup refinement per level
  std::vector<int> modes{1, 2, 4, 8, 20};
  bool diagnostics = false;
  std::string out;  // report directory; empty writes nothing

  std::string resolved_surface() const;
  void validate() const;
};

/// One `key = value` setting; keys mirror the CLI flags (N, trials, seed,
/// surface, l, lbd, kappa, omega, gamma, K0, Kmax, delta, dt, T_end, nu,
/// modes, bdf_order, substeps, radius_multiple, qp, diagnostics, out, fast).
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Flat key = value text. Keys before any section header and under
/// [common] always apply; keys under [<experiment>] apply to that
/// experiment only. '#' starts a comment.
void load_config_file(ExperimentConfig& cfg, const std::string& path);
void load_config_text(ExperimentConfig& cfg, std::string_view text);

/// Seed for one (N, trial) cell; distinct cells get unrelated streams.
std::uint64_t trial_seed(std::uint64_t base, Index N, int trial);

/// RMS of approx - exact.
double rms_error(const Eigen::VectorXd& approx, const Eigen::VectorXd& exact);

/// RMS of (op u) - target over the operator's rows.
double forward_error(const OperatorMatrix& op, const Eigen::VectorXd& u, const Eigen::VectorXd& target);

/// RMS over all nodes; throws on a length mismatch.
double inverse_error(const Eigen::VectorXd& u_num, const Eigen::VectorXd& u_exact);

/// Least-squares p in error ~ N^-p. Needs two or more points and positive errors.
double fit_rate(const std::vector<std::pair<double, double>>& points);

/// log2(e_k / e_{k+1}) per consecutive pair, sorted by N.
std::vector<double> pairwise_rates(const std::vector<std::pair<double, double>>& points);

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TrialResult {
  Experiment experiment = Experiment::Poisson;
  std::string surface;
  Index N = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double fe_int = kNaN, fe_bd = kNaN, ie = kNaN, inv_norm = kNaN, secs = 0.0;
  std::vector<int> modes;                             // eigen trials only
  std::vector<double> eig_err;                        // one per mode
  std::vector<std::pair<std::string, double>> extra;  // experiment specific, fixed order
  std::string status = "ok";
  std::string diagnostics;  // per-row lines when requested

  bool ok() const { return status == "ok"; }
  double get(std::string_view metric) const;  // NaN when absent
};

/// Trial mean, standard deviation and max per N of one metric, with the
/// fitted and pairwise rates of the means.
struct MetricSummary {
  std::vector<Index> N;
  std::vector<double> mean, stddev, max;
  double rate = kNaN;
  std::vector<double> pairwise;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string surface;
  std::vector<TrialResult> trials;  // ordered by N, then trial
  std::map<std::string, MetricSummary> summary;

  int failures() const;
  std::vector<std::string> metric_names() const;
};

TrialResult run_trial(const ExperimentConfig& cfg, Index N, int trial);

/// Runs every (N, trial) cell, trials in parallel, and aggregates.
/// Trial failures are recorded in the report, not thrown.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

MetricSummary summarize(const std::vector<TrialResult>& trials, std::string_view metric);

void write_trials_csv(std::ostream& os, const ExperimentReport& report);
void write_summary_json(std::ostream& os, const ExperimentReport& report);
void write_diagnostics_csv(std::ostream& os, const ExperimentReport& report);

/// trials.csv, summary.json and (when requested) diagnostics.csv under `dir`.
void write_reports(const ExperimentReport& report, const std::string& dir);

}  // namespace surfpde
