#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "covhf/avar.hpp"
#include "covhf/preavg.hpp"
#include "covhf/simulate.hpp"

namespace covhf {

enum class Experiment { consistency, rate, clt_coverage, epps, kernel_lemma, single_run };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

struct ExperimentConfig {
  Experiment experiment = Experiment::single_run;
  ScenarioSpec scenario;
  EstimatorConfig estimator;
  std::size_t replications = 1;
  /// n_scale values for consistency, rate and clt_coverage. Empty means the scenario's n_scale.
  std::vector<std::uint64_t> n_grid;
  /// kernel_lemma: window lengths; each uses n_scale = ceil((kn / theta)^2).
  std::vector<std::size_t> kn_grid{8, 16, 32};
  /// epps: previous-tick grids with step 1 / (factor * n_scale).
  std::vector<double> grid_factors{0.05, 0.2, 1.0, 5.0};
  double ci_level = 0.95;
  std::string output_dir = "covhf_out";
  std::uint64_t master_seed = 0;

  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

struct ReplicationRow {
  std::string group;
  double param = 0.0;  ///< n_scale, or kn for kernel_lemma
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<double> values;  ///< one per ResultRecord::columns; NaN when !ok
};

struct ColumnStats {
  double mean = 0.0;
  double sd = 0.0;  ///< sample standard deviation, NaN below two values
  double mc_se = 0.0;
  double bias = 0.0;  ///< NaN where the column has no target
  double rmse = 0.0;
  double median = 0.0;
};

struct GroupSummary {
  std::string group;
  double param = 0.0;
  std::size_t n_ok = 0;
  std::size_t failures = 0;
  std::vector<double> targets;  ///< per column; NaN where bias/rmse do not apply
  std::vector<ColumnStats> stats;
  std::optional<double> coverage;  ///< mean of a "covered" column
};

inline constexpr int kResultSchemaVersion = 1;

struct ResultRecord {
  int schema_version = kResultSchemaVersion;
  std::string experiment;
  std::string scenario_hash;
  std::uint64_t master_seed = 0;
  std::size_t replications = 0;
  std::vector<std::string> columns;
  std::vector<ReplicationRow> rows;
  std::vector<GroupSummary> summaries;
  /// rate: OLS slope of log RMSE of the first column on log n.
  std::optional<double> slope;
  double wall_clock_seconds = 0.0;
};

/// Summaries of the successful rows of each group, groups in first-seen order.
/// `targets` maps group name to per-column targets.
std::vector<GroupSummary> summarize(const std::vector<std::string>& columns,
                                    const std::vector<ReplicationRow>& rows,
                                    const std::vector<std::pair<std::string, std::vector<double>>>& targets);

/// OLS slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Worker count: COVHF_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Spot inputs implied by a constant-coefficient scenario with theta = kn / sqrt(n_scale).
/// Gaussian noise gives Psi = diag(omega^2); rounding uses the grid-averaged gamma^2 / 6.
AvarInputs scenario_avar_inputs(const ScenarioSpec& scenario, std::size_t kn, const KernelConstants& k);

/// Oracle V_t over [0, t] for Poisson designs (with or without change point).
/// Uses the endogenous formula whenever a loading phi is nonzero.
double oracle_variance(const ScenarioSpec& scenario, std::size_t kn, const KernelConstants& k, double t);

/// Runs the experiment. Failing replications are recorded, not fatal.
ResultRecord run(const ExperimentConfig& config);

/// `include_timing` adds wall_clock_seconds, which is excluded by default so
/// that reruns produce byte-identical documents.
nlohmann::json to_json(const ResultRecord& r, bool include_timing = false);
ResultRecord result_from_json(const nlohmann::json& j);

/// Header `group,param,rep,seed,ok,<columns>`, one row per replication, then
/// one `summary` row per group carrying the column means. Header only when
/// there are no rows.
std::string to_csv(const ResultRecord& r);

enum class ExportFormat { csv, json };

/// Writes <dir>/<experiment>.<ext>; the JSON export also writes
/// <dir>/<experiment>.timing.json. Returns the main file path.
std::filesystem::path export_record(const ResultRecord& r, const std::filesystem::path& dir,
                                    ExportFormat format);

struct ThresholdCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Pass/fail thresholds of the self-test mode:
///   consistency  |mean - truth| <= 3 MC SE per n, RMSE strictly decreasing in n
///   rate         slope in [-0.35, -0.15]
///   clt_coverage coverage in [level - 0.04, level + 0.03]
///   epps         finest previous-tick mean < 0.6 truth, modified PHY within 15% of truth
///   kernel_lemma median deviation strictly decreasing in kn
///   all          no failed replications
std::vector<ThresholdCheck> self_test(const ExperimentConfig& config, const ResultRecord& record);

}  // namespace covhf
