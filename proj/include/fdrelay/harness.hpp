#pragma once

// Seeded Monte-Carlo experiments over the relay model: parameter sweeps,
// scheme comparison, CSV persistence and contour grids.

#include "fdrelay/optimizer.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fdrelay {

enum class Experiment {
  kTrainingSweep,
  kInrSweep,
  kSnrSweep,
  kContour,
  kAntennaSweep,
  kApproxContour,
};

std::string_view to_string(Experiment e);
std::optional<Experiment> experiment_from_string(std::string_view name);

/// Every power is in dB; the linear values are derived on demand.
struct ExperimentConfig {
  Experiment experiment = Experiment::kInrSweep;
  double rho_r_db = 15.0;
  double rho_ratio_db = 3.0102999566398121;  // rho_r / rho_d = 2
  double eta_r_db = 40.0;
  double eta_d_db = 0.0;
  double kappa_db = -40.0;
  double beta_db = -40.0;
  int n_s = 3;
  int n_r = 3;
  int m_r = 4;
  int m_d = 4;
  int train_len = 50;
  std::vector<double> sweep_values;  ///< T, eta_r [dB], rho_r [dB] or N, per experiment
  std::vector<Scheme> schemes;
  int trials = 20;
  std::uint64_t seed = 1;
  std::vector<double> tau_grid = {0.3, 0.5, 0.7};
  GpConfig gp;
  std::string out_path;
  std::vector<double> rho_r_db_values;  ///< contour rows
  std::vector<double> eta_r_db_values;  ///< contour columns
  int antenna_total = 7;                ///< N + M in the antenna sweep
  int workers = 0;                      ///< 0: one per hardware thread

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
  /// Linear parameters at the base operating point.
  SystemParams params() const;
  /// Linear parameters with the sweep axis set to `value` (and, for
  /// contours, eta_r set to `value2` dB).
  SystemParams params_at(double value, double value2 = 0.0) const;
  /// Ordered (key, value) pairs covering every field, as accepted by
  /// apply_setting.
  std::vector<std::pair<std::string, std::string>> to_settings() const;
};

double db_to_linear(double db);

/// Desk-scale defaults for `e`; paper_scale selects the full protocol.
ExperimentConfig default_config(Experiment e, bool paper_scale = false);

/// Sets one key from its textual value. Unknown keys and malformed or
/// out-of-range values throw std::invalid_argument naming the key.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Reads key=value lines or a JSON object (nested objects flatten to
/// parent_child keys). Returns the pairs in file order.
std::vector<std::pair<std::string, std::string>> read_settings(const std::string& path);

/// Defaults for the experiment named in the file (or `experiment` when
/// given, which wins), overlaid with the file's settings.
ExperimentConfig parse_config(const std::string& path,
                              std::optional<Experiment> experiment = std::nullopt,
                              bool paper_scale = false);

struct TrialRecord {
  int trial_index = 0;
  double sweep_value = 0.0;
  double sweep_value_2 = 0.0;  ///< contour column (eta_r dB); 0 elsewhere
  std::string scheme;
  double rate_lower = 0.0;
  double rate_upper = 0.0;
  double tau_star = 0.5;
  double zeta = 0.5;
  bool converged = true;
  double wall_time = 0.0;  ///< seconds
};

/// Runs every (sweep value, trial, scheme). Records are ordered by sweep
/// value, then trial, then scheme, whatever the worker count.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg);

struct CsvOptions {
  /// Timing differs between runs, so it is left out unless asked for.
  bool include_wall_time = false;
};

void emit_csv(const std::vector<TrialRecord>& records, const std::string& path,
              const CsvOptions& opts = {});
void write_csv(const std::vector<TrialRecord>& records, std::ostream& out,
               const CsvOptions& opts = {});
/// Reads the record rows written by emit_csv (summary rows are skipped).
std::vector<TrialRecord> parse_csv(const std::string& path);

struct SummaryRow {
  double sweep_value = 0.0;
  double sweep_value_2 = 0.0;
  std::string scheme;
  int count = 0;
  double mean_lower = 0.0;
  double std_lower = 0.0;
  double mean_upper = 0.0;
  double std_upper = 0.0;
};

/// Mean and sample standard deviation per (sweep value, scheme), in first
/// appearance order.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

struct ContourGrid {
  std::vector<double> rho_r_db;
  std::vector<double> eta_r_db;
  std::string scheme;
  std::vector<std::vector<double>> mean_rate;  ///< [rho index][eta index]
};

/// Mean rates over the (rho_r, eta_r) axes of `cfg`: optimized lower bounds
/// of the first scheme for kContour, approx_rate for kApproxContour.
ContourGrid contour_grid(const ExperimentConfig& cfg);
/// Same, from records already produced by run_experiment.
ContourGrid contour_from_records(const ExperimentConfig& cfg,
                                 const std::vector<TrialRecord>& records);
void emit_contour_csv(const ContourGrid& grid, const std::string& path);

/// JSON sidecar with the resolved configuration, seed and timing.
void write_metadata(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records,
                    double elapsed_seconds, const std::string& path);

}  // namespace fdrelay
