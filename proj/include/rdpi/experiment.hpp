#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rdpi/analysis.hpp"
#include "rdpi/scenario_io.hpp"
#include "rdpi/simulate.hpp"
#include "rdpi/synthesis.hpp"

namespace rdpi {

struct EmitOptions {
  bool trace = true;
  bool field = false;          // field_y.csv on a uniform x-grid
  double field_interval = 1.0;  // time between field snapshots
  int field_points = 51;
  bool plot = true;  // plot.py reading the CSVs
};

/// Everything extracted from one completed (or diverged) run.
struct RunSummary {
  std::string label;
  std::optional<double> h;  // the swept plant delay, if any
  bool diverged = false;
  double divergence_time = 0.0;
  RegulationReport regulation;
  std::optional<DecayFit> decay;
  double recovery = 0.0;  // after the last perturbation segment starts
  double recovery_from = 0.0;
  double state_norm_0 = 0.0;
  double state_norm_end = 0.0;
};

/// Decay fit of state_norm when it is meaningful: from t = 0.5 until the
/// norm first drops below 1e-10 or the horizon ends.
std::optional<DecayFit> fit_state_decay(const Trajectory& traj);

/// Regulation metrics, decay fit and recovery for a filled trajectory.
RunSummary summarize(const Trajectory& traj);

/// Deterministic text: eigenvalues, N with its threshold, alpha with its
/// tail bound, K, closed-loop spectrum and Kalman rank.
std::string design_report(const Design& design, const PlantParams& plant);

/// 12-significant-digit decimal, the format of every CSV number.
std::string format_number(double v);

void write_trace_csv(const std::filesystem::path& file, const Trajectory& traj);
void write_field_csv(const std::filesystem::path& file, const Trajectory& traj,
                     const SpectralBasis& basis, const EmitOptions& emit);
void write_report_json(const std::filesystem::path& file,
                       const RunSummary& summary, const Design& design);
void write_plot_script(const std::filesystem::path& dir, bool sweep,
                       const std::vector<std::string>& run_dirs,
                       bool with_field);

/// Runs one scenario and writes its artifacts into `dir`. Divergence is
/// rethrown after report.json records it.
RunSummary run_single(const Scenario& scn, const std::filesystem::path& dir,
                      const EmitOptions& emit);

/// Runs each swept delay concurrently into dir/h_<value>/ and writes
/// summary.csv and summary.json. Diverged runs are recorded, not thrown.
std::vector<RunSummary> run_sweep(const Experiment& ex,
                                  const std::filesystem::path& dir,
                                  const EmitOptions& emit);

/// Sweep when the experiment has one, single run otherwise. Writes
/// scenario.yaml (the resolved configuration) next to the outputs.
std::vector<RunSummary> run_experiment(const Experiment& ex,
                                       const std::filesystem::path& dir,
                                       const EmitOptions& emit);

}  // namespace rdpi
