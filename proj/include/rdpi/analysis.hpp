#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rdpi/signals.hpp"
#include "rdpi/simulate.hpp"
#include "rdpi/spectral.hpp"

namespace rdpi {

/// Whether the boundary trace accounts for the modes the state does not
/// carry. They are slaved quasi-statically to u: w_n = -(a_n / lambda_n) u.
enum class TraceTail { QuasiStatic, Truncated };

/// y(t, 1) = sum_n (x_n + b_n u) e_n(1) over the modes in `modal`, plus the
/// quasi-static contribution of the remaining modes unless disabled.
double boundary_trace(std::span<const double> modal, const SpectralBasis& basis,
                      double u, TraceTail tail = TraceTail::QuasiStatic);

inline double boundary_trace(const Eigen::VectorXd& modal,
                             const SpectralBasis& basis, double u,
                             TraceTail tail = TraceTail::QuasiStatic) {
  return boundary_trace(std::span<const double>(modal.data(), modal.size()),
                        basis, u, tail);
}

/// y(t, x) on the grid: the w-series plus the lift (1 - x)^2 u.
std::vector<double> field_on_grid(const Eigen::VectorXd& modal,
                                  const SpectralBasis& basis, double u,
                                  std::span<const double> grid);

/// sqrt(sum x_n^2).
inline double modal_norm(const Eigen::VectorXd& modal) { return modal.norm(); }

/// Fills traj.y1 from the stored modal state and input.
void fill_outputs(Trajectory& traj, const SpectralBasis& basis);

struct DecayFit {
  double kappa_hat = 0.0;  // minus the slope of log(norm) against time
  double intercept = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
  double residual = 0.0;  // RMS of the log-linear fit
  int samples = 0;
};

/// Least-squares slope of log(norm) on samples with window_start <= t <=
/// window_end. Needs at least 10 samples there, every norm > 1e-14.
DecayFit fit_decay_rate(std::span<const double> times,
                        std::span<const double> norms, double window_start,
                        double window_end);

struct RegulationReport {
  double final_error = 0.0;  // |y1 - r| at the last sample
  double settle_time = 0.0;  // valid only when settled
  bool settled = false;
  double band = 0.0;  // absolute 2% band used for settling
  double max_overshoot = 0.0;
  // Last 10% of the horizon.
  double window_start = 0.0;
  double window_max_error = 0.0;
  double window_mean_error = 0.0;
  double window_rms_error = 0.0;
};

/// Regulation diagnostics of y1 against r. The settle band is 2% of the
/// overall reference change |r(end) - r(0)|, or of the peak |y1| when the
/// reference is flat.
RegulationReport regulation_metrics(std::span<const double> times,
                                    std::span<const double> y1,
                                    std::span<const double> r);

RegulationReport regulation_metrics(const Trajectory& traj);

/// Latest time at which |y1 - r| exceeded `tolerance` within [from, end],
/// or `from` when it never did. Returns +inf when the last sample is outside.
double recovery_time(const Trajectory& traj, double from, double tolerance);

}  // namespace rdpi
