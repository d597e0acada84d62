#include "rdpi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rdpi {

double boundary_trace(std::span<const double> modal, const SpectralBasis& basis,
                      double u, TraceTail tail) {
  const int M = static_cast<int>(modal.size());
  if (M > basis.size()) {
    throw ValidationError("boundary_trace: more modes than the basis holds");
  }
  double sum = 0.0;
  for (int n = 0; n < M; ++n) {
    const ModeData& m = basis.mode(n);
    sum += (modal[n] + m.b_n * u) * m.e1;
  }
  if (tail == TraceTail::QuasiStatic) {
    // Modes M..size() - 1 of the basis plus everything beyond it.
    double unresolved = basis.unresolved_trace_gain();
    for (int n = M; n < basis.size(); ++n) {
      const ModeData& m = basis.mode(n);
      unresolved += m.a_n / m.lambda * m.e1;
    }
    sum -= u * unresolved;
  }
  return sum;
}

std::vector<double> field_on_grid(const Eigen::VectorXd& modal,
                                  const SpectralBasis& basis, double u,
                                  std::span<const double> grid) {
  if (modal.size() > basis.size()) {
    throw ValidationError("field_on_grid: more modes than the basis holds");
  }
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) {
    if (x < 0.0 || x > 1.0) throw ValidationError("field grid outside [0, 1]");
    double v = (1.0 - x) * (1.0 - x) * u;
    for (Eigen::Index n = 0; n < modal.size(); ++n) {
      const ModeData& m = basis.mode(static_cast<int>(n));
      v += (modal(n) + m.b_n * u) * m.kappa * std::sin(m.r * x);
    }
    out.push_back(v);
  }
  return out;
}

void fill_outputs(Trajectory& traj, const SpectralBasis& basis) {
  traj.y1.resize(traj.size());
  Eigen::VectorXd row;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    row = traj.modal.row(static_cast<Eigen::Index>(i)).transpose();
    traj.y1[i] = boundary_trace(row, basis, traj.u[i]);
  }
}

DecayFit fit_decay_rate(std::span<const double> times,
                        std::span<const double> norms, double window_start,
                        double window_end) {
  if (times.size() != norms.size()) {
    throw ValidationError("fit_decay_rate: size mismatch");
  }
  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < window_start || times[i] > window_end) continue;
    if (!(norms[i] > 1e-14)) {
      throw ValidationError("fit_decay_rate: norm at or below 1e-14 in window");
    }
    ts.push_back(times[i]);
    ls.push_back(std::log(norms[i]));
  }
  if (ts.size() < 10) {
    throw ValidationError("fit_decay_rate: fewer than 10 samples in window");
  }
  const double n = static_cast<double>(ts.size());
  double mt = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    ml += ls[i];
  }
  mt /= n;
  ml /= n;
  double stt = 0.0, stl = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    stl += (ts[i] - mt) * (ls[i] - ml);
  }
  if (!(stt > 0.0)) throw ValidationError("fit_decay_rate: degenerate window");
  const double slope = stl / stt;
  DecayFit fit;
  fit.kappa_hat = -slope;
  fit.intercept = ml - slope * mt;
  fit.window_start = ts.front();
  fit.window_end = ts.back();
  fit.samples = static_cast<int>(ts.size());
  double ss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double e = ls[i] - (fit.intercept + slope * ts[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

RegulationReport regulation_metrics(std::span<const double> times,
                                    std::span<const double> y1,
                                    std::span<const double> r) {
  if (times.empty() || times.size() != y1.size() || times.size() != r.size()) {
    throw ValidationError("regulation_metrics: empty or mismatched series");
  }
  const std::size_t last = times.size() - 1;
  RegulationReport rep;
  rep.final_error = std::abs(y1[last] - r[last]);

  const double step = r[last] - r[0];
  double scale = std::abs(step);
  if (scale == 0.0) {
    for (double v : y1) scale = std::max(scale, std::abs(v));
  }
  rep.band = 0.02 * scale;

  // Earliest time after which the error stays inside the band.
  std::size_t first_inside = times.size();
  for (std::size_t i = times.size(); i-- > 0;) {
    if (std::abs(y1[i] - r[i]) > rep.band) break;
    first_inside = i;
  }
  rep.settled = first_inside < times.size();
  rep.settle_time = rep.settled ? times[first_inside] : times[last];

  const double direction = step >= 0.0 ? 1.0 : -1.0;
  for (double v : y1) {
    rep.max_overshoot = std::max(rep.max_overshoot, direction * (v - r[last]));
  }

  rep.window_start = times[last] - 0.1 * (times[last] - times[0]);
  double sum = 0.0, sq = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < rep.window_start) continue;
    const double e = std::abs(y1[i] - r[i]);
    rep.window_max_error = std::max(rep.window_max_error, e);
    sum += e;
    sq += e * e;
    ++count;
  }
  rep.window_mean_error = sum / count;
  rep.window_rms_error = std::sqrt(sq / count);
  return rep;
}

RegulationReport regulation_metrics(const Trajectory& traj) {
  if (traj.y1.size() != traj.size()) {
    throw ValidationError("regulation_metrics: boundary trace not filled");
  }
  return regulation_metrics(traj.times, traj.y1, traj.r);
}

double recovery_time(const Trajectory& traj, double from, double tolerance) {
  if (traj.y1.size() != traj.size()) {
    throw ValidationError("recovery_time: boundary trace not filled");
  }
  double latest = from;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.times[i] < from) continue;
    if (std::abs(traj.y1[i] - traj.r[i]) > tolerance) latest = traj.times[i];
  }
  if (!traj.times.empty() && latest == traj.times.back() &&
      std::abs(traj.y1.back() - traj.r.back()) > tolerance) {
    return std::numeric_limits<double>::infinity();
  }
  return latest;
}

}  // namespace rdpi
