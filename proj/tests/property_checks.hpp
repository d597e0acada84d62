// Measurements shared by the property suite and the acceptance binary. Each
// returns the measured quantity; the callers own the tolerances.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "rdpi/analysis.hpp"
#include "rdpi/experiment.hpp"
#include "rdpi/scenario_io.hpp"
#include "rdpi/simulate.hpp"
#include "rdpi/synthesis.hpp"

namespace checks {

using namespace rdpi;
using std::numbers::pi;

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline Signal cosine(double amplitude, double omega) {
  return Signal({Segment{0.0, {Sinusoid{0.0, amplitude, omega, pi / 2}}}});
}

inline double max_gap(const Trajectory& a, const Trajectory& b) {
  double gap = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    gap = std::max(gap, (a.state(i) - b.state(i)).cwiseAbs().maxCoeff());
  }
  return a.size() == b.size() ? gap : INFINITY;
}

inline double max_abs(const Trajectory& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, a.state(i).cwiseAbs().maxCoeff());
  return m;
}

// ---------------------------------------------------------------------------
// Spectral

/// max |<e_i, e_j> - delta_ij| over the first `modes`, by composite Simpson.
inline double orthonormality_error(const PlantParams& plant, int modes) {
  const SpectralBasis basis(plant, modes);
  double worst = 0.0;
  for (int i = 0; i < modes; ++i) {
    for (int j = i; j < modes; ++j) {
      const double g = oracle::simpson(
          [&](double x) { return basis.eigenfunction(i, x) * basis.eigenfunction(j, x); },
          0.0, 1.0);
      worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

struct RootSweep {
  double max_residual = 0.0;
  bool bracketed = true;
};

inline RootSweep root_sweep(int n_max) {
  RootSweep out;
  for (double theta : {pi / 6, pi / 4, pi / 3, 4 * pi / 10}) {
    for (int n = 0; n <= n_max; ++n) {
      const double r = find_root_rn(n, theta);
      out.bracketed = out.bracketed && r > n * pi && r < (n + 1) * pi;
      out.max_residual = std::max(out.max_residual, root_residual(r, theta));
    }
  }
  return out;
}

/// max |a_n + lambda_n b_n - a e_n'(0)| / |a e_n'(0)| for n < modes.
inline double identity_error(const PlantParams& plant, int modes) {
  double worst = 0.0;
  for (int n = 0; n < modes; ++n) {
    const ModeData m = compute_mode(plant, n);
    const double rhs = plant.a * m.ed0;
    worst = std::max(worst, std::abs(m.input_gain() - rhs) / std::abs(rhs));
  }
  return worst;
}

/// Closed-form a_n, b_n against composite-Simpson projections of the lift.
inline double projection_error(const PlantParams& plant, int modes) {
  double worst = 0.0;
  for (int n = 0; n < modes; ++n) {
    const ModeData m = compute_mode(plant, n);
    auto e = [&](double x) { return m.kappa * std::sin(m.r * x); };
    const double b = -oracle::simpson([&](double x) { return (1 - x) * (1 - x) * e(x); }, 0, 1);
    // a_n = <2a + (b + c)(1 - x)^2, e_n>, the operator applied to the lift.
    const double a = oracle::simpson(
        [&](double x) { return (2 * plant.a + (plant.b + plant.c) * (1 - x) * (1 - x)) * e(x); },
        0, 1);
    worst = std::max({worst, std::abs(b - m.b_n), std::abs(a - m.a_n)});
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Synthesis

struct PlacementSweep {
  int trials = 0;
  int failures = 0;
  double worst = 0.0;
};

/// Random controllable single-input systems of dimension 1..5 with distinct,
/// conjugate-closed targets. The achieved spectrum is measured by Eigen's
/// Schur-based solver, independently of the library's own verification.
inline PlacementSweep random_placements(int trials, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> re(-5.0, -0.5), im(0.3, 2.0);
  PlacementSweep out;
  for (int t = 0; t < trials; ++t) {
    const int n = 1 + t % 5;
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd B(n);
    for (int i = 0; i < n; ++i) {
      B(i) = g(rng);
      for (int j = 0; j < n; ++j) A(i, j) = g(rng);
    }
    std::vector<Complex> poles;
    while (static_cast<int>(poles.size()) < n) {
      if (n - static_cast<int>(poles.size()) >= 2 && rng() % 2) {
        const double x = re(rng), y = im(rng);
        poles.push_back({x, y});
        poles.push_back({x, -y});
      } else {
        poles.push_back({re(rng), 0.0});
      }
      for (std::size_t i = 0; i < poles.size(); ++i)
        for (std::size_t j = i + 1; j < poles.size(); ++j)
          if (std::abs(poles[i] - poles[j]) < 0.2) poles.clear();
    }
    ++out.trials;
    try {
      const Placement<double> pl = place_poles(A, B, poles);
      Eigen::EigenSolver<Eigen::MatrixXd> es(A + B * pl.gain, false);
      std::vector<Complex> eig(es.eigenvalues().begin(), es.eigenvalues().end());
      const double res = matched_residual<double>(eig, poles);
      out.worst = std::max(out.worst, res);
      if (!(res < 1e-6)) ++out.failures;
    } catch (const Error&) {
      ++out.failures;
    }
  }
  return out;
}

inline Design reference_design(int modes = 40) {
  const Scenario s = parse_scenario(preset_text("fig1"));
  return synthesize(s.plant, modes, s.design);
}

// ---------------------------------------------------------------------------
// Simulation

/// Starts the reference loop at its equilibrium for r = 5, p = p_e under the
/// time-varying delay and returns max ||Y(t) - Y_e|| over `t_end`.
inline double equilibrium_drift(double t_end, double p_e = 2.0) {
  Scenario s = parse_scenario(preset_text("fig1"));
  s.sim_modes = 40;
  s.t_end = t_end;
  s.reference = Signal(5.0);
  s.perturbation = Signal(p_e);
  const Design d = synthesize(s.plant, s.sim_modes, s.design);
  const Equilibrium eq = compute_equilibrium(d.model, d.basis, 5.0, p_e);
  const int N = d.model.base.N;
  s.phi.terms.clear();
  s.phi.terms.push_back(
      {Signal(1.0), ModalProfile{{eq.x_ne.data(), eq.x_ne.data() + eq.x_ne.size()}}});
  s.zeta0.mode = ZetaInit::Mode::Explicit;
  s.zeta0.profile = Signal(eq.Y_ae(N + 1));
  const Trajectory tr = run(s, d);
  Eigen::VectorXd target(eq.x_ne.size() + 1);
  target << eq.x_ne, eq.Y_ae(N + 1);
  double drift = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    drift = std::max(drift, (tr.state(i) - target).norm());
  }
  return drift;
}

/// Small scenario with every input channel active, scaled by `k`. Parts can
/// be switched off to build superposition pairs.
struct Channels {
  bool phi = true, zeta = true, r = true, p = true;
};

inline Scenario linear_scenario(double k, Channels on = {}) {
  Scenario s;
  s.sim_modes = 8;
  s.design.poles = {{-4, 0}, {-5, 0}, {-6, 0}};
  s.h = SinusoidalDelay{1.0, 0.4, 3.0, 0.2};
  s.h_hat = s.h;
  s.t_end = 4.0;
  s.dt = 1e-3;
  s.store_stride = 50;
  s.reference = on.r ? Signal({Segment{0.0, {Smoothstep{0.0, 2.0 * k, 2.0}}}}) : Signal(0.0);
  s.perturbation = on.p ? Signal({Segment{0.0, {Sinusoid{0.7 * k, 0.5 * k, 2.0, 0.1}}}})
                        : Signal(0.0);
  if (on.phi) s.phi.terms.push_back({cosine(1.5 * k, 3 * pi), PolynomialProfile{{0, 1, -2, 1}}});
  s.zeta0.mode = ZetaInit::Mode::Explicit;
  s.zeta0.profile = on.zeta ? cosine(-0.8 * k, 2.0) : Signal(0.0);
  return s;
}

struct Linearity {
  double scaling = 0.0;       // max |run(k X) - k run(X)| / max |k run(X)|
  double superposition = 0.0; // same for run(A + B) - run(A) - run(B)
};

inline Linearity linearity() {
  const Scenario base = linear_scenario(1.0);
  const Design d = synthesize(base.plant, base.sim_modes, base.design);
  const double k = -3.0;
  const Trajectory one = run(base, d);
  const Trajectory scaled = run(linear_scenario(k), d);
  Linearity out;
  double gap = 0.0;
  for (std::size_t i = 0; i < one.size(); ++i)
    gap = std::max(gap, (scaled.state(i) - k * one.state(i)).cwiseAbs().maxCoeff());
  out.scaling = gap / (std::abs(k) * max_abs(one));

  const Trajectory a = run(linear_scenario(1.0, {true, false, true, false}), d);
  const Trajectory b = run(linear_scenario(1.0, {false, true, false, true}), d);
  gap = 0.0;
  for (std::size_t i = 0; i < one.size(); ++i)
    gap = std::max(gap, (one.state(i) - a.state(i) - b.state(i)).cwiseAbs().maxCoeff());
  out.superposition = gap / max_abs(one);
  return out;
}

/// Observed order from the endpoint state at dt and dt/2 against dt/16, on a
/// constant-delay scenario with smooth data.
inline double convergence_order() {
  Scenario s = linear_scenario(1.0);
  s.h = ConstantDelay{1.0};
  s.h_hat = s.h;
  s.t_end = 3.0;
  const Design d = synthesize(s.plant, s.sim_modes, s.design);
  auto end_state = [&](double dt) {
    Scenario c = s;
    c.dt = dt;
    c.store_stride = 1000000;
    const Trajectory t = run(c, d);
    return t.state(t.size() - 1);
  };
  const Eigen::VectorXd ref = end_state(2e-3 / 16);
  const double e1 = (end_state(2e-3) - ref).norm();
  const double e2 = (end_state(1e-3) - ref).norm();
  return std::log2(e1 / e2);
}

/// The fig1-size scenario used against the explicit Euler oracle.
inline Scenario euler_scenario() {
  Scenario s;
  s.sim_modes = 5;
  s.design.poles = {{-4, 0}, {-5, 0}, {-6, 0}};
  s.h = ConstantDelay{1.0};
  s.h_hat = s.h;
  s.t_end = 5.0;
  s.dt = 1e-3;
  s.store_stride = 100;
  s.reference = Signal(1.0);
  s.perturbation = Signal(0.5);
  s.phi.terms.push_back({cosine(1.0, 3 * pi), PolynomialProfile{{0, 1, -2, 1}}});
  s.zeta0.profile = cosine(1.0, 3 * pi);
  return s;
}

/// Max-norm gap between the production run at dt = 1e-3 and explicit Euler
/// at dt = 1e-5 on the stored samples of [0, 5].
inline double euler_gap() {
  const Scenario s = euler_scenario();
  const Design d = synthesize(s.plant, s.sim_modes, s.design);
  const Trajectory traj = run(s, d);
  const auto ref = oracle::euler_loop(
      make_loop_model(d), 1.0, [&](double t) { return s.reference(t); },
      [&](double t) { return s.perturbation(t); }, make_history_seed(s, d), 1e-5, s.t_end,
      traj.times);
  if (ref.size() != traj.size()) return INFINITY;
  double gap = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i)
    gap = std::max(gap, (traj.state(i) - ref[i]).cwiseAbs().maxCoeff());
  return gap;
}

// ---------------------------------------------------------------------------
// Analysis

struct Decay {
  double kappa_hat = 0.0;
  double ratio = 0.0;  // ||Y(10)|| / ||Y(0)|| over the full state (x, zeta)
  double ratio_split = 0.0;  // (||X(10)|| + |zeta(10)|) / same at 0
};

/// Reference design with r = p = 0 from the preset's initial data.
inline Decay stabilization_decay() {
  Scenario s = parse_scenario(preset_text("stabilization_only"));
  s.t_end = 10.0;
  const Trajectory tr = run(s);
  std::vector<double> norms(tr.size()), split(tr.size());
  const int M = static_cast<int>(tr.modal.cols());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const Eigen::VectorXd y = tr.state(i);
    norms[i] = y.norm();
    split[i] = y.head(M).norm() + std::abs(y(M));
  }
  Decay out;
  out.kappa_hat = fit_decay_rate(tr.times, norms, 0.5, 10.0).kappa_hat;
  out.ratio = norms.back() / norms.front();
  out.ratio_split = split.back() / split.front();
  return out;
}

/// Relative gap between ||X|| and the L2 norm of the reconstructed field on
/// a 2001-point grid, for u = 0 and x_n = 1 / (n + 1)^2.
inline double parseval_gap(int modes = 40) {
  const SpectralBasis basis(PlantParams{}, modes);
  Eigen::VectorXd x(modes);
  for (int n = 0; n < modes; ++n) x(n) = 1.0 / ((n + 1.0) * (n + 1.0));
  std::vector<double> grid(2001);
  for (int i = 0; i <= 2000; ++i) grid[i] = i / 2000.0;
  const auto y = field_on_grid(x, basis, 0.0, grid);
  double sum = 0.0;  // composite Simpson on the grid
  for (int i = 0; i <= 2000; ++i) {
    const double w = (i == 0 || i == 2000) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * y[i] * y[i];
  }
  const double l2 = std::sqrt(sum / (3.0 * 2000.0));
  return std::abs(l2 - x.norm()) / x.norm();
}

/// |y(1) at 40 modes - y(1) at 80 modes| on the reference steady state.
inline double trace_mode_gap() {
  const Design d = reference_design(80);
  const Equilibrium eq = compute_equilibrium(d.model, d.basis, 5.0, 2.0);
  const SpectralBasis small(d.basis.params(), 40);
  const double t40 = boundary_trace(Eigen::VectorXd(eq.x_ne.head(40)), small, eq.u_e);
  const double t80 = boundary_trace(eq.x_ne, d.basis, eq.u_e);
  return std::abs(t40 - t80);
}

}  // namespace checks
