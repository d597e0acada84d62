#include "rdpi/simulate.hpp"

#include <cmath>
#include <sstream>

namespace rdpi {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// dt phi_1(z) and dt phi_2(z) with z = l dt, series near zero.
double etd_phi1(double l, double dt) {
  const double z = l * dt;
  if (std::abs(z) < 1e-5) return dt * (1.0 + z / 2.0 + z * z / 6.0);
  return std::expm1(z) / l;
}

double etd_phi2(double l, double dt) {
  const double z = l * dt;
  if (std::abs(z) < 1e-3) {
    return dt * (0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0 +
                 z * z * z * z / 720.0);
  }
  return dt * (std::expm1(z) - z) / (z * z);
}

int history_points(double h_max, double dt) {
  return static_cast<int>(std::ceil(h_max / dt - 1e-9));
}

double checked_delay(const DelaySignal& d, double t, double lo, double hi,
                     const char* name) {
  const double v = delay_signal_eval(d, t);
  if (!(v >= lo - 1e-12 && v <= hi + 1e-12)) {
    std::ostringstream msg;
    msg << name << "(" << t << ") = " << v << " leaves [" << lo << ", " << hi
        << "]";
    throw ValidationError(msg.str());
  }
  return v;
}

void check_delay_range(const DelaySignal& d, const PlantParams& p,
                       const char* name) {
  const auto [lo, hi] = delay_range(d);
  if (lo < p.h_min || hi > p.h_max) {
    std::ostringstream msg;
    msg << name << " ranges over [" << lo << ", " << hi
        << "], outside the delay bounds [" << p.h_min << ", " << p.h_max
        << "]";
    throw ValidationError(msg.str());
  }
}

Eigen::VectorXd spatial_coefficients(const SpatialProfile& profile,
                                     const SpectralBasis& basis, int modes) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(modes);
  std::visit(
      Overloaded{
          [&](const PolynomialProfile& poly) {
            auto f = [&](double x) {
              double v = 0.0;
              for (auto it = poly.coefficients.rbegin();
                   it != poly.coefficients.rend(); ++it) {
                v = v * x + *it;
              }
              return v;
            };
            for (int n = 0; n < modes; ++n) out(n) = inner_product(f, basis, n);
          },
          [&](const EigenmodeProfile& e) {
            if (e.index < 0) throw ValidationError("negative eigenmode index");
            if (e.index < modes) out(e.index) = 1.0;
          },
          [&](const ModalProfile& m) {
            const int k = std::min<int>(modes, m.coefficients.size());
            for (int n = 0; n < k; ++n) out(n) = m.coefficients[n];
          },
      },
      profile);
  return out;
}

double spatial_value(const SpatialProfile& profile, double x,
                     const SpectralBasis& basis) {
  return std::visit(
      Overloaded{
          [&](const PolynomialProfile& poly) {
            double v = 0.0;
            for (auto it = poly.coefficients.rbegin();
                 it != poly.coefficients.rend(); ++it) {
              v = v * x + *it;
            }
            return v;
          },
          [&](const EigenmodeProfile& e) {
            return basis.eigenfunction(e.index, x);
          },
          [&](const ModalProfile& m) {
            double v = 0.0;
            const int k = std::min<int>(basis.size(), m.coefficients.size());
            for (int n = 0; n < k; ++n) {
              v += m.coefficients[n] * basis.eigenfunction(n, x);
            }
            return v;
          },
      },
      profile);
}

}  // namespace

double InitialField::value(double tau, double x,
                           const SpectralBasis& basis) const {
  double v = 0.0;
  for (const Term& term : terms) {
    v += term.time(tau) * spatial_value(term.space, x, basis);
  }
  return v;
}

void Scenario::validate() const {
  plant.validate();
  if (sim_modes < 1) throw ValidationError("sim_modes must be >= 1");
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
  if (!(t_end > 0.0)) throw ValidationError("t_end must be > 0");
  if (!(dt < plant.h_min)) {
    throw ValidationError("dt must be smaller than the minimal delay h_min");
  }
  if (store_stride < 1) throw ValidationError("store_stride must be >= 1");
  if (design.alpha_tail_depth < 1) {
    throw ValidationError("alpha_tail_depth must be >= 1");
  }
  if (design.N && sim_modes < *design.N + 1) {
    throw ValidationError("sim_modes must be >= N + 1");
  }
  check_delay_range(h, plant, "h");
  check_delay_range(h_hat, plant, "h_hat");
}

Eigen::VectorXd Trajectory::state(std::size_t i) const {
  Eigen::VectorXd s(modal.cols() + 1);
  s.head(modal.cols()) = modal.row(static_cast<Eigen::Index>(i)).transpose();
  s(modal.cols()) = zeta[i];
  return s;
}

LoopModel make_loop_model(const Design& design) {
  const AugmentedModel& aug = design.model;
  if (!aug.K) throw ValidationError("design has no feedback gain");
  LoopModel m;
  m.lambda = design.basis.lambdas();
  m.gain = design.basis.input_gains();
  m.c = design.basis.params().c;
  m.N = aug.base.N;
  m.C = aug.base.C;
  m.alpha = aug.alpha;
  m.K = *aug.K;
  return m;
}

Trajectory integrate_loop(const LoopModel& model, const DelaySignal& h,
                          const DelaySignal& h_hat, ZetaDelay zeta_delay,
                          const Signal& reference, const Signal& perturbation,
                          const HistorySeed& seed,
                          const IntegratorOptions& opt) {
  const int M = model.modes();
  const int S = model.state_size();
  const int N = model.N;
  if (N + 1 > M || model.K.size() != N + 2 || model.C.size() != N + 1 ||
      model.gain.size() != M) {
    throw ValidationError("integrate_loop: inconsistent loop dimensions");
  }
  if (!(opt.dt > 0.0) || !(opt.t_end > 0.0) || opt.store_stride < 1) {
    throw ValidationError("integrate_loop: bad step, horizon or stride");
  }
  if (!(opt.dt < opt.h_min) || !(opt.h_min < opt.h_max)) {
    throw ValidationError("integrate_loop: need dt < h_min < h_max");
  }

  const double dt = opt.dt;
  const int lag_points = history_points(opt.h_max, dt);
  HistoryBuffer<double> history(S, lag_points + 8, opt.interp);
  for (int k = 0; k <= lag_points; ++k) {
    const double tau = (k - lag_points) * dt;
    const Eigen::VectorXd y0 = seed(tau);
    if (y0.size() != S) {
      throw ValidationError("history seed returned the wrong state size");
    }
    history.push(tau, y0);
  }

  Eigen::VectorXd diag(S);
  diag.head(M) = model.lambda.array() - model.c;
  diag(M) = -model.c;
  Eigen::VectorXd propagator(S), phi1(S), phi2(S);
  for (int i = 0; i < S; ++i) {
    propagator(i) = std::exp(diag(i) * dt);
    phi1(i) = etd_phi1(diag(i), dt);
    phi2(i) = etd_phi2(diag(i), dt);
  }

  const Eigen::RowVectorXd k_modal = model.K.head(N + 1);
  const double k_zeta = model.K(N + 1);
  auto control = [&](double t, const Eigen::VectorXd& y) {
    return k_modal.dot(y.head(N + 1)) + k_zeta * y(M) + perturbation(t);
  };

  Eigen::VectorXd delayed(S), delayed_hat(S);
  auto rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& out) {
    const double lag = checked_delay(h, t, opt.h_min, opt.h_max, "h");
    history.sample(t - lag, delayed);
    const double u = control(t, y);
    out.head(M) = model.c * delayed.head(M) + model.gain * u;
    double zeta_rate = model.c * delayed(M);
    if (zeta_delay == ZetaDelay::Estimate) {
      const double lag_hat =
          checked_delay(h_hat, t, opt.h_min, opt.h_max, "h_hat");
      history.sample(t - lag_hat, delayed_hat);
      zeta_rate += model.c * (delayed_hat(M) - delayed(M));
    }
    out(M) = zeta_rate + model.C.dot(y.head(N + 1)) + model.alpha * u -
             reference(t);
  };

  const long steps = static_cast<long>(std::ceil(opt.t_end / dt - 1e-9));
  const long samples = steps / opt.store_stride + 1 +
                       (steps % opt.store_stride != 0 ? 1 : 0);

  Trajectory traj;
  traj.times.reserve(samples);
  traj.modal.resize(samples, M);
  for (auto* v : {&traj.zeta, &traj.u, &traj.state_norm, &traj.r, &traj.p,
                  &traj.h, &traj.h_hat}) {
    v->reserve(samples);
  }

  Eigen::VectorXd y = history.sample(0.0);
  auto record = [&](double t) {
    const auto row = static_cast<Eigen::Index>(traj.times.size());
    traj.times.push_back(t);
    traj.modal.row(row) = y.head(M).transpose();
    traj.zeta.push_back(y(M));
    traj.u.push_back(control(t, y));
    traj.state_norm.push_back(y.head(M).norm());
    traj.r.push_back(reference(t));
    traj.p.push_back(perturbation(t));
    const double hv = delay_signal_eval(h, t);
    traj.h.push_back(hv);
    traj.h_hat.push_back(zeta_delay == ZetaDelay::Estimate
                             ? delay_signal_eval(h_hat, t)
                             : hv);
  };
  record(0.0);

  Eigen::VectorXd f0(S), f1(S), stage(S);
  for (long n = 0; n < steps; ++n) {
    const double t0 = static_cast<double>(n) * dt;
    const double t1 = static_cast<double>(n + 1) * dt;
    rhs(t0, y, f0);
    stage = propagator.cwiseProduct(y) + phi1.cwiseProduct(f0);
    rhs(t1, stage, f1);
    y = stage + phi2.cwiseProduct(f1 - f0);
    if (!y.allFinite()) {
      std::ostringstream msg;
      msg << "closed loop diverged: non-finite state at t = " << t1;
      throw DivergenceError(msg.str(), t1);
    }
    history.push(t1, y);
    if ((n + 1) % opt.store_stride == 0 || n + 1 == steps) record(t1);
  }
  return traj;
}

Eigen::MatrixXd project_initial(
    const std::function<double(double, double)>& phi,
    const SpectralBasis& basis, int modes, std::span<const double> taus) {
  if (modes > basis.size()) {
    throw ValidationError("project_initial: more modes than the basis holds");
  }
  Eigen::MatrixXd out(modes, static_cast<Eigen::Index>(taus.size()));
  for (std::size_t j = 0; j < taus.size(); ++j) {
    const double tau = taus[j];
    for (int n = 0; n < modes; ++n) {
      out(n, static_cast<Eigen::Index>(j)) = inner_product(
          [&](double x) { return phi(tau, x); }, basis, n);
    }
  }
  return out;
}

Eigen::MatrixXd project_initial(const InitialField& phi,
                                const SpectralBasis& basis, int modes,
                                std::span<const double> taus) {
  if (modes > basis.size()) {
    throw ValidationError("project_initial: more modes than the basis holds");
  }
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(modes, static_cast<Eigen::Index>(taus.size()));
  for (const InitialField::Term& term : phi.terms) {
    const Eigen::VectorXd coeffs =
        spatial_coefficients(term.space, basis, modes);
    for (std::size_t j = 0; j < taus.size(); ++j) {
      out.col(static_cast<Eigen::Index>(j)) += term.time(taus[j]) * coeffs;
    }
  }
  return out;
}

double compat_zeta0(const Eigen::RowVectorXd& K,
                    const Eigen::VectorXd& modal0, double p0, double phi00) {
  const Eigen::Index n = K.size() - 1;
  if (n < 1 || modal0.size() < n) {
    throw ValidationError("compat_zeta0: inconsistent dimensions");
  }
  const double k_zeta = K(n);
  if (k_zeta == 0.0) {
    throw ValidationError(
        "compat_zeta0: integral gain is zero, closed loop cannot be Hurwitz");
  }
  return (phi00 - p0 - K.head(n).dot(modal0.head(n))) / k_zeta;
}

HistorySeed make_history_seed(const Scenario& scn, const Design& design) {
  const int M = design.basis.size();
  std::vector<std::pair<Signal, Eigen::VectorXd>> parts;
  parts.reserve(scn.phi.terms.size());
  for (const InitialField::Term& term : scn.phi.terms) {
    parts.emplace_back(term.time,
                       spatial_coefficients(term.space, design.basis, M));
  }
  auto modal = [parts](double tau) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(
        parts.empty() ? 0 : parts.front().second.size());
    for (const auto& [time, coeffs] : parts) x += time(tau) * coeffs;
    return x;
  };

  Signal zeta_profile = scn.zeta0.profile;
  double zeta_scale = 1.0;
  if (scn.zeta0.mode == ZetaInit::Mode::Auto) {
    Eigen::VectorXd x0 = modal(0.0);
    if (x0.size() == 0) x0 = Eigen::VectorXd::Zero(M);
    const double phi00 = scn.phi.value(0.0, 0.0, design.basis);
    const double zeta_at_0 = compat_zeta0(*design.model.K, x0,
                                          scn.perturbation(0.0), phi00);
    const double g0 = zeta_profile(0.0);
    if (g0 == 0.0) {
      throw ValidationError("zeta0 profile vanishes at 0, cannot scale it");
    }
    zeta_scale = zeta_at_0 / g0;
  }

  return [modal, M, zeta_profile, zeta_scale](double tau) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(M + 1);
    const Eigen::VectorXd x = modal(tau);
    if (x.size() > 0) y.head(M) = x;
    y(M) = zeta_scale * zeta_profile(tau);
    return y;
  };
}

Trajectory run(const Scenario& scn, const Design& design) {
  scn.validate();
  if (design.basis.size() != scn.sim_modes) {
    throw ValidationError("design basis size differs from sim_modes");
  }
  const LoopModel model = make_loop_model(design);
  IntegratorOptions opt;
  opt.dt = scn.dt;
  opt.t_end = scn.t_end;
  opt.store_stride = scn.store_stride;
  opt.interp = scn.interp;
  opt.h_min = scn.plant.h_min;
  opt.h_max = scn.plant.h_max;
  Trajectory traj =
      integrate_loop(model, scn.h, scn.h_hat, scn.zeta_delay, scn.reference,
                     scn.perturbation, make_history_seed(scn, design), opt);
  traj.scenario = scn;
  return traj;
}

Trajectory run(const Scenario& scn) {
  scn.validate();
  const Design design = synthesize(scn.plant, scn.sim_modes, scn.design);
  return run(scn, design);
}

}  // namespace rdpi
