#include "rdpi/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rdpi {

namespace {

constexpr double kPlacementTolerance = 1e-6;

double mode_threshold(double c) { return -2.0 * std::sqrt(5.0) * std::abs(c); }

}  // namespace

Eigen::MatrixXd AugmentedModel::closed_loop() const {
  if (!K) throw ValidationError("augmented model has no feedback gain");
  return A_a + B_a * (*K);
}

int select_mode_count(const SpectralBasis& basis, double c) {
  const double threshold = mode_threshold(c);
  for (int n = 1; n < basis.size(); ++n) {
    if (basis.mode(n).lambda < threshold) return n - 1;
  }
  throw ValidationError(
      "select_mode_count: basis too short to reach lambda < -2 sqrt(5)|c|");
}

TruncatedModel assemble_truncated(const SpectralBasis& basis, int N) {
  if (N < 0 || N + 1 > basis.size()) {
    throw ValidationError("assemble_truncated: N + 1 exceeds available modes");
  }
  TruncatedModel m;
  m.N = N;
  m.A = Eigen::MatrixXd::Zero(N + 1, N + 1);
  m.B.resize(N + 1);
  m.C.resize(N + 1);
  for (int n = 0; n <= N; ++n) {
    const ModeData& md = basis.mode(n);
    m.A(n, n) = md.lambda;
    m.B(n) = md.input_gain();
    m.C(n) = md.e1;
  }
  return m;
}

AugmentedModel assemble_augmented(const TruncatedModel& model, double alpha) {
  const int n = model.N + 1;
  AugmentedModel aug;
  aug.base = model;
  aug.alpha = alpha;
  aug.A_a = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.A_a.topLeftCorner(n, n) = model.A;
  aug.A_a.bottomLeftCorner(1, n) = model.C;
  aug.B_a.resize(n + 1);
  aug.B_a.head(n) = model.B;
  aug.B_a(n) = alpha;
  return aug;
}

int kalman_check(const Eigen::MatrixXd& A_a, const Eigen::VectorXd& B_a) {
  return kalman_rank(A_a, B_a);
}

double verify_spectrum(const Eigen::MatrixXd& M,
                       std::span<const Complex> expected) {
  return rdpi::verify_spectrum<Eigen::MatrixXd>(M, expected);
}

Placement<double> place_poles(const Eigen::MatrixXd& A_a,
                              const Eigen::VectorXd& B_a,
                              std::span<const Complex> poles) {
  if (static_cast<Eigen::Index>(poles.size()) != A_a.rows()) {
    throw ValidationError("place_poles: need exactly one pole per state");
  }
  for (std::size_t i = 0; i < poles.size(); ++i) {
    for (std::size_t j = i + 1; j < poles.size(); ++j) {
      if (std::abs(poles[i] - poles[j]) < 1e-9) {
        throw ValidationError("place_poles: poles must be distinct");
      }
    }
    const bool has_conjugate = std::any_of(
        poles.begin(), poles.end(),
        [&](const Complex& q) { return std::abs(q - std::conj(poles[i])) < 1e-9; });
    if (!has_conjugate) {
      throw ValidationError("place_poles: poles not closed under conjugation");
    }
  }
  Placement<double> out =
      ackermann(A_a, B_a, polynomial_from_roots(poles));
  const Eigen::MatrixXd closed = A_a + B_a * out.gain;
  const double residual = verify_spectrum(closed, poles);
  if (!(residual < kPlacementTolerance)) {
    std::ostringstream msg;
    msg << "place_poles: closed-loop spectrum off by " << residual;
    throw SolverError(msg.str());
  }
  return out;
}

std::vector<Complex> default_poles(const TruncatedModel& model, double c) {
  const double start =
      std::min(-3.0 * std::abs(c) - 1.0, model.A(model.N, model.N) - 1.0);
  std::vector<Complex> poles;
  for (int k = 0; k < model.N + 2; ++k) poles.emplace_back(start - k, 0.0);
  return poles;
}

void check_pole_gate(std::span<const Complex> poles, double c) {
  const double margin = -3.0 * std::abs(c);
  for (const Complex& p : poles) {
    if (!(p.real() < margin)) {
      std::ostringstream msg;
      msg << "pole " << p.real() << (p.imag() >= 0 ? "+" : "") << p.imag()
          << "i violates Re mu < -3|c| = " << margin;
      throw DesignGateError(msg.str());
    }
  }
}

AugmentedModel with_gain(AugmentedModel model, std::span<const Complex> poles,
                         double c) {
  check_pole_gate(poles, c);
  const int rank = kalman_check(model.A_a, model.B_a);
  if (rank < model.dimension()) {
    throw DesignGateError("augmented pair fails the Kalman rank test (rank " +
                          std::to_string(rank) + ")");
  }
  Placement<double> placed = place_poles(model.A_a, model.B_a, poles);
  model.K = placed.gain;
  model.poles.assign(poles.begin(), poles.end());
  model.controllability_condition = placed.controllability_condition;
  model.warning = placed.warning;
  model.spectrum_residual = verify_spectrum(model.closed_loop(), poles);
  return model;
}

Equilibrium compute_equilibrium(const AugmentedModel& aug,
                                const SpectralBasis& basis, double r_e,
                                double p_e) {
  if (!aug.K) throw ValidationError("compute_equilibrium: gain not placed");
  const int dim = aug.dimension();
  const int N = aug.base.N;
  if (basis.size() < N + 1) {
    throw ValidationError("compute_equilibrium: basis shorter than design");
  }
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(dim);
  gamma(dim - 1) = -r_e;

  const Eigen::MatrixXd a_k = aug.closed_loop();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a_k);
  if (!lu.isInvertible()) {
    throw SolverError("compute_equilibrium: closed-loop matrix is singular");
  }
  Equilibrium eq;
  eq.r_e = r_e;
  eq.p_e = p_e;
  eq.Y_ae = -lu.solve(aug.B_a * p_e + gamma);
  eq.u_e = (*aug.K).dot(eq.Y_ae) + p_e;
  eq.stationarity_residual =
      (aug.A_a * eq.Y_ae + aug.B_a * eq.u_e + gamma).cwiseAbs().maxCoeff();

  eq.x_ne.resize(basis.size());
  double trace = 0.0;
  for (int n = 0; n < basis.size(); ++n) {
    const ModeData& m = basis.mode(n);
    eq.x_ne(n) = n <= N ? eq.Y_ae(n) : -m.input_gain() / m.lambda * eq.u_e;
    trace += (eq.x_ne(n) + m.b_n * eq.u_e) * m.e1;
  }
  eq.trace_e = trace - eq.u_e * basis.unresolved_trace_gain();
  return eq;
}

Design synthesize(const PlantParams& params, int sim_modes,
                  const DesignOptions& options) {
  params.validate();
  if (sim_modes < 1) throw ValidationError("simulation mode count must be >= 1");
  const double threshold = mode_threshold(params.c);

  int N = 0;
  if (options.N) {
    N = *options.N;
    if (N < 0) throw ValidationError("design order N must be >= 0");
    const double next = compute_mode(params, N + 1).lambda;
    if (!(next < threshold)) {
      std::ostringstream msg;
      msg << "lambda_" << N + 1 << " = " << next
          << " violates lambda_{N+1} < -2 sqrt(5)|c| = " << threshold;
      throw DesignGateError(msg.str());
    }
  } else {
    int n = 1;
    while (!(compute_mode(params, n).lambda < threshold)) {
      if (++n > 100000) throw SolverError("mode-count search ran away");
    }
    N = n - 1;
  }
  if (sim_modes < N + 1) {
    throw ValidationError("simulation mode count " + std::to_string(sim_modes) +
                          " below design order N + 1 = " +
                          std::to_string(N + 1));
  }

  SpectralBasis basis(params, sim_modes);
  const TruncatedModel truncated = assemble_truncated(basis, N);
  const SeriesValue alpha = compute_alpha(basis, N, options.alpha_tail_depth);
  AugmentedModel aug = assemble_augmented(truncated, alpha.value);
  aug.alpha_remainder = alpha.remainder;

  const std::vector<Complex> poles =
      options.poles.empty() ? default_poles(truncated, params.c) : options.poles;
  const int rank = kalman_check(aug.A_a, aug.B_a);
  aug = with_gain(std::move(aug), poles, params.c);
  return Design{std::move(basis), std::move(aug), rank, threshold};
}

}  // namespace rdpi
