#pragma once

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rdpi/history.hpp"
#include "rdpi/signals.hpp"
#include "rdpi/spectral.hpp"
#include "rdpi/synthesis.hpp"

namespace rdpi {

// ---------------------------------------------------------------------------
// Initial data on [-h_max, 0]

/// sum_k coefficients[k] x^k
struct PolynomialProfile {
  std::vector<double> coefficients;
};
/// e_n(x)
struct EigenmodeProfile {
  int index = 0;
};
/// Field given directly by its modal coefficients (missing modes are zero).
struct ModalProfile {
  std::vector<double> coefficients;
};
using SpatialProfile =
    std::variant<PolynomialProfile, EigenmodeProfile, ModalProfile>;

/// phi(tau, x) = sum_k time_k(tau) space_k(x)
struct InitialField {
  struct Term {
    Signal time;
    SpatialProfile space;
  };
  std::vector<Term> terms;

  /// phi(tau, x). ModalProfile terms are evaluated through `basis`.
  double value(double tau, double x, const SpectralBasis& basis) const;
};

/// zeta_0(tau) = profile(tau) zeta_a with zeta_a from the compatibility
/// condition, or an explicit signal.
struct ZetaInit {
  enum class Mode { Auto, Explicit };
  Mode mode = Mode::Auto;
  Signal profile;
};

/// Which delay drives the integral state's own delayed term.
enum class ZetaDelay {
  Exact,     // h, the plant delay
  Estimate,  // h_hat, with the mismatch term written out explicitly
};

/// Complete closed-loop experiment.
struct Scenario {
  std::string name = "scenario";
  PlantParams plant;
  DesignOptions design;
  int sim_modes = 40;
  DelaySignal h = ConstantDelay{1.0};
  DelaySignal h_hat = ConstantDelay{1.0};
  ZetaDelay zeta_delay = ZetaDelay::Exact;
  Signal reference;
  Signal perturbation;
  InitialField phi;
  ZetaInit zeta0;
  double t_end = 10.0;
  double dt = 1e-3;
  int store_stride = 10;
  Interpolation interp = Interpolation::Linear;

  /// Throws ValidationError naming the violated invariant.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Closed loop

/// Modal closed loop
///   x_n' = (lambda_n - c) x_n + c x_n(t - h) + g_n u,   n < M
///   zeta' = -c zeta + c zeta(t - h_z) + C x_{0..N} + alpha u - r
///   u = K (x_0..x_N, zeta) + p
struct LoopModel {
  Eigen::VectorXd lambda;
  Eigen::VectorXd gain;
  double c = 0.0;
  int N = 0;
  Eigen::RowVectorXd C;
  double alpha = 0.0;
  Eigen::RowVectorXd K;  // size N + 2

  int modes() const { return static_cast<int>(lambda.size()); }
  int state_size() const { return modes() + 1; }
};

LoopModel make_loop_model(const Design& design);

/// Time-indexed record of a run. Row i of `modal` holds x_0..x_{M-1} at
/// times[i].
struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd modal;
  std::vector<double> zeta;
  std::vector<double> u;
  std::vector<double> y1;  // filled by fill_outputs
  std::vector<double> state_norm;
  std::vector<double> r;
  std::vector<double> p;
  std::vector<double> h;
  std::vector<double> h_hat;
  Scenario scenario;

  std::size_t size() const { return times.size(); }
  /// (x_0..x_{M-1}, zeta) at sample i.
  Eigen::VectorXd state(std::size_t i) const;
};

struct IntegratorOptions {
  double dt = 1e-3;
  double t_end = 10.0;
  int store_stride = 10;
  Interpolation interp = Interpolation::Linear;
  double h_min = 0.0;  // bounds enforced on h and h_hat at every step
  double h_max = 0.0;
};

/// Initial history: (x_0..x_{M-1}, zeta) at a pre-time tau in [-h_max, 0].
using HistorySeed = std::function<Eigen::VectorXd(double tau)>;

/// Second-order exponential time differencing of the delayed modal loop.
/// The diagonal part diag(lambda - c, -c) is propagated exactly; delayed and
/// feedback terms enter through the two-stage ETD-RK2 update. Delayed
/// values come from a dense history seeded on ceil(h_max / dt) + 1 points.
Trajectory integrate_loop(const LoopModel& model, const DelaySignal& h,
                          const DelaySignal& h_hat, ZetaDelay zeta_delay,
                          const Signal& reference, const Signal& perturbation,
                          const HistorySeed& seed,
                          const IntegratorOptions& options);

// ---------------------------------------------------------------------------
// Initial data helpers

/// <phi(tau, .), e_n> for n < modes at each tau, by quadrature. Column j
/// holds the coefficients at taus[j].
Eigen::MatrixXd project_initial(
    const std::function<double(double, double)>& phi,
    const SpectralBasis& basis, int modes, std::span<const double> taus);

/// Same projection for a separable descriptor; each spatial factor is
/// projected once.
Eigen::MatrixXd project_initial(const InitialField& phi,
                                const SpectralBasis& basis, int modes,
                                std::span<const double> taus);

/// zeta(0) making u(0) equal phi(0, 0):
///   (phi00 - p0 - K_modal Y_modal(0)) / K_zeta.
/// Throws ValidationError when K_zeta is zero.
double compat_zeta0(const Eigen::RowVectorXd& K,
                    const Eigen::VectorXd& modal0, double p0, double phi00);

/// History seed for a scenario: projected phi and zeta_0.
HistorySeed make_history_seed(const Scenario& scn, const Design& design);

/// Runs the scenario against an already synthesized design.
Trajectory run(const Scenario& scn, const Design& design);

/// Synthesizes the design for the scenario, then runs it.
Trajectory run(const Scenario& scn);

}  // namespace rdpi
