#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rdpi/linalg.hpp"
#include "rdpi/spectral.hpp"

namespace rdpi {

/// First N + 1 modal ODEs: A = diag(lambda_n), B = (a_n + lambda_n b_n),
/// C = (e_n(1)).
struct TruncatedModel {
  int N = 0;
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
};

/// Truncated model augmented with the integral state:
///   A_a = [A 0; C 0],  B_a = [B; alpha].
struct AugmentedModel {
  TruncatedModel base;
  double alpha = 0.0;
  double alpha_remainder = 0.0;
  Eigen::MatrixXd A_a;
  Eigen::VectorXd B_a;
  std::optional<Eigen::RowVectorXd> K;
  std::vector<Complex> poles;
  double spectrum_residual = 0.0;
  double controllability_condition = 0.0;
  std::string warning;

  int dimension() const { return static_cast<int>(A_a.rows()); }
  /// A_a + B_a K. Throws ValidationError if K is unset.
  Eigen::MatrixXd closed_loop() const;
};

/// Steady state for constant reference r_e and perturbation p_e.
struct Equilibrium {
  double r_e = 0.0;
  double p_e = 0.0;
  Eigen::VectorXd Y_ae;  // (x_0..x_N, zeta)
  double u_e = 0.0;
  Eigen::VectorXd x_ne;  // every mode of the basis
  double trace_e = 0.0;  // reconstructed y(1)
  double stationarity_residual = 0.0;
};

/// Smallest N >= 0 with lambda_{N+1} < -2 sqrt(5) |c|.
/// Throws ValidationError if the basis holds no such mode.
int select_mode_count(const SpectralBasis& basis, double c);

TruncatedModel assemble_truncated(const SpectralBasis& basis, int N);

AugmentedModel assemble_augmented(const TruncatedModel& model, double alpha);

/// Rank of [B_a, A_a B_a, ..., A_a^{N+1} B_a].
int kalman_check(const Eigen::MatrixXd& A_a, const Eigen::VectorXd& B_a);

/// Ackermann placement of the closed-loop spectrum. Poles must be distinct
/// and closed under conjugation. The result is verified with
/// verify_spectrum; a residual above 1e-6 raises SolverError.
Placement<double> place_poles(const Eigen::MatrixXd& A_a,
                              const Eigen::VectorXd& B_a,
                              std::span<const Complex> poles);

/// Max matched distance between eig(M) and `expected`.
double verify_spectrum(const Eigen::MatrixXd& M,
                       std::span<const Complex> expected);

/// Evenly spaced real poles, spacing 1, starting at
/// min(-3|c| - 1, lambda_N - 1).
std::vector<Complex> default_poles(const TruncatedModel& model, double c);

/// Throws DesignGateError unless every pole has Re < -3|c|. Distinctness and
/// conjugate closure are checked by place_poles (ValidationError).
void check_pole_gate(std::span<const Complex> poles, double c);

/// Places the poles on the augmented model after the gate checks; returns a
/// copy with K set.
AugmentedModel with_gain(AugmentedModel model, std::span<const Complex> poles,
                         double c);

Equilibrium compute_equilibrium(const AugmentedModel& aug,
                                const SpectralBasis& basis, double r_e,
                                double p_e);

/// Options for the end-to-end design.
struct DesignOptions {
  std::vector<Complex> poles;  // empty: default_poles
  std::optional<int> N;        // empty: select_mode_count
  int alpha_tail_depth = 200;
};

/// Everything the closed loop needs: the simulation basis and the placed
/// augmented model, plus the numbers a design report prints.
struct Design {
  SpectralBasis basis;
  AugmentedModel model;
  int kalman_rank = 0;
  double threshold = 0.0;  // -2 sqrt(5) |c|
};

/// Full pipeline: eigen-data, mode count, alpha, controllability, placement
/// and both stability gates. `sim_modes` is the size of the returned basis.
Design synthesize(const PlantParams& params, int sim_modes,
                  const DesignOptions& options = {});

}  // namespace rdpi
