#pragma once

#include <concepts>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rdpi/errors.hpp"
#include "rdpi/quadrature.hpp"

namespace rdpi {

/// Coefficients of y_t = a y_xx + b y + c y(t - h(t)) on (0, 1) with Dirichlet
/// actuation at x = 0 and the Robin condition cos(theta) y + sin(theta) y_x = 0
/// at x = 1. The delay is confined to [h_min, h_max].
struct PlantParams {
  double a = 0.2;
  double b = 2.0;
  double c = 1.0;
  double theta = std::numbers::pi / 3;
  double h_min = 0.5;
  double h_max = 1.5;

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;
};

/// Eigen-data of one mode of the disturbance-free operator a f'' + (b + c) f.
///
/// The eigenfunction is e_n(x) = kappa sin(r x). `a_n` and `b_n` are the
/// projections of the lift (1 - x)^2 through the operator and on its own,
/// so that the open-loop mode is driven by (a_n + lambda b_n) u.
struct ModeData {
  int index = 0;
  double r = 0.0;
  double lambda = 0.0;
  double kappa = 0.0;
  double e1 = 0.0;   // e_n(1)
  double ed0 = 0.0;  // e_n'(0)
  double a_n = 0.0;
  double b_n = 0.0;

  /// Input gain of the modal ODE.
  double input_gain() const { return a_n + lambda * b_n; }
};

/// Unique root of r cot(r) = -cot(theta) inside (n pi, (n + 1) pi).
///
/// Bisection on a bracket shrunk by 1e-9 at both ends, where cot is singular.
/// Throws SolverError if the scaled residual is not below
/// max(1e-12, 4 eps r) after 200 iterations; the second term only matters
/// past r ~ 5e3, where the spacing of doubles near r dominates.
double find_root_rn(int n, double theta);

/// |r cos r + cot(theta) sin r| / (r + cot(theta)), the residual of the root
/// equation in its bounded form.
double root_residual(double r, double theta);

/// Closed-form eigen-data of mode `n`. Does not check `params`.
ModeData compute_mode(const PlantParams& params, int n);

/// First `count` modes of the plant plus the quasi-static gain of every mode
/// beyond them, which the boundary trace needs to stay accurate with a
/// truncated state.
class SpectralBasis {
 public:
  SpectralBasis(const PlantParams& params, int count);

  const PlantParams& params() const { return params_; }
  int size() const { return static_cast<int>(modes_.size()); }
  std::span<const ModeData> modes() const { return modes_; }
  const ModeData& mode(int n) const;

  /// e_n(x). Throws ValidationError when n is out of range.
  double eigenfunction(int n, double x) const;

  Eigen::VectorXd lambdas() const;
  Eigen::VectorXd trace_values() const;  // e_n(1)
  Eigen::VectorXd input_gains() const;   // a_n + lambda_n b_n
  Eigen::VectorXd lift_coefficients() const;  // b_n

  /// Sum over n >= size() of (a_n / lambda_n) e_n(1).
  double unresolved_trace_gain() const { return unresolved_trace_gain_; }

 private:
  PlantParams params_;
  std::vector<ModeData> modes_;
  double unresolved_trace_gain_ = 0.0;
};

SpectralBasis build_basis(const PlantParams& params, int count);

inline double eigenfunction_value(const SpectralBasis& basis, int n,
                                  double x) {
  return basis.eigenfunction(n, x);
}

/// <f, e_n> by adaptive Simpson quadrature with absolute tolerance 1e-10.
template <typename F>
  requires std::invocable<const F&, double>
double inner_product(const F& f, const SpectralBasis& basis, int n) {
  const ModeData& m = basis.mode(n);
  return integrate<double>(
      [&](double x) { return f(x) * m.kappa * std::sin(m.r * x); }, 0.0, 1.0);
}

/// Result of a truncated modal series.
struct SeriesValue {
  double value = 0.0;
  double remainder = 0.0;  // 10 x magnitude of the last included term
  int last_index = -1;     // index of the last mode included
};

/// Sum over n >= first of (a_n / lambda_n) e_n(1), extended beyond
/// `min_terms` until the remainder estimate falls below `tol`. Throws
/// SolverError past 1e5 terms.
SeriesValue residual_trace_series(const PlantParams& params, int first,
                                  int min_terms, double tol);

/// Integral-action input gain
///   alpha = sum_{n<=N} b_n e_n(1) - sum_{n>N} (a_n / lambda_n) e_n(1).
/// The tail starts with `tail_depth` terms and grows until its remainder
/// estimate is below 1e-8.
SeriesValue compute_alpha(const SpectralBasis& basis, int N, int tail_depth);

}  // namespace rdpi
