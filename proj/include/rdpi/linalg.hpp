#pragma once

// Small dense linear-algebra kernels used by the controller synthesis: the
// characteristic polynomial, a deflation-free polynomial root solver, the
// controllability matrix and single-input pole placement. Everything is
// templated on the scalar type; the design models are at most ~16 states.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rdpi/errors.hpp"

namespace rdpi {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Complex = std::complex<double>;

/// Monic characteristic polynomial of a square matrix by Faddeev-LeVerrier.
/// Returns (1, p_1, ..., p_n) with det(sI - M) = s^n + p_1 s^{n-1} + ... + p_n.
template <typename Derived>
Vector<typename Derived::Scalar> characteristic_polynomial(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = m.rows();
  if (m.cols() != n) {
    throw ValidationError("characteristic_polynomial: matrix not square");
  }
  Vector<Scalar> coeffs(n + 1);
  coeffs(0) = Scalar(1);
  if (n == 0) return coeffs;
  const Matrix<Scalar> id = Matrix<Scalar>::Identity(n, n);
  Matrix<Scalar> adj = id;
  for (Eigen::Index k = 1; k <= n; ++k) {
    if (k > 1) adj = (m * adj).eval() + coeffs(k - 1) * id;
    coeffs(k) = -(m * adj).trace() / Scalar(k);
  }
  return coeffs;
}

/// Monic real polynomial with the given roots (descending coefficients).
/// Imaginary residue from conjugate pairs is discarded.
inline Vector<double> polynomial_from_roots(std::span<const Complex> roots) {
  std::vector<Complex> c(roots.size() + 1, Complex(0.0));
  c[0] = 1.0;
  for (std::size_t k = 0; k < roots.size(); ++k) {
    for (std::size_t j = k + 1; j > 0; --j) c[j] -= roots[k] * c[j - 1];
  }
  Vector<double> out(static_cast<Eigen::Index>(c.size()));
  for (std::size_t j = 0; j < c.size(); ++j) out(j) = c[j].real();
  return out;
}

namespace detail {

template <typename Scalar>
void horner(const Vector<Scalar>& coeffs, std::complex<Scalar> z,
            std::complex<Scalar>& p, std::complex<Scalar>& dp) {
  p = coeffs(0);
  dp = 0;
  for (Eigen::Index k = 1; k < coeffs.size(); ++k) {
    dp = dp * z + p;
    p = p * z + coeffs(k);
  }
}

}  // namespace detail

/// All roots of a polynomial with descending coefficients, found
/// simultaneously by the Aberth-Ehrlich iteration and then polished with
/// Newton steps on the original polynomial. Throws SolverError on
/// non-convergence.
template <typename Scalar>
std::vector<std::complex<Scalar>> polynomial_roots(
    const Vector<Scalar>& coeffs_in, int max_iterations = 500) {
  using C = std::complex<Scalar>;
  Eigen::Index lead = 0;
  while (lead < coeffs_in.size() && coeffs_in(lead) == Scalar(0)) ++lead;
  if (lead == coeffs_in.size()) {
    throw ValidationError("polynomial_roots: zero polynomial");
  }
  const Vector<Scalar> coeffs =
      coeffs_in.tail(coeffs_in.size() - lead) / coeffs_in(lead);
  const int degree = static_cast<int>(coeffs.size()) - 1;
  std::vector<C> z(degree);
  if (degree == 0) return z;

  // Cauchy bound on root moduli.
  Scalar bound = 0;
  for (int k = 1; k <= degree; ++k) bound = std::max(bound, std::abs(coeffs(k)));
  const Scalar radius = Scalar(1) + bound;
  for (int k = 0; k < degree; ++k) {
    const Scalar angle =
        Scalar(2) * std::numbers::pi_v<Scalar> * k / degree + Scalar(0.4);
    z[k] = std::polar(radius / 2, angle);
  }

  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  bool converged = false;
  for (int it = 0; it < max_iterations && !converged; ++it) {
    converged = true;
    for (int k = 0; k < degree; ++k) {
      C p, dp;
      detail::horner(coeffs, z[k], p, dp);
      // Stop moving a root once |p| is at the rounding level of Horner.
      Scalar noise = 0;
      const Scalar mod = std::abs(z[k]);
      for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
        noise = noise * mod + std::abs(coeffs(j));
      }
      if (std::abs(p) <= 4 * eps * noise) continue;
      const C ratio = p / dp;
      C repulsion = 0;
      for (int j = 0; j < degree; ++j) {
        if (j != k) repulsion += C(1) / (z[k] - z[j]);
      }
      const C step = ratio / (C(1) - ratio * repulsion);
      z[k] -= step;
      if (std::abs(step) > 8 * eps * std::max(Scalar(1), std::abs(z[k]))) {
        converged = false;
      }
    }
  }
  if (!converged) {
    throw SolverError("polynomial_roots: Aberth iteration did not converge");
  }

  for (C& root : z) {
    for (int it = 0; it < 3; ++it) {
      C p, dp;
      detail::horner(coeffs, root, p, dp);
      if (dp == C(0)) break;
      const C candidate = root - p / dp;
      C pc, dpc;
      detail::horner(coeffs, candidate, pc, dpc);
      if (std::abs(pc) < std::abs(p)) {
        root = candidate;
      } else {
        break;
      }
    }
  }
  return z;
}

/// Eigenvalues of a small square matrix through its characteristic
/// polynomial. Only meant for the design-size matrices (<= 16).
template <typename Derived>
std::vector<std::complex<typename Derived::Scalar>> small_eigenvalues(
    const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() > 16) {
    throw ValidationError("small_eigenvalues: dimension above 16");
  }
  return polynomial_roots(characteristic_polynomial(m));
}

/// Largest distance between paired entries after greedy nearest matching.
/// Returns +inf when the sizes differ.
template <typename Scalar>
Scalar matched_residual(std::span<const std::complex<Scalar>> computed,
                        std::span<const std::complex<Scalar>> expected) {
  if (computed.size() != expected.size()) {
    return std::numeric_limits<Scalar>::infinity();
  }
  const std::size_t n = computed.size();
  std::vector<bool> used_c(n, false), used_e(n, false);
  Scalar worst = 0;
  for (std::size_t round = 0; round < n; ++round) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (used_c[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (used_e[j]) continue;
        const Scalar d = std::abs(computed[i] - expected[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    used_c[bi] = used_e[bj] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

/// Max residual between the spectrum of `m` and `expected`. The
/// characteristic-polynomial route is tried first; when it misses by more
/// than 1e-9 the spectrum is recomputed by real Schur decomposition, which
/// stays accurate on strongly non-normal (high-gain) closed loops, and the
/// smaller residual is returned.
template <typename Derived>
typename Derived::Scalar verify_spectrum(
    const Eigen::MatrixBase<Derived>& m,
    std::span<const std::complex<typename Derived::Scalar>> expected) {
  using Scalar = typename Derived::Scalar;
  const Scalar via_poly = matched_residual<Scalar>(small_eigenvalues(m), expected);
  if (via_poly <= Scalar(1e-9)) return via_poly;
  Eigen::EigenSolver<Matrix<Scalar>> schur(m.eval(), false);
  if (schur.info() != Eigen::Success) return via_poly;
  std::vector<std::complex<Scalar>> eig(schur.eigenvalues().begin(),
                                        schur.eigenvalues().end());
  return std::min(via_poly, matched_residual<Scalar>(eig, expected));
}

/// [B, AB, ..., A^{n-1} B] for a single-input pair.
template <typename DA, typename DB>
Matrix<typename DA::Scalar> controllability_matrix(
    const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n) {
    throw ValidationError("controllability_matrix: inconsistent dimensions");
  }
  Matrix<typename DA::Scalar> ctrb(n, n * b.cols());
  if (n == 0) return ctrb;
  ctrb.leftCols(b.cols()) = b;
  for (Eigen::Index i = 1; i < n; ++i) {
    ctrb.middleCols(b.cols() * i, b.cols()) =
        a * ctrb.middleCols(b.cols() * (i - 1), b.cols());
  }
  return ctrb;
}

/// Rank of the controllability matrix, by column-pivoting QR.
template <typename DA, typename DB>
int kalman_rank(const Eigen::MatrixBase<DA>& a,
                const Eigen::MatrixBase<DB>& b) {
  const auto ctrb = controllability_matrix(a, b);
  if (ctrb.size() == 0 || ctrb.isZero(0)) return 0;
  Eigen::ColPivHouseholderQR<Matrix<typename DA::Scalar>> qr(ctrb);
  return static_cast<int>(qr.rank());
}

template <typename Scalar>
struct Placement {
  RowVector<Scalar> gain;  // u = gain * x places eig(A + B gain)
  Scalar controllability_condition = 0;
  std::string warning;  // non-empty when the controllability matrix is poor
};

/// Single-input pole placement with Ackermann's formula. The returned gain
/// uses the positive feedback convention u = K x, so eig(A + B K) equals
/// the roots of `desired` (descending monic coefficients).
template <typename DA, typename DB>
Placement<typename DA::Scalar> ackermann(
    const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
    const Vector<typename DA::Scalar>& desired) {
  using Scalar = typename DA::Scalar;
  const Eigen::Index n = a.rows();
  if (b.cols() != 1) throw ValidationError("ackermann: single input only");
  if (desired.size() != n + 1) {
    throw ValidationError("ackermann: need one pole per state");
  }
  const Matrix<Scalar> ctrb = controllability_matrix(a, b);
  Eigen::JacobiSVD<Matrix<Scalar>> svd(ctrb);
  const auto& sv = svd.singularValues();
  Placement<Scalar> out;
  out.controllability_condition =
      sv(sv.size() - 1) > Scalar(0)
          ? sv(0) / sv(sv.size() - 1)
          : std::numeric_limits<Scalar>::infinity();
  if (kalman_rank(a, b) < n) {
    throw DesignGateError("ackermann: pair (A, B) is not controllable");
  }
  if (out.controllability_condition > Scalar(1e12)) {
    out.warning = "controllability matrix condition estimate above 1e12";
  }

  const Matrix<Scalar> id = Matrix<Scalar>::Identity(n, n);
  Matrix<Scalar> poly_of_a = id;
  for (Eigen::Index k = 1; k <= n; ++k) {
    poly_of_a = (a * poly_of_a).eval() + desired(k) * id;
  }
  Vector<Scalar> last = Vector<Scalar>::Zero(n);
  last(n - 1) = Scalar(1);
  const Vector<Scalar> row =
      ctrb.transpose().fullPivLu().solve(last);
  out.gain = -(row.transpose() * poly_of_a);
  return out;
}

}  // namespace rdpi
