#include "rdpi/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace rdpi {

namespace {

constexpr double kBracketShrink = 1e-9;
constexpr int kRootMaxIterations = 200;
constexpr double kRootTolerance = 1e-12;
constexpr int kSeriesTermCap = 100000;

// r cos r + cot(theta) sin r; carries the sign of r cot r + cot(theta) times
// the sign of sin r, which is (-1)^n on branch n.
double bounded_root_function(double r, double cot_theta) {
  return r * std::cos(r) + cot_theta * std::sin(r);
}

}  // namespace

void PlantParams::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw ValidationError("plant: diffusivity a must be > 0");
  }
  if (!std::isfinite(b)) throw ValidationError("plant: b must be finite");
  if (c == 0.0 || !std::isfinite(c)) {
    throw ValidationError("plant: delayed reaction coefficient c must be != 0");
  }
  if (!(theta > 0.0 && theta < std::numbers::pi / 2)) {
    throw ValidationError("plant: theta must lie in (0, pi/2)");
  }
  if (!(h_min > 0.0 && h_min < h_max) || !std::isfinite(h_max)) {
    throw ValidationError("plant: delay bounds must satisfy 0 < h_min < h_max");
  }
}

double root_residual(double r, double theta) {
  const double cot_theta = 1.0 / std::tan(theta);
  return std::abs(bounded_root_function(r, cot_theta)) /
         (std::abs(r) + std::abs(cot_theta));
}

double find_root_rn(int n, double theta) {
  if (n < 0) throw ValidationError("find_root_rn: negative mode index");
  if (!(theta > 0.0 && theta < std::numbers::pi / 2)) {
    throw ValidationError("find_root_rn: theta must lie in (0, pi/2)");
  }
  const double cot_theta = 1.0 / std::tan(theta);
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  // f(r) = sign * (r cos r + cot(theta) sin r) is decreasing on the branch.
  auto f = [&](double r) {
    return sign * bounded_root_function(r, cot_theta);
  };

  double lo = n * std::numbers::pi + kBracketShrink;
  double hi = (n + 1) * std::numbers::pi - kBracketShrink;
  if (!(f(lo) > 0.0 && f(hi) < 0.0)) {
    throw SolverError("find_root_rn: no sign change on branch " +
                      std::to_string(n));
  }
  for (int it = 0; it < kRootMaxIterations; ++it) {
    const double mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double r =
      std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
  // Beyond r ~ 5e3 the nearest double to the root cannot reach 1e-12; the
  // floor then is the rounding of r itself.
  const double tol =
      std::max(kRootTolerance, 4.0 * std::numeric_limits<double>::epsilon() * r);
  if (root_residual(r, theta) >= tol) {
    throw SolverError("find_root_rn: residual above tolerance on branch " +
                      std::to_string(n));
  }
  return r;
}

ModeData compute_mode(const PlantParams& p, int n) {
  ModeData m;
  m.index = n;
  m.r = find_root_rn(n, p.theta);
  const double r = m.r;
  m.lambda = p.b + p.c - p.a * r * r;
  m.kappa = 2.0 * std::sqrt(r / (2.0 * r - std::sin(2.0 * r)));
  m.e1 = m.kappa * std::sin(r);
  m.ed0 = m.kappa * r;
  const double s = std::sin(r / 2);
  const double one_minus_cos = 2.0 * s * s;
  // Integral of (1 - x)^2 sin(r x) over [0, 1].
  const double lift_moment = 1.0 / r - 2.0 * one_minus_cos / (r * r * r);
  m.b_n = -m.kappa * lift_moment;
  m.a_n = m.kappa * (2.0 * p.a * one_minus_cos / r + (p.b + p.c) * lift_moment);
  return m;
}

SeriesValue residual_trace_series(const PlantParams& params, int first,
                                  int min_terms, double tol) {
  if (first < 0 || min_terms < 1) {
    throw ValidationError("residual_trace_series: bad range");
  }
  SeriesValue out;
  double sum = 0.0;
  double last = 0.0;
  int n = first;
  for (;; ++n) {
    if (n - first >= kSeriesTermCap) {
      throw SolverError("modal tail series did not converge within 1e5 terms");
    }
    const ModeData m = compute_mode(params, n);
    if (m.lambda == 0.0) {
      throw SolverError("modal tail series hit a zero eigenvalue");
    }
    last = m.a_n / m.lambda * m.e1;
    sum += last;
    if (n - first + 1 >= min_terms && 10.0 * std::abs(last) < tol) break;
  }
  out.value = sum;
  out.remainder = 10.0 * std::abs(last);
  out.last_index = n;
  return out;
}

SeriesValue compute_alpha(const SpectralBasis& basis, int N, int tail_depth) {
  if (N < 0) throw ValidationError("compute_alpha: N must be >= 0");
  if (tail_depth < 1) throw ValidationError("compute_alpha: tail_depth >= 1");
  double head = 0.0;
  for (int n = 0; n <= N; ++n) {
    const ModeData m = n < basis.size() ? basis.mode(n)
                                        : compute_mode(basis.params(), n);
    head += m.b_n * m.e1;
  }
  SeriesValue tail =
      residual_trace_series(basis.params(), N + 1, tail_depth, 1e-8);
  tail.value = head - tail.value;
  return tail;
}

SpectralBasis::SpectralBasis(const PlantParams& params, int count)
    : params_(params) {
  params_.validate();
  if (count < 1) throw ValidationError("build_basis: count must be >= 1");
  modes_.reserve(count);
  for (int n = 0; n < count; ++n) {
    modes_.push_back(compute_mode(params_, n));
    if (n > 0 && !(modes_[n].lambda < modes_[n - 1].lambda)) {
      throw SolverError("build_basis: eigenvalues not strictly decreasing");
    }
  }
  unresolved_trace_gain_ =
      residual_trace_series(params_, count, 1, 1e-10).value;
}

const ModeData& SpectralBasis::mode(int n) const {
  if (n < 0 || n >= size()) {
    throw ValidationError("mode index " + std::to_string(n) +
                          " out of range");
  }
  return modes_[n];
}

double SpectralBasis::eigenfunction(int n, double x) const {
  const ModeData& m = mode(n);
  return m.kappa * std::sin(m.r * x);
}

Eigen::VectorXd SpectralBasis::lambdas() const {
  Eigen::VectorXd v(size());
  for (int n = 0; n < size(); ++n) v(n) = modes_[n].lambda;
  return v;
}

Eigen::VectorXd SpectralBasis::trace_values() const {
  Eigen::VectorXd v(size());
  for (int n = 0; n < size(); ++n) v(n) = modes_[n].e1;
  return v;
}

Eigen::VectorXd SpectralBasis::input_gains() const {
  Eigen::VectorXd v(size());
  for (int n = 0; n < size(); ++n) v(n) = modes_[n].input_gain();
  return v;
}

Eigen::VectorXd SpectralBasis::lift_coefficients() const {
  Eigen::VectorXd v(size());
  for (int n = 0; n < size(); ++n) v(n) = modes_[n].b_n;
  return v;
}

SpectralBasis build_basis(const PlantParams& params, int count) {
  return SpectralBasis(params, count);
}

}  // namespace rdpi
