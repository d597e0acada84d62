#pragma once

#include <cmath>
#include <concepts>

#include "rdpi/errors.hpp"

namespace rdpi {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  int max_depth = 40;
  // The interval is split into this many panels before refinement so that
  // oscillatory integrands are never judged converged from five samples.
  int initial_panels = 16;
};

namespace detail {

template <typename Scalar, typename F>
Scalar simpson_refine(const F& f, Scalar a, Scalar b, Scalar fa, Scalar fm,
                      Scalar fb, Scalar whole, Scalar tol, int depth,
                      bool& failed) {
  const Scalar m = (a + b) / 2;
  const Scalar lm = (a + m) / 2;
  const Scalar rm = (m + b) / 2;
  const Scalar flm = f(lm);
  const Scalar frm = f(rm);
  const Scalar left = (m - a) / 6 * (fa + 4 * flm + fm);
  const Scalar right = (b - m) / 6 * (fm + 4 * frm + fb);
  const Scalar delta = left + right - whole;
  if (std::abs(delta) <= 15 * tol) return left + right + delta / 15;
  if (depth <= 0) {
    failed = true;
    return left + right + delta / 15;
  }
  return simpson_refine(f, a, m, fa, flm, fm, left, tol / 2, depth - 1,
                        failed) +
         simpson_refine(f, m, b, fm, frm, fb, right, tol / 2, depth - 1,
                        failed);
}

}  // namespace detail

/// Adaptive Simpson quadrature of `f` over [a, b]. Throws SolverError when a
/// panel cannot meet its share of the tolerance within `max_depth` bisections.
template <typename Scalar = double, typename F>
  requires std::invocable<const F&, Scalar>
Scalar integrate(const F& f, Scalar a, Scalar b,
                 const QuadratureOptions& opts = {}) {
  const int panels = opts.initial_panels > 0 ? opts.initial_panels : 1;
  const Scalar width = (b - a) / panels;
  const Scalar tol = Scalar(opts.abs_tol) / panels;
  bool failed = false;
  Scalar total = 0;
  Scalar fa = f(a);
  for (int k = 0; k < panels; ++k) {
    const Scalar lo = a + width * k;
    const Scalar hi = (k + 1 == panels) ? b : a + width * (k + 1);
    const Scalar fm = f((lo + hi) / 2);
    const Scalar fb = f(hi);
    const Scalar whole = (hi - lo) / 6 * (fa + 4 * fm + fb);
    total += detail::simpson_refine(f, lo, hi, fa, fm, fb, whole, tol,
                                    opts.max_depth, failed);
    fa = fb;
  }
  if (failed || !std::isfinite(total)) {
    throw SolverError("adaptive quadrature did not reach tolerance");
  }
  return total;
}

}  // namespace rdpi
