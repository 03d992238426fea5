#pragma once

#include <cmath>
#include <limits>

#include "spreadmon/errors.hpp"

namespace spreadmon {

/**
 * Standard Student-t density, distribution and quantile functions.
 *
 * The quantile is obtained by numerical inversion of the CDF (regularized
 * incomplete beta), bracketing the root and polishing with safeguarded
 * Newton steps to an absolute tolerance of 1e-10. No external special
 * function library is used.
 */

namespace detail {

/// Continued-fraction kernel for the regularized incomplete beta function
/// (modified Lentz iteration).
template <typename Scalar>
Scalar beta_continued_fraction(Scalar x, Scalar a, Scalar b) {
  constexpr Scalar tiny = Scalar(1e-300);
  constexpr Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar qab = a + b;
  const Scalar qap = a + 1;
  const Scalar qam = a - 1;
  Scalar c = 1;
  Scalar d = 1 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1 / d;
  Scalar h = d;
  for (int m = 1; m <= 500; ++m) {
    const Scalar m2 = Scalar(2 * m);
    Scalar aa = Scalar(m) * (b - Scalar(m)) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + Scalar(m)) * (qab + Scalar(m)) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1 / d;
    const Scalar del = d * c;
    h *= del;
    if (std::abs(del - 1) < 4 * eps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b) for x in [0, 1], a, b > 0.
template <typename Scalar>
Scalar regularized_incomplete_beta(Scalar x, Scalar a, Scalar b) {
  if (!(x >= 0 && x <= 1) || !(a > 0) || !(b > 0))
    throw ArgumentError("regularized_incomplete_beta: domain violation");
  if (x == 0) return 0;
  if (x == 1) return 1;
  const Scalar log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const Scalar front = std::exp(log_front);
  if (x < (a + 1) / (a + b + 2))
    return front * detail::beta_continued_fraction(x, a, b) / a;
  return 1 - front * detail::beta_continued_fraction(1 - x, b, a) / b;
}

/// CDF of the standard Student-t distribution with `dof` degrees of freedom.
template <typename Scalar>
Scalar student_t_cdf(Scalar x, Scalar dof) {
  if (!(dof > 0)) throw ArgumentError("student_t_cdf: dof must be positive");
  if (x == 0) return Scalar(0.5);
  const Scalar z = dof / (dof + x * x);
  const Scalar half_tail =
      Scalar(0.5) * regularized_incomplete_beta(z, dof / 2, Scalar(0.5));
  return x > 0 ? 1 - half_tail : half_tail;
}

/// Log density of the standard Student-t distribution.
template <typename Scalar>
Scalar student_t_log_pdf(Scalar x, Scalar dof) {
  if (!(dof > 0)) throw ArgumentError("student_t_log_pdf: dof must be positive");
  constexpr Scalar pi = Scalar(3.141592653589793238462643383279502884L);
  return std::lgamma((dof + 1) / 2) - std::lgamma(dof / 2) -
         Scalar(0.5) * std::log(dof * pi) -
         (dof + 1) / 2 * std::log1p(x * x / dof);
}

/// Log density of a location/scale Student-t; `scale2` is the squared scale
/// (the Q_t * S_{t-1} quantity of the one-step predictive distribution).
template <typename Scalar>
Scalar student_t_log_pdf(Scalar x, Scalar dof, Scalar loc, Scalar scale2) {
  if (!(scale2 > 0))
    throw ArgumentError("student_t_log_pdf: scale2 must be positive");
  const Scalar z = (x - loc) / std::sqrt(scale2);
  return student_t_log_pdf(z, dof) - Scalar(0.5) * std::log(scale2);
}

/// Quantile of the standard Student-t distribution: the x with CDF(x) = p.
template <typename Scalar>
Scalar student_t_quantile(Scalar p, Scalar dof) {
  if (!(p > 0 && p < 1))
    throw ArgumentError("student_t_quantile: p must lie in (0,1)");
  if (!(dof > 0))
    throw ArgumentError("student_t_quantile: dof must be positive");
  if (p == Scalar(0.5)) return 0;

  // Solve on the upper half and reflect.
  const bool upper = p > Scalar(0.5);
  const Scalar target = upper ? p : 1 - p;

  Scalar lo = 0;
  Scalar hi = 1;
  while (student_t_cdf(hi, dof) < target) {
    lo = hi;
    hi *= 2;
    if (hi > Scalar(1e300))
      throw ArgumentError("student_t_quantile: bracket overflow");
  }

  Scalar x = (lo + hi) / 2;
  for (int it = 0; it < 200; ++it) {
    const Scalar cdf = student_t_cdf(x, dof);
    if (cdf > target)
      hi = x;
    else
      lo = x;
    const Scalar pdf = std::exp(student_t_log_pdf(x, dof));
    Scalar next = x - (cdf - target) / pdf;
    if (!(next > lo && next < hi)) next = (lo + hi) / 2;  // bisection fallback
    const Scalar dx = std::abs(next - x);
    x = next;
    if (dx <= Scalar(1e-13) * std::max<Scalar>(1, std::abs(x))) break;
  }
  return upper ? x : -x;
}

}  // namespace spreadmon
