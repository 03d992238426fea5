#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "spreadmon/filter.hpp"

namespace spreadmon {

/**
 * Limiting posterior covariance of the filter (valid under delta_i < phi_i^2)
 * and the sigma^2 posterior-concentration formula, plus a numeric check of a
 * finished run against them.
 */

/// Inputs for the limit computation. `window` holds recent observations
/// newest first: window[0] = y_{t-1}, window[1] = y_{t-2}, ...
/// truncation = 0 picks the smallest J with (delta/phi^2)^J < 1e-12.
/// With `equilibrium_mu` set, the B-component series uses the constant
/// a_2 = mu^2 instead of the window.
template <typename Scalar = double>
struct LimitCovarianceSpec {
  Hyperparams<Scalar> hyper;
  std::vector<Scalar> window;
  long truncation = 0;
  std::optional<Scalar> equilibrium_mu;
};

template <typename Scalar = double>
struct LimitCovariance {
  Matrix2<Scalar> P = Matrix2<Scalar>::Zero();  // diagonal
  Scalar truncation_error = 0;  // max over components of the tail bound
  long J1 = 0;                  // terms summed per component
  long J2 = 0;
};

namespace detail {

template <typename Scalar>
long auto_truncation(Scalar ratio) {
  // smallest J with ratio^J < 1e-12
  return static_cast<long>(
      std::ceil(std::log(Scalar(1e-12)) / std::log(ratio)));
}

}  // namespace detail

/// Diagonal limit p_ii = { sum_{j<J} (delta_i/phi_i^2)^j a_{i,t-j} }^{-1}
/// with a_{1,t} = 1 and a_{2,t} = y_{t-1}^2, truncated at J terms. The
/// reported truncation error bounds the omitted tail of each reciprocal sum
/// by ratio^J * max(a) / (1 - ratio).
template <typename Scalar>
LimitCovariance<Scalar> limit_covariance(const LimitCovarianceSpec<Scalar>& spec) {
  spec.hyper.validate();
  const Scalar r1 = spec.hyper.delta1 / (spec.hyper.phi1 * spec.hyper.phi1);
  const Scalar r2 = spec.hyper.delta2 / (spec.hyper.phi2 * spec.hyper.phi2);
  if (!(r1 < 1) || !(r2 < 1))
    throw ArgumentError(
        "limit_covariance: requires delta_i < phi_i^2 for both components");
  if (spec.truncation < 0)
    throw ArgumentError("limit_covariance: truncation must be nonnegative");

  LimitCovariance<Scalar> out;
  out.J1 = spec.truncation > 0 ? spec.truncation : detail::auto_truncation(r1);
  out.J2 = spec.truncation > 0 ? spec.truncation : detail::auto_truncation(r2);

  // Component 1: constant a = 1, geometric sum (1 - r1^J) / (1 - r1).
  Scalar sum1 = 0;
  Scalar pow1 = 1;
  for (long j = 0; j < out.J1; ++j, pow1 *= r1) sum1 += pow1;
  out.P(0, 0) = 1 / sum1;
  Scalar tail1 = pow1 * 1 / (1 - r1);

  // Component 2: a = y_{t-1-j}^2 from the window (or the constant mu^2).
  Scalar sum2 = 0;
  Scalar pow2 = 1;
  Scalar max_a2 = 0;
  if (spec.equilibrium_mu) {
    const Scalar a = *spec.equilibrium_mu * *spec.equilibrium_mu;
    max_a2 = a;
    for (long j = 0; j < out.J2; ++j, pow2 *= r2) sum2 += pow2 * a;
  } else {
    if (static_cast<long>(spec.window.size()) < out.J2)
      throw ArgumentError("limit_covariance: window shorter than truncation");
    for (long j = 0; j < out.J2; ++j, pow2 *= r2) {
      const Scalar a = spec.window[static_cast<std::size_t>(j)] *
                       spec.window[static_cast<std::size_t>(j)];
      max_a2 = std::max(max_a2, a);
      sum2 += pow2 * a;
    }
  }
  out.P(1, 1) = 1 / sum2;
  const Scalar tail2 = pow2 * max_a2 / (1 - r2);
  out.truncation_error = std::max(tail1, tail2);
  return out;
}

/// The paper's expression for Var(sigma^2 | y^t):
/// (n1 + t - 1)^2 S_t^2 / { (n1 + t - 3)^2 (n1 + t - 5) }, defined for
/// n1 + t > 5.
template <typename Scalar>
Scalar sigma2_posterior_variance(Scalar n1, long t, Scalar S_t) {
  const Scalar m = n1 + Scalar(t);
  if (!(m > 5))
    throw ArgumentError("sigma2_posterior_variance: requires n1 + t > 5");
  const Scalar num = (m - 1) * (m - 1) * S_t * S_t;
  return num / ((m - 3) * (m - 3) * (m - 5));
}

template <typename Scalar = double>
struct ConvergenceReport {
  Scalar p11_limit = 0;       // reference value at the final tick
  Scalar p22_limit = 0;
  Scalar truncation_error = 0;
  Scalar observed_p11 = 0;    // filter values at the final tick
  Scalar observed_p22 = 0;
  Scalar max_offdiag = 0;     // largest |p12| over the checked ticks
  Scalar rel_dev_p11 = 0;     // max relative deviation over the checked ticks
  Scalar rel_dev_p22 = 0;
  long ticks_checked = 0;
  bool converged = false;     // both deviations within rel_tol
};

struct ConvergenceOptions {
  double last_fraction = 0.10;  // tail share of the run to check
  double rel_tol = 0.05;
  long truncation = 0;          // 0 = auto per component
};

namespace detail {

/// Finite-t reciprocal-variance solution of the componentwise recursion
/// 1/p_t = delta/(phi^2 p_{t-1}) + a_t:
///   1/p_t = r^{t-1}/p_1 + sum_{j=0}^{t-2} r^j a_{t-j},
/// truncated at max_terms summands. a(s) must return a_{i,s} for tick s.
template <typename Scalar, typename ATerm>
Scalar reciprocal_solution(Scalar ratio, Scalar p_initial, long t,
                           long max_terms, ATerm&& a) {
  Scalar sum = 0;
  Scalar pow = 1;
  const long terms = std::min(max_terms, t - 1);
  for (long j = 0; j < terms; ++j, pow *= ratio) sum += pow * a(t - j);
  if (terms == t - 1) {
    if (p_initial == 0) return 0;  // infinite initial precision
    sum += pow * (1 / p_initial);
  }
  return 1 / sum;
}

}  // namespace detail

/// Compares a finished run's diagonal P entries against the componentwise
/// recursion solution over the trailing share of ticks. The observation
/// series `y` must be the full stream the run consumed (y[0] = y_1). The
/// limit series converges only under delta_i < phi_i^2; components violating
/// that are still reported against the finite-t solution (which stays well
/// defined), so a delta = 1 run reports its 1/p accumulation instead.
template <typename Scalar>
ConvergenceReport<Scalar> verify_convergence(
    std::span<const StepRecord<Scalar>> run, const Hyperparams<Scalar>& hyper,
    std::span<const Scalar> y, const Vector2<Scalar>& p1_diag,
    const ConvergenceOptions& opts = {}) {
  if (run.empty()) throw EmptyInputError("verify_convergence: empty run");
  if (y.size() != run.size() + 1)
    throw ArgumentError(
        "verify_convergence: observation series must cover the whole run");

  const Scalar r1 = hyper.delta1 / (hyper.phi1 * hyper.phi1);
  const Scalar r2 = hyper.delta2 / (hyper.phi2 * hyper.phi2);
  const long J1 = opts.truncation > 0 ? opts.truncation
                  : r1 < 1            ? detail::auto_truncation(r1)
                                      : std::numeric_limits<long>::max();
  const long J2 = opts.truncation > 0 ? opts.truncation
                  : r2 < 1            ? detail::auto_truncation(r2)
                                      : std::numeric_limits<long>::max();

  // y_value(s) = y_s with 1-based tick s.
  auto y_value = [&](long s) { return y[static_cast<std::size_t>(s - 1)]; };
  auto a1 = [](long) { return Scalar(1); };
  auto a2 = [&](long s) { return y_value(s - 1) * y_value(s - 1); };

  const long total = static_cast<long>(run.size());
  const long first_checked =
      total - std::max<long>(1, static_cast<long>(
                                    std::floor(opts.last_fraction * total)));

  ConvergenceReport<Scalar> report;
  for (long i = first_checked; i < total; ++i) {
    const auto& rec = run[static_cast<std::size_t>(i)];
    const long t = rec.t;
    const Scalar ref1 =
        detail::reciprocal_solution(r1, p1_diag(0), t, J1, a1);
    const Scalar ref2 =
        detail::reciprocal_solution(r2, p1_diag(1), t, J2, a2);
    const Scalar p11 = rec.posterior.P(0, 0);
    const Scalar p22 = rec.posterior.P(1, 1);
    report.rel_dev_p11 =
        std::max(report.rel_dev_p11, std::abs(p11 - ref1) / std::abs(ref1));
    report.rel_dev_p22 =
        std::max(report.rel_dev_p22, std::abs(p22 - ref2) / std::abs(ref2));
    report.max_offdiag =
        std::max(report.max_offdiag, std::abs(rec.posterior.P(0, 1)));
    ++report.ticks_checked;
    if (i == total - 1) {
      report.p11_limit = ref1;
      report.p22_limit = ref2;
      report.observed_p11 = p11;
      report.observed_p22 = p22;
    }
  }

  Scalar tail1 = 0;
  Scalar tail2 = 0;
  if (r1 < 1) tail1 = std::pow(r1, Scalar(J1)) / (1 - r1);
  if (r2 < 1) {
    Scalar max_a2 = 0;
    for (Scalar value : y) max_a2 = std::max(max_a2, value * value);
    tail2 = std::pow(r2, Scalar(J2)) * max_a2 / (1 - r2);
  }
  report.truncation_error = std::max(tail1, tail2);
  // The limit exists only for components with delta < phi^2; others are
  // reported but do not gate the flag.
  bool any = false;
  bool ok = true;
  if (r1 < 1) {
    any = true;
    ok = ok && report.rel_dev_p11 <= Scalar(opts.rel_tol);
  }
  if (r2 < 1) {
    any = true;
    ok = ok && report.rel_dev_p22 <= Scalar(opts.rel_tol);
  }
  report.converged = any && ok;
  return report;
}

}  // namespace spreadmon
