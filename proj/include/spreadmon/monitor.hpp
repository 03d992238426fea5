#pragma once

#include <cmath>

#include "spreadmon/filter.hpp"
#include "spreadmon/student_t.hpp"

namespace spreadmon {

/**
 * Mean-reversion monitoring: credible intervals for B_t and for the next
 * state/observation, the two |B_t| < 1 decision rules, and the threshold
 * trading signal.
 */

template <typename Scalar = double>
struct CredibleInterval {
  Scalar center;
  Scalar lower;
  Scalar upper;
  Scalar level;  // confidence level 1 - gamma
  Scalar dof;
};

template <typename Scalar = double>
struct MonitorVerdict {
  long t;
  Scalar b_hat;
  CredibleInterval<Scalar> interval;
  bool point_rule;         // |b_hat| < 1
  bool conservative_rule;  // whole interval inside (-1, 1)
};

enum class Side { Long, Short, Flat };

inline const char* to_string(Side side) {
  switch (side) {
    case Side::Long: return "long";
    case Side::Short: return "short";
    default: return "flat";
  }
}

template <typename Scalar = double>
struct TradeSignal {
  long t;
  Side direction;
  Scalar gap;
  Scalar threshold;
};

namespace detail {

template <typename Scalar>
Scalar two_sided_quantile(Scalar gamma, Scalar dof) {
  if (!(gamma > 0 && gamma < 1))
    throw ArgumentError("credible interval: gamma must lie in (0,1)");
  return student_t_quantile(1 - gamma / 2, dof);
}

template <typename Scalar>
CredibleInterval<Scalar> centered_interval(Scalar center, Scalar scale2,
                                           Scalar gamma, Scalar dof) {
  const Scalar half = detail::two_sided_quantile(gamma, dof) *
                      std::sqrt(std::max<Scalar>(scale2, 0));
  return {center, center - half, center + half, 1 - gamma, dof};
}

}  // namespace detail

/// Marginal (1-gamma) interval for B_t: m2 +/- t_{gamma/2, n} sqrt(P22 S).
template <typename Scalar>
CredibleInterval<Scalar> b_interval(const FilterState<Scalar>& state,
                                    Scalar gamma) {
  return detail::centered_interval(state.m(1), state.P(1, 1) * state.S, gamma,
                                   state.n);
}

/// Band for the hidden next state x_{t+1}: f +/- t_{gamma/2, n} sqrt(F'RF S).
template <typename Scalar>
CredibleInterval<Scalar> state_interval(const FilterState<Scalar>& state,
                                        const Hyperparams<Scalar>& hyper,
                                        Scalar gamma) {
  const auto pred = forecast(state, hyper);
  // F'RF S = (Q - 1) S
  return detail::centered_interval(pred.location,
                                   pred.scale2 - state.S, gamma, state.n);
}

/// Band for the next observation y_{t+1}: f +/- t_{gamma/2, n} sqrt(Q S).
template <typename Scalar>
CredibleInterval<Scalar> obs_interval(const FilterState<Scalar>& state,
                                      const Hyperparams<Scalar>& hyper,
                                      Scalar gamma) {
  const auto pred = forecast(state, hyper);
  return detail::centered_interval(pred.location, pred.scale2, gamma, state.n);
}

/// Mean-reversion verdict with both decision rules populated.
template <typename Scalar>
MonitorVerdict<Scalar> verdict(const FilterState<Scalar>& state, Scalar gamma) {
  MonitorVerdict<Scalar> v;
  v.t = state.t;
  v.b_hat = state.m(1);
  v.interval = b_interval(state, gamma);
  v.point_rule = std::abs(v.b_hat) < 1;
  v.conservative_rule = v.interval.lower > -1 && v.interval.upper < 1;
  return v;
}

/// Threshold rule: long when y - reference > threshold, short when
/// y - reference < -threshold, flat otherwise.
template <typename Scalar>
TradeSignal<Scalar> signal(Scalar y, Scalar reference, Scalar threshold) {
  if (!(threshold >= 0))
    throw ArgumentError("signal: threshold must be nonnegative");
  TradeSignal<Scalar> s;
  s.t = 0;
  s.gap = y - reference;
  s.threshold = threshold;
  s.direction = s.gap > threshold    ? Side::Long
                : s.gap < -threshold ? Side::Short
                                     : Side::Flat;
  return s;
}

}  // namespace spreadmon
