#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "spreadmon/errors.hpp"

namespace spreadmon {

/**
 * Recursive flexible least squares for the time-varying hedge ratio beta_t
 * regressing p1 on p2 without intercept, with penalty mu on squared
 * coefficient increments. mu -> infinity recovers ordinary least squares;
 * mu = 0 decouples the ticks entirely.
 */

template <typename Scalar = double>
struct FlsState {
  Scalar S = 0;     // penalized normal-equation accumulator, >= 0
  Scalar s = 0;     // cross-moment accumulator
  Scalar beta = 0;  // latest hedge ratio (valid once has_beta)
  Scalar mu = 0;    // temporal-smoothness penalty
  long t = 0;       // ticks processed
  bool has_beta = false;
};

template <typename Scalar = double>
struct SpreadTick {
  long t;
  Scalar p1;
  Scalar p2;
  Scalar beta;
  Scalar y;  // p1 - beta * p2
};

/// Seeds the accumulators (defaults S1 = s1 = 0).
template <typename Scalar>
FlsState<Scalar> fls_init(Scalar S1, Scalar s1, Scalar mu) {
  if (!(mu >= 0)) throw ArgumentError("fls_init: mu must be nonnegative");
  if (!(S1 >= 0)) throw ArgumentError("fls_init: S1 must be nonnegative");
  FlsState<Scalar> state;
  state.S = S1;
  state.s = s1;
  state.mu = mu;
  return state;
}

template <typename Scalar>
struct FlsStepResult {
  FlsState<Scalar> state;
  Scalar beta;
};

/// One tick of the recursion:
///   beta_t = (s_{t-1} + p1 p2) / (S_{t-1} + p2^2)
///   S_t    = mu (S_{t-1} + p2^2)      / (S_{t-1} + mu + p2^2)
///   s_t    = mu (s_{t-1} + p1 p2)     / (S_{t-1} + mu + p2^2)
/// beta_t is the filtered estimate given prices up to tick t; it equals the
/// final coordinate of the minimizer of the penalized batch cost over those
/// ticks when started from S = s = 0.
template <typename Scalar>
FlsStepResult<Scalar> fls_step(const FlsState<Scalar>& state, Scalar p1,
                               Scalar p2) {
  if (!std::isfinite(p1) || !std::isfinite(p2))
    throw ArgumentError("fls_step: non-finite price rejected");
  const Scalar pivot = state.S + p2 * p2;
  if (!(pivot > 0))
    throw DegenerateRegressorError("fls_step: S + p2^2 must be positive");

  FlsStepResult<Scalar> out;
  out.beta = (state.s + p1 * p2) / pivot;
  const Scalar denom = state.S + state.mu + p2 * p2;
  out.state.mu = state.mu;
  out.state.S = state.mu * pivot / denom;
  out.state.s = state.mu * (state.s + p1 * p2) / denom;
  out.state.beta = out.beta;
  out.state.t = state.t + 1;
  out.state.has_beta = true;
  return out;
}

/// Spread construction y = p1 - beta * p2.
template <typename Scalar>
SpreadTick<Scalar> make_spread(Scalar p1, Scalar p2, Scalar beta) {
  return {0, p1, p2, beta, p1 - beta * p2};
}

/// Runs the recursion over a whole price pair series. With `demean`, running
/// means of p1 and p2 are subtracted before each tick enters the recursion
/// (an opt-in stand-in for the spread intercept; the first tick enters
/// unmodified since its own mean would zero it). The emitted ticks carry the
/// prices actually regressed, keeping y = p1 - beta * p2 exact.
template <typename Scalar>
std::vector<SpreadTick<Scalar>> run_fls(std::span<const Scalar> p1,
                                        std::span<const Scalar> p2, Scalar mu,
                                        bool demean = false) {
  if (p1.size() != p2.size())
    throw ArgumentError("run_fls: price series differ in length");
  auto state = fls_init<Scalar>(0, 0, mu);
  std::vector<SpreadTick<Scalar>> ticks;
  ticks.reserve(p1.size());
  Scalar sum1 = 0;
  Scalar sum2 = 0;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    Scalar a = p1[i];
    Scalar b = p2[i];
    sum1 += a;
    sum2 += b;
    if (demean && i > 0) {
      const Scalar inv = Scalar(1) / Scalar(i + 1);
      a -= sum1 * inv;
      b -= sum2 * inv;
    }
    const auto stepped = fls_step(state, a, b);
    state = stepped.state;
    auto tick = make_spread(a, b, stepped.beta);
    tick.t = static_cast<long>(i + 1);
    ticks.push_back(tick);
  }
  return ticks;
}

}  // namespace spreadmon
