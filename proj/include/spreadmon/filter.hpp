#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "spreadmon/errors.hpp"

namespace spreadmon {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

/**
 * Conjugate recursive estimation of the time-varying AR(1) spread model
 *
 *   y_t     = A_t + B_t y_{t-1} + eps_t,          eps_t ~ N(0, sigma^2)
 *   theta_t = Phi theta_{t-1} + nu_t,             nu_t  ~ N2(0, sigma^2 V_t)
 *
 * with theta_t = (A_t, B_t)', Phi = diag(phi1, phi2) and V_t implied by two
 * component discount factors. Each observation advances a
 * Normal/Inverse-Gamma posterior summary (m, P, n, d) in closed form.
 */

/// Evolution coefficients (phi1, phi2) and discount factors (delta1, delta2).
/// phi1 = phi2 = delta1 = delta2 = 1 is the static-coefficient model.
template <typename Scalar = double>
struct Hyperparams {
  Scalar phi1 = 1;
  Scalar phi2 = 1;
  Scalar delta1 = 1;
  Scalar delta2 = 1;

  Matrix2<Scalar> phi_matrix() const {
    Matrix2<Scalar> phi = Matrix2<Scalar>::Zero();
    phi(0, 0) = phi1;
    phi(1, 1) = phi2;
    return phi;
  }

  bool is_static_model() const {
    return phi1 == 1 && phi2 == 1 && delta1 == 1 && delta2 == 1;
  }

  void validate() const {
    if (!std::isfinite(phi1) || !std::isfinite(phi2) || phi1 == 0 || phi2 == 0)
      throw ArgumentError("Hyperparams: phi1, phi2 must be finite and nonzero");
    if (!(delta1 > 0 && delta1 <= 1) || !(delta2 > 0 && delta2 <= 1))
      throw ArgumentError("Hyperparams: delta1, delta2 must lie in (0,1]");
  }
};

/// Prior quadruple (m1, P1, n1, d1): theta_1 | sigma^2 ~ N2(m1, sigma^2 P1),
/// sigma^2 ~ IG(n1/2, d1/2).
template <typename Scalar = double>
struct PriorSpec {
  Vector2<Scalar> m1 = Vector2<Scalar>::Zero();
  Matrix2<Scalar> P1 = Matrix2<Scalar>::Identity() * Scalar(1000);
  Scalar n1 = 3;
  Scalar d1 = 1;

  void validate() const {
    if (!m1.allFinite() || !P1.allFinite())
      throw InvalidPriorError("PriorSpec: non-finite prior values");
    if (!(n1 > 0)) throw InvalidPriorError("PriorSpec: n1 must be positive");
    if (!(d1 > 0)) throw InvalidPriorError("PriorSpec: d1 must be positive");
    if (std::abs(P1(0, 1) - P1(1, 0)) >
        Scalar(1e-12) * std::max<Scalar>(1, P1.cwiseAbs().maxCoeff()))
      throw InvalidPriorError("PriorSpec: P1 must be symmetric");
    // 2x2 positive definiteness: positive diagonal and positive determinant.
    if (!(P1(0, 0) > 0) || !(P1(1, 1) > 0) ||
        !(P1(0, 0) * P1(1, 1) - P1(0, 1) * P1(1, 0) > 0))
      throw InvalidPriorError("PriorSpec: P1 must be positive definite");
  }
};

/// Full posterior summary after observing y^t, plus the lagged observation
/// that defines the next regressor F_{t+1} = (1, y_t)'.
template <typename Scalar = double>
struct FilterState {
  long t = 1;
  Vector2<Scalar> m = Vector2<Scalar>::Zero();
  Matrix2<Scalar> P = Matrix2<Scalar>::Zero();
  Scalar n = 0;
  Scalar d = 0;
  Scalar S = 0;
  Scalar y_prev = std::numeric_limits<Scalar>::quiet_NaN();
  bool seeded = false;
};

/// Per-tick forecast quantities and the posterior they produced.
template <typename Scalar = double>
struct StepRecord {
  long t = 0;
  Scalar f = 0;       // one-step forecast mean F' Phi m
  Scalar Q = 0;       // scaled forecast variance, >= 1
  Scalar e = 0;       // forecast error y - f
  Scalar r = 0;       // posterior residual y - F' m_t
  Scalar n_prev = 0;  // degrees of freedom before the update
  Scalar S_prev = 0;  // scale estimate before the update
  FilterState<Scalar> posterior;
};

template <typename Scalar>
struct StepResult {
  FilterState<Scalar> state;
  StepRecord<Scalar> record;
};

/// One-step-ahead Student-t predictive parameters: location, squared scale
/// (Q_{t+1} S_t) and degrees of freedom (n_t).
template <typename Scalar>
struct PredictiveForecast {
  Scalar location;
  Scalar scale2;
  Scalar dof;
};

namespace detail {

template <typename Scalar>
Scalar min_eigenvalue_sym2(const Matrix2<Scalar>& a) {
  const Scalar mean = (a(0, 0) + a(1, 1)) / 2;
  const Scalar radius = std::hypot((a(0, 0) - a(1, 1)) / 2, a(0, 1));
  return mean - radius;
}

template <typename Scalar>
void check_psd(const Matrix2<Scalar>& p, const char* where) {
  const Scalar tr = p.trace();
  if (!p.allFinite() || tr < 0 ||
      min_eigenvalue_sym2(p) < Scalar(-1e-9) * std::max<Scalar>(tr, 0))
    throw ConditioningError(std::string(where) +
                            ": covariance lost positive semidefiniteness");
}

}  // namespace detail

/// Validates the prior and hyperparameters and returns the t=1 state. The
/// state carries no regressor yet; seed the first observation with
/// `seed_first` (it performs no posterior update) before the first `step`.
template <typename Scalar>
FilterState<Scalar> init(const PriorSpec<Scalar>& prior,
                         const Hyperparams<Scalar>& hyper) {
  prior.validate();
  hyper.validate();
  FilterState<Scalar> state;
  state.t = 1;
  state.m = prior.m1;
  state.P = prior.P1;
  state.n = prior.n1;
  state.d = prior.d1;
  state.S = prior.d1 / prior.n1;
  return state;
}

/// Consumes the first observation y_1: seeds y_prev, leaves the posterior
/// untouched.
template <typename Scalar>
FilterState<Scalar> seed_first(FilterState<Scalar> state, Scalar y1) {
  if (state.seeded)
    throw ArgumentError("seed_first: state already carries an observation");
  if (!std::isfinite(y1))
    throw ArgumentError("seed_first: non-finite observation rejected");
  state.y_prev = y1;
  state.seeded = true;
  return state;
}

/// Component-discount evolution covariance
///   V_t = diag(delta1^{-1}(1-delta1) phi1^2 p11, delta2^{-1}(1-delta2) phi2^2 p22)
/// so that R_t = Phi P_{t-1} Phi + V_t has diagonal entries phi_i^2 p_ii / delta_i.
template <typename Scalar>
Matrix2<Scalar> discount_evolution_covariance(const Matrix2<Scalar>& p_prev,
                                              const Hyperparams<Scalar>& hyper) {
  Matrix2<Scalar> v = Matrix2<Scalar>::Zero();
  v(0, 0) = (1 - hyper.delta1) / hyper.delta1 * hyper.phi1 * hyper.phi1 *
            p_prev(0, 0);
  v(1, 1) = (1 - hyper.delta2) / hyper.delta2 * hyper.phi2 * hyper.phi2 *
            p_prev(1, 1);
  return v;
}

/// Advances the posterior by one observation:
///   R = Phi P Phi + V,  F = (1, y_prev)',  Q = F'RF + 1,  e = y - F'Phi m,
///   K = RF/Q,  m' = Phi m + K e,  P' = R - K K' Q,
///   r = y - F'm',  n' = n+1,  d' = d + r e,  S' = d'/n'.
/// P' is symmetrized; losing PSD beyond 1e-9 * trace raises ConditioningError.
/// With `diagonal_p` the off-diagonal of P' is zeroed after each update (the
/// diagonal-covariance special configuration).
template <typename Scalar>
StepResult<Scalar> step(const FilterState<Scalar>& state,
                        const Hyperparams<Scalar>& hyper, Scalar y,
                        bool diagonal_p = false) {
  if (!state.seeded)
    throw ArgumentError("step: seed_first must supply y_1 before stepping");
  if (!std::isfinite(y))
    throw ArgumentError("step: non-finite observation rejected");

  const Matrix2<Scalar> phi = hyper.phi_matrix();
  Matrix2<Scalar> r_mat =
      phi * state.P * phi + discount_evolution_covariance(state.P, hyper);
  r_mat = ((r_mat + r_mat.transpose()) / 2).eval();
  detail::check_psd(r_mat, "step");

  const Vector2<Scalar> f_vec(Scalar(1), state.y_prev);
  Scalar q_form = f_vec.dot(r_mat * f_vec);
  if (q_form < 0) q_form = 0;  // PSD already verified; absorb rounding only
  const Scalar q = q_form + 1;

  const Scalar f = f_vec.dot(phi * state.m);
  const Scalar e = y - f;
  const Vector2<Scalar> gain = (r_mat * f_vec) / q;

  StepResult<Scalar> out;
  out.state.t = state.t + 1;
  out.state.m = phi * state.m + gain * e;
  Matrix2<Scalar> p_new = r_mat - gain * gain.transpose() * q;
  p_new = ((p_new + p_new.transpose()) / 2).eval();
  detail::check_psd(p_new, "step");
  if (diagonal_p) {
    p_new(0, 1) = 0;
    p_new(1, 0) = 0;
  }
  out.state.P = p_new;

  const Scalar resid = y - f_vec.dot(out.state.m);
  out.state.n = state.n + 1;
  out.state.d = state.d + resid * e;
  out.state.S = out.state.d / out.state.n;
  out.state.y_prev = y;
  out.state.seeded = true;

  out.record.t = out.state.t;
  out.record.f = f;
  out.record.Q = q;
  out.record.e = e;
  out.record.r = resid;
  out.record.n_prev = state.n;
  out.record.S_prev = state.S;
  out.record.posterior = out.state;
  return out;
}

/// One-step-ahead predictive y_{t+1} | y^t ~ t(n_t, f_{t+1}, Q_{t+1} S_t).
template <typename Scalar>
PredictiveForecast<Scalar> forecast(const FilterState<Scalar>& state,
                                    const Hyperparams<Scalar>& hyper) {
  if (!state.seeded)
    throw ArgumentError("forecast: state carries no observation yet");
  const Matrix2<Scalar> phi = hyper.phi_matrix();
  const Matrix2<Scalar> r_mat =
      phi * state.P * phi + discount_evolution_covariance(state.P, hyper);
  const Vector2<Scalar> f_vec(Scalar(1), state.y_prev);
  const Scalar q = std::max<Scalar>(f_vec.dot(r_mat * f_vec), 0) + 1;
  return {f_vec.dot(phi * state.m), q * state.S, state.n};
}

/// Ergonomic wrapper holding the hyperparameters next to the running state.
/// `observe` seeds on the first call (returning nothing) and steps afterwards.
template <typename Scalar = double>
class TvarFilter {
 public:
  TvarFilter(const PriorSpec<Scalar>& prior, const Hyperparams<Scalar>& hyper,
             bool diagonal_p = false)
      : hyper_(hyper), state_(init(prior, hyper)), diagonal_p_(diagonal_p) {}

  std::optional<StepRecord<Scalar>> observe(Scalar y) {
    if (!state_.seeded) {
      state_ = seed_first(state_, y);
      return std::nullopt;
    }
    auto result = step(state_, hyper_, y, diagonal_p_);
    state_ = result.state;
    return result.record;
  }

  const FilterState<Scalar>& state() const { return state_; }
  const Hyperparams<Scalar>& hyper() const { return hyper_; }
  bool diagonal_p() const { return diagonal_p_; }

 private:
  Hyperparams<Scalar> hyper_;
  FilterState<Scalar> state_;
  bool diagonal_p_;
};

/// Filters a whole series (first element seeds, the rest step) and returns
/// the T-1 step records.
template <typename Scalar>
std::vector<StepRecord<Scalar>> run_series(const PriorSpec<Scalar>& prior,
                                           const Hyperparams<Scalar>& hyper,
                                           std::span<const Scalar> y,
                                           bool diagonal_p = false) {
  if (y.size() < 2)
    throw ArgumentError("run_series: at least two observations required");
  TvarFilter<Scalar> filter(prior, hyper, diagonal_p);
  std::vector<StepRecord<Scalar>> records;
  records.reserve(y.size() - 1);
  for (Scalar value : y) {
    if (auto rec = filter.observe(value)) records.push_back(*rec);
  }
  return records;
}

}  // namespace spreadmon
