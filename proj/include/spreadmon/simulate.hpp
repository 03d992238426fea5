#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <vector>

#include "spreadmon/errors.hpp"
#include "spreadmon/filter.hpp"
#include "spreadmon/rng.hpp"

namespace spreadmon {

/**
 * Synthetic data generators for the static state-space spread model and the
 * time-varying AR(1) model, plus the two jump scenarios used throughout the
 * tests. All draws come from NormalRng in a fixed, documented order, so every
 * series is reproducible from its spec alone.
 */

/// Static state-space model x_t = A + B x_{t-1} + eps_t (sd C),
/// y_t = x_t + omega_t (sd D).
struct StaticSsSpec {
  double A = 0.2;
  double B = 0.25;
  double C = 1.0;
  double D = 0.0;
  double x1 = 0.0;
  long T = 3000;
  std::uint64_t seed = 0;

  void validate() const {
    if (T < 2) throw ArgumentError("StaticSsSpec: T must be at least 2");
    if (!(C >= 0) || !(D >= 0))
      throw ArgumentError("StaticSsSpec: C and D must be nonnegative");
  }
};

/// Generative TVAR(1): theta_t = Phi theta_{t-1} + nu_t with
/// nu_t ~ N2(0, sigma2 V), y_t = theta_{1t} + theta_{2t} y_{t-1} + eps_t with
/// eps_t ~ N(0, sigma2).
struct TvarSpec {
  Hyperparams<double> hyper;
  Matrix2<double> V = Matrix2<double>::Zero();
  double sigma2 = 1.0;
  Vector2<double> theta1 = Vector2<double>::Zero();
  double y1 = 0.0;
  long T = 3000;
  std::uint64_t seed = 0;

  void validate() const {
    if (T < 2) throw ArgumentError("TvarSpec: T must be at least 2");
    // sigma2 = 0 is allowed so the noiseless product identity is generable
    if (!(sigma2 >= 0))
      throw ArgumentError("TvarSpec: sigma2 must be nonnegative");
    if (std::abs(V(0, 1) - V(1, 0)) >
        1e-12 * std::max(1.0, V.cwiseAbs().maxCoeff()))
      throw ArgumentError("TvarSpec: V must be symmetric");
    const double tr = V.trace();
    if (tr < 0 || detail::min_eigenvalue_sym2(V) < -1e-9 * std::max(tr, 0.0))
      throw ArgumentError("TvarSpec: V must be positive semidefinite");
  }
};

/// A single parameter change: from `tick` onward, A or B takes `value`.
struct ParamJump {
  enum class Target { A, B };
  long tick;
  Target target;
  double value;
};

/// Piecewise-constant scenario: a static base plus scheduled A/B jumps.
struct ScenarioSpec {
  StaticSsSpec base;
  std::vector<ParamJump> jumps;

  void validate() const {
    base.validate();
    long prev = 1;
    for (const auto& jump : jumps) {
      if (jump.tick <= prev || jump.tick >= base.T)
        throw ArgumentError(
            "ScenarioSpec: jump ticks must be strictly increasing in (1, T)");
      prev = jump.tick;
    }
  }
};

struct StaticPath {
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

/// Draw order per series: omega_1; then for t = 2..T (eps_t, omega_t).
/// Both draws are consumed even when C or D is zero.
inline StaticPath piecewise_static_path(const StaticSsSpec& spec,
                                        const std::vector<ParamJump>& jumps) {
  StaticPath path;
  path.x.resize(static_cast<std::size_t>(spec.T));
  path.y.resize(static_cast<std::size_t>(spec.T));
  NormalRng rng(spec.seed);
  double a = spec.A;
  double b = spec.B;
  path.x[0] = spec.x1;
  path.y[0] = spec.x1 + spec.D * rng.normal();
  for (long t = 2; t <= spec.T; ++t) {
    for (const auto& jump : jumps) {
      if (jump.tick == t) {
        (jump.target == ParamJump::Target::A ? a : b) = jump.value;
      }
    }
    const double eps = spec.C * rng.normal();
    const double omega = spec.D * rng.normal();
    const auto i = static_cast<std::size_t>(t - 1);
    path.x[i] = a + b * path.x[i - 1] + eps;
    path.y[i] = path.x[i] + omega;
  }
  return path;
}

/// Symmetric PSD square root of a 2x2 matrix (eigendecomposition, negative
/// eigenvalues within tolerance clamped to zero).
inline Matrix2<double> psd_sqrt(const Matrix2<double>& v) {
  Eigen::SelfAdjointEigenSolver<Matrix2<double>> solver(v);
  Vector2<double> roots;
  for (int i = 0; i < 2; ++i)
    roots(i) = std::sqrt(std::max(solver.eigenvalues()(i), 0.0));
  return solver.eigenvectors() * roots.asDiagonal() *
         solver.eigenvectors().transpose();
}

}  // namespace detail

/// Simulates the static model; deterministic given the seed.
inline StaticPath simulate_static(const StaticSsSpec& spec) {
  spec.validate();
  return detail::piecewise_static_path(spec, {});
}

struct TvarPath {
  std::vector<Vector2<double>> theta;
  std::vector<double> y;
};

/// Simulates the TVAR(1) model. Draw order per tick t = 2..T:
/// (nu_1t, nu_2t, eps_t); t = 1 consumes no draws (theta1, y1 given).
inline TvarPath simulate_tvar(const TvarSpec& spec) {
  spec.validate();
  TvarPath path;
  path.theta.resize(static_cast<std::size_t>(spec.T));
  path.y.resize(static_cast<std::size_t>(spec.T));
  NormalRng rng(spec.seed);
  const Matrix2<double> phi = spec.hyper.phi_matrix();
  const Matrix2<double> chol = detail::psd_sqrt(spec.V);
  const double sigma = std::sqrt(spec.sigma2);
  path.theta[0] = spec.theta1;
  path.y[0] = spec.y1;
  for (long t = 2; t <= spec.T; ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    Vector2<double> z(rng.normal(), rng.normal());
    path.theta[i] = phi * path.theta[i - 1] + sigma * (chol * z);
    path.y[i] = path.theta[i](0) + path.theta[i](1) * path.y[i - 1] +
                sigma * rng.normal();
  }
  return path;
}

/// Full (x, y) path of a jump scenario.
inline StaticPath scenario_path(const ScenarioSpec& spec) {
  spec.validate();
  return detail::piecewise_static_path(spec.base, spec.jumps);
}

/// Simulates a jump scenario; with an empty schedule the output equals
/// simulate_static(spec.base) for the same seed.
inline std::vector<double> simulate_scenario(const ScenarioSpec& spec) {
  return scenario_path(spec).y;
}

/// Level-jump scenario: AR-form spread (C=1, D=0, so sigma^2 = 1) around
/// equilibrium A/(1-B) = 0.267 that jumps to a much higher equilibrium at
/// t = 1500 via A: 0.2 -> 20.
inline ScenarioSpec level_jump_scenario(std::uint64_t seed,
                                        double post_jump_A = 20.0,
                                        long jump_tick = 1500) {
  ScenarioSpec spec;
  spec.base = StaticSsSpec{0.2, 0.25, 1.0, 0.0, 0.0, 3000, seed};
  spec.jumps = {{jump_tick, ParamJump::Target::A, post_jump_A}};
  return spec;
}

/// B-jump scenario: A = 0.2, B_t = 0.25 and sigma^2 = 1 for t <= 1500;
/// B_t = 1 for 1501 <= t <= 3000.
inline ScenarioSpec b_jump_scenario(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.base = StaticSsSpec{0.2, 0.25, 1.0, 0.0, 0.0, 3000, seed};
  spec.jumps = {{1501, ParamJump::Target::B, 1.0}};
  return spec;
}

}  // namespace spreadmon
