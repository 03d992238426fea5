#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "spreadmon/filter.hpp"
#include "spreadmon/student_t.hpp"

namespace spreadmon {

/**
 * Model assessment from step records: MSSE, predictive log-likelihood,
 * AIC/BIC, sequential Bayes factors, and exhaustive grid-search optimization
 * of the hyperparameter quadruple.
 */

template <typename Scalar = double>
struct DiagnosticsReport {
  Scalar msse = 0;
  Scalar log_likelihood = 0;
  Scalar aic = 0;
  Scalar bic = 0;
  long count = 0;    // scored ticks
  long skipped = 0;  // records with n_prev <= 2, excluded from the MSSE
};

template <typename Scalar = double>
struct BayesFactorSeries {
  std::vector<Scalar> h;        // per-tick H_t > 0
  Scalar cumulative_log_h = 0;  // loglik(M1) - loglik(M2)
  Scalar mean = 0;
  Scalar min = 0;
  Scalar max = 0;
};

/// Candidate lists per hyperparameter. With `enforce_constraint` the
/// expansion keeps only points with delta_i < phi_i^2 (both components),
/// the convergence condition of the limiting-covariance series.
template <typename Scalar = double>
struct HyperGrid {
  std::vector<Scalar> phi1{1};
  std::vector<Scalar> phi2{1};
  std::vector<Scalar> delta1{1};
  std::vector<Scalar> delta2{1};
  bool enforce_constraint = false;

  std::vector<Hyperparams<Scalar>> expand() const {
    std::vector<Hyperparams<Scalar>> points;
    for (Scalar p1 : phi1)
      for (Scalar p2 : phi2)
        for (Scalar a : delta1)
          for (Scalar b : delta2) {
            if (enforce_constraint && !(a < p1 * p1 && b < p2 * p2)) continue;
            points.push_back(Hyperparams<Scalar>{p1, p2, a, b});
          }
    return points;
  }

  /// Free hyperparameters: dimensions offering more than one candidate.
  int free_count() const {
    auto distinct = [](const std::vector<Scalar>& v) {
      std::vector<Scalar> u(v);
      std::sort(u.begin(), u.end());
      u.erase(std::unique(u.begin(), u.end()), u.end());
      return u.size() > 1 ? 1 : 0;
    };
    return distinct(phi1) + distinct(phi2) + distinct(delta1) +
           distinct(delta2);
  }
};

namespace detail {

/// Log one-step predictive density of a record: Student-t with n_prev dof,
/// location f, squared scale Q * S_prev, evaluated at the observed y = f + e.
template <typename Scalar>
Scalar record_log_density(const StepRecord<Scalar>& rec) {
  const Scalar scale2 = rec.Q * rec.S_prev;
  if (!(scale2 > 0))
    throw InvalidRecordError("log_likelihood: Q * S_prev must be positive");
  const Scalar nu = rec.n_prev;
  return std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) -
         Scalar(0.5) * std::log(Scalar(3.141592653589793238462643383279502884L) * nu) -
         Scalar(0.5) * std::log(scale2) -
         (nu + 1) / 2 * std::log1p(rec.e * rec.e / (nu * scale2));
}

}  // namespace detail

/// Mean of squared standardized forecast errors. With u_t = e_t /
/// sqrt(Q_t S_{t-1}) ~ t(n_{t-1}), each v_t^2 = (1 - 2/n_{t-1}) u_t^2 has
/// unit expectation; records with n_prev <= 2 are skipped (v_t undefined)
/// and counted in `skipped`.
template <typename Scalar>
Scalar msse(std::span<const StepRecord<Scalar>> records,
            long* skipped = nullptr) {
  Scalar sum = 0;
  long scored = 0;
  long dropped = 0;
  for (const auto& rec : records) {
    if (!(rec.n_prev > 2)) {
      ++dropped;
      continue;
    }
    const Scalar scale2 = rec.Q * rec.S_prev;
    if (!(scale2 > 0))
      throw InvalidRecordError("msse: Q * S_prev must be positive");
    const Scalar u2 = rec.e * rec.e / scale2;
    sum += (1 - 2 / rec.n_prev) * u2;
    ++scored;
  }
  if (skipped) *skipped = dropped;
  if (scored == 0) throw EmptyInputError("msse: no scorable records");
  return sum / Scalar(scored);
}

/// Sum of log one-step predictive densities (the log-likelihood of the
/// hyperparameter quadruple given the record stream).
template <typename Scalar>
Scalar log_likelihood(std::span<const StepRecord<Scalar>> records) {
  if (records.empty()) throw EmptyInputError("log_likelihood: no records");
  Scalar total = 0;
  for (const auto& rec : records) total += detail::record_log_density(rec);
  return total;
}

/// aic = -2 loglik + 2k, bic = -2 loglik + k log T.
template <typename Scalar>
std::pair<Scalar, Scalar> aic_bic(Scalar loglik, int k, long T) {
  if (T < 1) throw ArgumentError("aic_bic: T must be at least 1");
  if (k < 0) throw ArgumentError("aic_bic: k must be nonnegative");
  return {-2 * loglik + 2 * Scalar(k),
          -2 * loglik + Scalar(k) * std::log(Scalar(T))};
}

/// Sequential Bayes factors H_t of model 1 against model 2, both scored on
/// the same observation stream. Each H_t is the literal ratio of the two
/// one-step predictive t densities; the cumulative log Bayes factor is
/// accumulated as loglik(M1) - loglik(M2).
template <typename Scalar>
BayesFactorSeries<Scalar> bayes_factors(
    std::span<const StepRecord<Scalar>> records1,
    std::span<const StepRecord<Scalar>> records2) {
  if (records1.size() != records2.size())
    throw ArgumentError("bayes_factors: record streams differ in length");
  if (records1.empty()) throw EmptyInputError("bayes_factors: no records");
  BayesFactorSeries<Scalar> series;
  series.h.reserve(records1.size());
  Scalar ll1 = 0;
  Scalar ll2 = 0;
  for (std::size_t i = 0; i < records1.size(); ++i) {
    const Scalar lp1 = detail::record_log_density(records1[i]);
    const Scalar lp2 = detail::record_log_density(records2[i]);
    ll1 += lp1;
    ll2 += lp2;
    series.h.push_back(std::exp(lp1 - lp2));
  }
  series.cumulative_log_h = ll1 - ll2;
  series.min = *std::min_element(series.h.begin(), series.h.end());
  series.max = *std::max_element(series.h.begin(), series.h.end());
  Scalar sum = 0;
  for (Scalar value : series.h) sum += value;
  series.mean = sum / Scalar(series.h.size());
  return series;
}

template <typename Scalar = double>
struct GridPoint {
  Hyperparams<Scalar> hyper;
  Scalar log_likelihood;
  Scalar aic;
  Scalar bic;
};

template <typename Scalar = double>
struct OptimizeResult {
  Hyperparams<Scalar> best;
  DiagnosticsReport<Scalar> report;            // diagnostics of the best point
  std::vector<GridPoint<Scalar>> table;        // all points, ranked
};

/// Exhaustive, deterministic grid search maximizing the log-likelihood.
/// Ties are broken toward the smoother model: larger delta2, then larger
/// delta1 (then larger phi2, phi1 for full determinism).
template <typename Scalar>
OptimizeResult<Scalar> optimize_hyperparams(std::span<const Scalar> y,
                                            const PriorSpec<Scalar>& prior,
                                            const HyperGrid<Scalar>& grid) {
  if (y.size() < 10)
    throw ArgumentError("optimize_hyperparams: series too short (< 10)");
  const auto points = grid.expand();
  if (points.empty())
    throw ArgumentError(
        "optimize_hyperparams: grid empty after constraint filtering");

  const int k = grid.free_count();
  const long T = static_cast<long>(y.size());

  OptimizeResult<Scalar> result;
  result.table.reserve(points.size());
  for (const auto& hyper : points) {
    const auto records = run_series(prior, hyper, y);
    const Scalar ll =
        log_likelihood(std::span<const StepRecord<Scalar>>(records));
    const auto [aic, bic] = aic_bic(ll, k, T);
    result.table.push_back({hyper, ll, aic, bic});
  }

  auto better = [](const GridPoint<Scalar>& a, const GridPoint<Scalar>& b) {
    return std::tie(a.log_likelihood, a.hyper.delta2, a.hyper.delta1,
                    a.hyper.phi2, a.hyper.phi1) >
           std::tie(b.log_likelihood, b.hyper.delta2, b.hyper.delta1,
                    b.hyper.phi2, b.hyper.phi1);
  };
  std::stable_sort(result.table.begin(), result.table.end(), better);
  result.best = result.table.front().hyper;

  const auto records = run_series(prior, result.best, y);
  const std::span<const StepRecord<Scalar>> span(records);
  result.report.log_likelihood = result.table.front().log_likelihood;
  result.report.aic = result.table.front().aic;
  result.report.bic = result.table.front().bic;
  result.report.msse = msse(span, &result.report.skipped);
  result.report.count = static_cast<long>(records.size());
  return result;
}

}  // namespace spreadmon
