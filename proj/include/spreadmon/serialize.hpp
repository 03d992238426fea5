#pragma once

#include <json.hpp>

#include "spreadmon/asymptotics.hpp"
#include "spreadmon/diagnostics.hpp"
#include "spreadmon/filter.hpp"
#include "spreadmon/monitor.hpp"

namespace spreadmon {

/**
 * JSON serialization of the checkpoint/resume types and the report types.
 * Field names are part of the file contract: FilterState uses exactly
 * {t, m, P, n, d, S, y_prev}; StepRecord uses {t, f, Q, e, r, n_prev, S_prev}.
 * An unseeded state serializes y_prev as null.
 */

inline nlohmann::json to_json(const FilterState<double>& state) {
  nlohmann::json j;
  j["t"] = state.t;
  j["m"] = {state.m(0), state.m(1)};
  j["P"] = {{state.P(0, 0), state.P(0, 1)}, {state.P(1, 0), state.P(1, 1)}};
  j["n"] = state.n;
  j["d"] = state.d;
  j["S"] = state.S;
  if (state.seeded)
    j["y_prev"] = state.y_prev;
  else
    j["y_prev"] = nullptr;
  return j;
}

inline FilterState<double> filter_state_from_json(const nlohmann::json& j) {
  FilterState<double> state;
  state.t = j.at("t").get<long>();
  state.m << j.at("m").at(0).get<double>(), j.at("m").at(1).get<double>();
  state.P << j.at("P").at(0).at(0).get<double>(),
      j.at("P").at(0).at(1).get<double>(),
      j.at("P").at(1).at(0).get<double>(),
      j.at("P").at(1).at(1).get<double>();
  state.n = j.at("n").get<double>();
  state.d = j.at("d").get<double>();
  state.S = j.at("S").get<double>();
  if (j.at("y_prev").is_null()) {
    state.seeded = false;
  } else {
    state.y_prev = j.at("y_prev").get<double>();
    state.seeded = true;
  }
  return state;
}

inline nlohmann::json to_json(const StepRecord<double>& rec) {
  return {{"t", rec.t},           {"f", rec.f},
          {"Q", rec.Q},           {"e", rec.e},
          {"r", rec.r},           {"n_prev", rec.n_prev},
          {"S_prev", rec.S_prev}};
}

inline StepRecord<double> step_record_from_json(const nlohmann::json& j) {
  StepRecord<double> rec;
  rec.t = j.at("t").get<long>();
  rec.f = j.at("f").get<double>();
  rec.Q = j.at("Q").get<double>();
  rec.e = j.at("e").get<double>();
  rec.r = j.at("r").get<double>();
  rec.n_prev = j.at("n_prev").get<double>();
  rec.S_prev = j.at("S_prev").get<double>();
  return rec;
}

inline nlohmann::json to_json(const CredibleInterval<double>& ci) {
  return {{"center", ci.center},
          {"lower", ci.lower},
          {"upper", ci.upper},
          {"level", ci.level},
          {"dof", ci.dof}};
}

inline nlohmann::json to_json(const MonitorVerdict<double>& v) {
  return {{"t", v.t},
          {"b_hat", v.b_hat},
          {"interval", to_json(v.interval)},
          {"point_rule", v.point_rule},
          {"conservative_rule", v.conservative_rule}};
}

inline nlohmann::json to_json(const DiagnosticsReport<double>& report) {
  return {{"msse", report.msse},
          {"log_likelihood", report.log_likelihood},
          {"aic", report.aic},
          {"bic", report.bic},
          {"count", report.count},
          {"skipped", report.skipped}};
}

inline nlohmann::json to_json(const ConvergenceReport<double>& report) {
  return {{"p11_limit", report.p11_limit},
          {"p22_limit", report.p22_limit},
          {"truncation_error", report.truncation_error},
          {"observed_p11", report.observed_p11},
          {"observed_p22", report.observed_p22},
          {"max_offdiag", report.max_offdiag},
          {"rel_dev_p11", report.rel_dev_p11},
          {"rel_dev_p22", report.rel_dev_p22},
          {"ticks_checked", report.ticks_checked},
          {"converged", report.converged}};
}

}  // namespace spreadmon
