#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <span>
#include <string>
#include <vector>

#include "spreadmon/asymptotics.hpp"
#include "spreadmon/config.hpp"
#include "spreadmon/csv.hpp"
#include "spreadmon/diagnostics.hpp"
#include "spreadmon/filter.hpp"
#include "spreadmon/fls.hpp"
#include "spreadmon/monitor.hpp"
#include "spreadmon/serialize.hpp"
#include "spreadmon/simulate.hpp"

namespace spreadmon::app {

/**
 * Run orchestration behind the CLI: a RunConfig assembled from a key=value
 * config (with flag overrides) drives one of the seven modes and writes the
 * plot-ready per-tick outputs. Everything here is deterministic: identical
 * configs and inputs produce byte-identical files.
 */

enum class Mode { simulate, filter, monitor, optimize, diagnose, fls, verify };

inline Mode mode_from_string(const std::string& name) {
  if (name == "simulate") return Mode::simulate;
  if (name == "filter") return Mode::filter;
  if (name == "monitor") return Mode::monitor;
  if (name == "optimize") return Mode::optimize;
  if (name == "diagnose") return Mode::diagnose;
  if (name == "fls") return Mode::fls;
  if (name == "verify") return Mode::verify;
  throw ArgumentError("unknown mode: " + name);
}

struct RunConfig {
  Mode mode = Mode::monitor;
  std::filesystem::path input;
  std::filesystem::path output;
  PriorSpec<double> prior;
  Hyperparams<double> hyper{1.0, 1.0, 1.0, 0.98};
  HyperGrid<double> grid;
  bool grid_given = false;
  double gamma = 0.05;
  double threshold = 0.0;
  double mu = 1e6;
  bool demean = false;
  bool diagonal_p = false;
  std::string signal_reference = "forecast";  // or "posterior"
  int k_free = 4;
  std::uint64_t seed = 0;

  // simulate mode
  std::string scenario = "static";  // static | level_jump | b_jump | tvar
  StaticSsSpec static_spec;
  std::vector<ParamJump> jumps;
  long jump_tick = 0;  // 0 = the named scenario's default tick
  double jump_A = 20.0;
  double jump_B = 1.0;
  TvarSpec tvar_spec;
  bool emit_state = false;

  // verify mode
  double rel_tol = 0.05;
  double last_fraction = 0.10;
  long truncation = 0;
};

namespace detail_app {

inline Matrix2<double> parse_p1(const KeyValueConfig& config) {
  Matrix2<double> p1 = Matrix2<double>::Identity() * 1000.0;
  if (!config.has("P1")) return p1;
  const auto cells = config.get_list("P1");
  if (cells.size() == 1) {
    p1 = Matrix2<double>::Identity() * cells[0];
  } else if (cells.size() == 2) {
    p1 = Matrix2<double>::Zero();
    p1(0, 0) = cells[0];
    p1(1, 1) = cells[1];
  } else if (cells.size() == 4) {
    p1 << cells[0], cells[1], cells[2], cells[3];
  } else {
    throw ArgumentError("config key 'P1': expected 1, 2 or 4 values");
  }
  return p1;
}

/// Jump schedule syntax: "tick:A=value;tick:B=value;..."
inline std::vector<ParamJump> parse_jumps(const std::string& text) {
  std::vector<ParamJump> jumps;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ';')) {
    item = spreadmon::detail::trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    const auto eq = item.find('=');
    if (colon == std::string::npos || eq == std::string::npos || eq < colon)
      throw ArgumentError("config key 'jumps': expected tick:A=value or "
                          "tick:B=value, got: " + item);
    double tick = 0;
    double value = 0;
    const std::string target =
        spreadmon::detail::trim(item.substr(colon + 1, eq - colon - 1));
    if (!spreadmon::detail::parse_double(item.substr(0, colon), tick) ||
        !spreadmon::detail::parse_double(item.substr(eq + 1), value))
      throw ArgumentError("config key 'jumps': bad numbers in: " + item);
    if (target != "A" && target != "B")
      throw ArgumentError("config key 'jumps': target must be A or B");
    jumps.push_back({static_cast<long>(tick),
                     target == "A" ? ParamJump::Target::A
                                   : ParamJump::Target::B,
                     value});
  }
  return jumps;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.empty()) throw ArgumentError("output path required");
  std::ofstream file(path, std::ios::binary);
  if (!file)
    throw ArgumentError("cannot open output file for writing: " +
                        path.string());
  return file;
}

inline std::filesystem::path summary_path(const std::filesystem::path& out) {
  auto p = out;
  p += ".summary.json";
  return p;
}

inline void write_json(const std::filesystem::path& path,
                       const nlohmann::json& payload) {
  auto file = open_output(path);
  file << payload.dump(2) << '\n';
}

inline void warn_rejected(const IngestedSeries& series) {
  for (long line : series.rejected_lines)
    std::cerr << "warning: rejected unparseable row at line " << line << '\n';
}

/// Observed spread plus pass-through labels, either direct or FLS-built.
struct SpreadSeries {
  std::vector<std::string> dates;
  std::vector<double> y;
  std::vector<long> rejected_lines;
};

inline SpreadSeries load_spread(const RunConfig& config) {
  const auto ingested = ingest_csv(config.input);
  warn_rejected(ingested);
  SpreadSeries out;
  out.dates = ingested.dates;
  out.rejected_lines = ingested.rejected_lines;
  if (ingested.kind == SeriesKind::univariate) {
    out.y = ingested.col1;
  } else {
    const auto ticks = run_fls<double>(ingested.col1, ingested.col2,
                                       config.mu, config.demean);
    out.y.reserve(ticks.size());
    for (const auto& tick : ticks) out.y.push_back(tick.y);
  }
  return out;
}

}  // namespace detail_app

/// Assembles a RunConfig from parsed key=value pairs (defaults documented in
/// the README; every hyperparameter has a named key).
inline RunConfig load_run_config(Mode mode, const KeyValueConfig& config) {
  RunConfig run;
  run.mode = mode;
  run.input = config.get_string("input");
  run.output = config.get_string("output");

  const auto m1 = config.get_list("m1");
  if (!m1.empty()) {
    if (m1.size() != 2)
      throw ArgumentError("config key 'm1': expected two values");
    run.prior.m1 << m1[0], m1[1];
  }
  run.prior.P1 = detail_app::parse_p1(config);
  run.prior.n1 = config.get_double("n1", 3.0);
  run.prior.d1 = config.get_double("d1", 1.0);

  run.hyper.phi1 = config.get_double("phi1", 1.0);
  run.hyper.phi2 = config.get_double("phi2", 1.0);
  run.hyper.delta1 = config.get_double("delta1", 1.0);
  run.hyper.delta2 = config.get_double("delta2", 0.98);

  run.gamma = config.get_double("gamma", 0.05);
  run.threshold = config.get_double("threshold", 0.0);
  run.mu = config.get_double("mu", 1e6);
  run.demean = config.get_bool("demean", false);
  run.diagonal_p = config.get_bool("diagonal_p", false);
  run.signal_reference = config.get_string("signal_reference", "forecast");
  if (run.signal_reference != "forecast" &&
      run.signal_reference != "posterior")
    throw ArgumentError(
        "config key 'signal_reference': expected forecast or posterior");
  run.k_free = static_cast<int>(config.get_long("k", 4));
  run.seed = static_cast<std::uint64_t>(config.get_long("seed", 0));

  if (config.has("grid_phi1") || config.has("grid_phi2") ||
      config.has("grid_delta1") || config.has("grid_delta2")) {
    run.grid_given = true;
    auto or_default = [&](const char* key, double fallback) {
      auto list = config.get_list(key);
      if (list.empty()) list = {fallback};
      return list;
    };
    run.grid.phi1 = or_default("grid_phi1", run.hyper.phi1);
    run.grid.phi2 = or_default("grid_phi2", run.hyper.phi2);
    run.grid.delta1 = or_default("grid_delta1", run.hyper.delta1);
    run.grid.delta2 = or_default("grid_delta2", run.hyper.delta2);
    run.grid.enforce_constraint = config.get_bool("grid_constraint", false);
  }

  run.scenario = config.get_string("scenario", "static");
  run.static_spec.A = config.get_double("A", 0.2);
  run.static_spec.B = config.get_double("B", 0.25);
  run.static_spec.C = config.get_double("C", 1.0);
  run.static_spec.D = config.get_double("D", 0.0);
  run.static_spec.x1 = config.get_double("x1", 0.0);
  run.static_spec.T = config.get_long("T", 3000);
  run.static_spec.seed = run.seed;
  run.jumps = detail_app::parse_jumps(config.get_string("jumps"));
  run.jump_tick = config.get_long("jump_tick", 0);
  run.jump_A = config.get_double("jump_A", 20.0);
  run.jump_B = config.get_double("jump_B", 1.0);
  run.emit_state = config.get_bool("emit_state", false);

  run.tvar_spec.hyper = run.hyper;
  run.tvar_spec.sigma2 = config.get_double("sigma2", 1.0);
  run.tvar_spec.V(0, 0) = config.get_double("v11", 0.0);
  run.tvar_spec.V(0, 1) = config.get_double("v12", 0.0);
  run.tvar_spec.V(1, 0) = run.tvar_spec.V(0, 1);
  run.tvar_spec.V(1, 1) = config.get_double("v22", 0.0);
  run.tvar_spec.theta1 << config.get_double("theta1_a", 0.0),
      config.get_double("theta1_b", 0.0);
  run.tvar_spec.y1 = config.get_double("y1", 0.0);
  run.tvar_spec.T = run.static_spec.T;
  run.tvar_spec.seed = run.seed;

  run.rel_tol = config.get_double("rel_tol", 0.05);
  run.last_fraction = config.get_double("last_fraction", 0.10);
  run.truncation = config.get_long("truncation", 0);
  return run;
}

namespace detail_app {

inline void run_simulate(const RunConfig& config) {
  auto file = open_output(config.output);
  if (config.scenario == "tvar") {
    if (config.emit_state)
      throw ArgumentError("simulate: emit_state applies to static scenarios");
    const auto path = simulate_tvar(config.tvar_spec);
    file << "t,y\n";
    for (std::size_t i = 0; i < path.y.size(); ++i)
      file << (i + 1) << ',' << format_sig12(path.y[i]) << '\n';
    return;
  }

  // Named scenarios share the static base (whose keys may be overridden)
  // and add their default jump when no explicit schedule is given.
  ScenarioSpec spec;
  spec.base = config.static_spec;
  spec.jumps = config.jumps;
  if (config.scenario == "level_jump") {
    if (spec.jumps.empty())
      spec.jumps = {{config.jump_tick > 0 ? config.jump_tick : 1500,
                     ParamJump::Target::A, config.jump_A}};
  } else if (config.scenario == "b_jump") {
    if (spec.jumps.empty())
      spec.jumps = {{config.jump_tick > 0 ? config.jump_tick : 1501,
                     ParamJump::Target::B, config.jump_B}};
  } else if (config.scenario != "static") {
    throw ArgumentError("simulate: unknown scenario: " + config.scenario);
  }

  const auto path = scenario_path(spec);
  if (config.emit_state) {
    file << "t,x,y\n";
    for (std::size_t i = 0; i < path.y.size(); ++i)
      file << (i + 1) << ',' << format_sig12(path.x[i]) << ','
           << format_sig12(path.y[i]) << '\n';
  } else {
    file << "t,y\n";
    for (std::size_t i = 0; i < path.y.size(); ++i)
      file << (i + 1) << ',' << format_sig12(path.y[i]) << '\n';
  }
}

inline void run_monitor(const RunConfig& config) {
  const auto series = load_spread(config);
  if (series.y.size() < 2)
    throw ArgumentError("filter/monitor: need at least two observations");

  TvarFilter<double> filter(config.prior, config.hyper, config.diagonal_p);
  std::vector<StepRecord<double>> records;
  records.reserve(series.y.size() - 1);

  auto file = open_output(config.output);
  file << "t,date,y,f,Q,e,b_hat,b_lo,b_hi,mean_reverting,S,signal\n";
  for (std::size_t i = 0; i < series.y.size(); ++i) {
    const double y = series.y[i];
    const auto record = filter.observe(y);
    if (!record) continue;
    records.push_back(*record);
    const auto v = verdict(record->posterior, config.gamma);
    const double reference = config.signal_reference == "forecast"
                                 ? record->f
                                 : y - record->r;
    const auto sig = signal(y, reference, config.threshold);
    file << record->t << ',' << series.dates[i] << ',' << format_sig12(y)
         << ',' << format_sig12(record->f) << ',' << format_sig12(record->Q)
         << ',' << format_sig12(record->e) << ',' << format_sig12(v.b_hat)
         << ',' << format_sig12(v.interval.lower) << ','
         << format_sig12(v.interval.upper) << ',' << (v.point_rule ? 1 : 0)
         << ',' << format_sig12(record->posterior.S) << ','
         << to_string(sig.direction) << '\n';
  }

  const std::span<const StepRecord<double>> span(records);
  DiagnosticsReport<double> report;
  report.log_likelihood = log_likelihood(span);
  report.msse = msse(span, &report.skipped);
  report.count = static_cast<long>(records.size());
  const auto [aic, bic] = aic_bic(report.log_likelihood, config.k_free,
                                  report.count);
  report.aic = aic;
  report.bic = bic;

  nlohmann::json summary = to_json(report);
  summary["final_verdict"] = to_json(verdict(filter.state(), config.gamma));
  summary["final_state"] = to_json(filter.state());
  summary["rejected_rows"] = series.rejected_lines;
  write_json(summary_path(config.output), summary);
}

inline void run_optimize(const RunConfig& config) {
  if (!config.grid_given)
    throw ArgumentError("optimize: no grid_* candidate lists supplied");
  const auto series = load_spread(config);
  const auto result = optimize_hyperparams<double>(series.y, config.prior,
                                                   config.grid);

  auto file = open_output(config.output);
  file << "rank,phi1,phi2,delta1,delta2,log_likelihood,aic,bic\n";
  long rank = 1;
  for (const auto& point : result.table) {
    file << rank++ << ',' << format_sig12(point.hyper.phi1) << ','
         << format_sig12(point.hyper.phi2) << ','
         << format_sig12(point.hyper.delta1) << ','
         << format_sig12(point.hyper.delta2) << ','
         << format_sig12(point.log_likelihood) << ','
         << format_sig12(point.aic) << ',' << format_sig12(point.bic) << '\n';
  }

  nlohmann::json summary;
  summary["best"] = {{"phi1", result.best.phi1},
                     {"phi2", result.best.phi2},
                     {"delta1", result.best.delta1},
                     {"delta2", result.best.delta2}};
  summary["report"] = to_json(result.report);
  write_json(summary_path(config.output), summary);
}

inline void run_diagnose(const RunConfig& config) {
  const auto series = load_spread(config);
  const auto records = run_series<double>(config.prior, config.hyper,
                                          series.y, config.diagonal_p);
  const std::span<const StepRecord<double>> span(records);
  DiagnosticsReport<double> report;
  report.log_likelihood = log_likelihood(span);
  report.msse = msse(span, &report.skipped);
  report.count = static_cast<long>(records.size());
  const auto [aic, bic] = aic_bic(report.log_likelihood, config.k_free,
                                  report.count);
  report.aic = aic;
  report.bic = bic;
  write_json(config.output, to_json(report));
}

inline void run_fls_mode(const RunConfig& config) {
  const auto ingested = ingest_csv(config.input);
  warn_rejected(ingested);
  if (ingested.kind != SeriesKind::pair)
    throw ArgumentError("fls: input must be a (date,p1,p2) pair file");
  const auto ticks = run_fls<double>(ingested.col1, ingested.col2, config.mu,
                                     config.demean);
  auto file = open_output(config.output);
  file << "t,p1,p2,beta,y\n";
  for (const auto& tick : ticks)
    file << tick.t << ',' << format_sig12(tick.p1) << ','
         << format_sig12(tick.p2) << ',' << format_sig12(tick.beta) << ','
         << format_sig12(tick.y) << '\n';
}

inline void run_verify(const RunConfig& config) {
  const auto series = load_spread(config);
  const auto records = run_series<double>(config.prior, config.hyper,
                                          series.y, config.diagonal_p);
  ConvergenceOptions opts;
  opts.rel_tol = config.rel_tol;
  opts.last_fraction = config.last_fraction;
  opts.truncation = config.truncation;
  const Vector2<double> p1_diag(config.prior.P1(0, 0), config.prior.P1(1, 1));
  const auto report = verify_convergence<double>(records, config.hyper,
                                                 series.y, p1_diag, opts);
  write_json(config.output, to_json(report));
}

}  // namespace detail_app

/// Executes one mode; throws on failure (the CLI maps exceptions to exit
/// codes).
inline void run(const RunConfig& config) {
  switch (config.mode) {
    case Mode::simulate: detail_app::run_simulate(config); return;
    case Mode::filter:
    case Mode::monitor: detail_app::run_monitor(config); return;
    case Mode::optimize: detail_app::run_optimize(config); return;
    case Mode::diagnose: detail_app::run_diagnose(config); return;
    case Mode::fls: detail_app::run_fls_mode(config); return;
    case Mode::verify: detail_app::run_verify(config); return;
  }
  throw ArgumentError("run: unhandled mode");
}

}  // namespace spreadmon::app
