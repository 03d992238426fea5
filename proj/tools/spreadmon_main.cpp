#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "spreadmon/app.hpp"

namespace {

// Exit codes: 0 ok, 1 argument/config error, 2 missing input file,
// 3 malformed header, 4 empty input body, 5 numeric conditioning failure,
// 70 unexpected internal error. CLI11 usage errors keep CLI11's own codes.

struct FlagOverrides {
  std::string config_path;
  std::string input;
  std::string output;
  std::string grid;
  long seed = -1;
  double gamma = -1;
  double phi1 = 0, phi2 = 0, delta1 = 0, delta2 = 0;
  double mu = -1;
  double threshold = -1;
  bool has_phi1 = false, has_phi2 = false, has_delta1 = false,
       has_delta2 = false;
};

void apply_grid_flag(spreadmon::KeyValueConfig& config,
                     const std::string& grid) {
  // --grid "phi2=0.9,1.0;delta2=0.95,0.98" expands to grid_* keys.
  std::stringstream stream(grid);
  std::string item;
  while (std::getline(stream, item, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw spreadmon::ArgumentError(
          "--grid: expected name=v1,v2,... entries separated by ';'");
    const std::string key = spreadmon::detail::trim(item.substr(0, eq));
    if (key != "phi1" && key != "phi2" && key != "delta1" && key != "delta2")
      throw spreadmon::ArgumentError("--grid: unknown parameter: " + key);
    config.set("grid_" + key, spreadmon::detail::trim(item.substr(eq + 1)));
  }
}

int dispatch(const std::string& mode_name, const FlagOverrides& flags) {
  using spreadmon::app::Mode;
  try {
    spreadmon::KeyValueConfig config;
    if (!flags.config_path.empty())
      config = spreadmon::KeyValueConfig::parse_file(flags.config_path);
    if (!flags.input.empty()) config.set("input", flags.input);
    if (!flags.output.empty()) config.set("output", flags.output);
    if (flags.seed >= 0) config.set("seed", std::to_string(flags.seed));
    if (flags.gamma >= 0) config.set("gamma", std::to_string(flags.gamma));
    if (flags.mu >= 0) config.set("mu", std::to_string(flags.mu));
    if (flags.threshold >= 0)
      config.set("threshold", std::to_string(flags.threshold));
    if (flags.has_phi1) config.set("phi1", std::to_string(flags.phi1));
    if (flags.has_phi2) config.set("phi2", std::to_string(flags.phi2));
    if (flags.has_delta1) config.set("delta1", std::to_string(flags.delta1));
    if (flags.has_delta2) config.set("delta2", std::to_string(flags.delta2));
    if (!flags.grid.empty()) apply_grid_flag(config, flags.grid);

    const Mode mode = spreadmon::app::mode_from_string(mode_name);
    spreadmon::app::run(spreadmon::app::load_run_config(mode, config));
    return 0;
  } catch (const spreadmon::IoError& err) {
    std::cerr << "error: " << err.what() << '\n';
    switch (err.kind()) {
      case spreadmon::IoError::Kind::missing_file: return 2;
      case spreadmon::IoError::Kind::bad_header: return 3;
      case spreadmon::IoError::Kind::empty_body: return 4;
    }
    return 70;
  } catch (const spreadmon::ConditioningError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 5;
  } catch (const spreadmon::DegenerateRegressorError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 5;
  } catch (const spreadmon::ArgumentError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << '\n';
    return 70;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "spreadmon: streaming Bayesian estimation and mean-reversion "
      "monitoring of price spreads"};
  app.require_subcommand(1);

  FlagOverrides flags;
  std::string chosen;
  for (const char* name :
       {"simulate", "filter", "monitor", "optimize", "diagnose", "fls",
        "verify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", flags.config_path,
                    "key=value configuration file");
    sub->add_option("--input", flags.input, "input CSV path");
    sub->add_option("--output", flags.output, "output path");
    sub->add_option("--seed", flags.seed, "PRNG seed");
    sub->add_option("--gamma", flags.gamma, "credible-interval gamma");
    sub->add_option("--phi1", flags.phi1)->each([&](const std::string&) {
      flags.has_phi1 = true;
    });
    sub->add_option("--phi2", flags.phi2)->each([&](const std::string&) {
      flags.has_phi2 = true;
    });
    sub->add_option("--delta1", flags.delta1)->each([&](const std::string&) {
      flags.has_delta1 = true;
    });
    sub->add_option("--delta2", flags.delta2)->each([&](const std::string&) {
      flags.has_delta2 = true;
    });
    sub->add_option("--mu", flags.mu, "FLS smoothness penalty");
    sub->add_option("--threshold", flags.threshold, "trade signal threshold");
    sub->add_option("--grid", flags.grid,
                    "grid candidates, e.g. \"delta2=0.95,0.98;phi2=1\"");
    sub->callback([&chosen, name] { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);
  return dispatch(chosen, flags);
}
