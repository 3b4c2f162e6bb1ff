#include "cli.hpp"

#include "commands.hpp"

#include "extdep/serialization.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace extdep::cli {

namespace {

constexpr const char* kOutputEnv = "EXTDEP_OUTPUT_DIR";

bool given(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

std::optional<std::string> config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void add_output_dir(CLI::App* sub, std::string& dir) {
  sub->add_option("--output-dir", dir, "Directory for output files (created if missing)")->envname(kOutputEnv);
}

}  // namespace

std::vector<std::string> merge_config_file(const std::vector<std::string>& args, const std::string& text,
                                           const std::function<ConfigOption(const std::string&)>& lookup) {
  std::vector<std::pair<std::string, std::string>> kv;
  try {
    kv = parse_key_values(text);
  } catch (const DataError& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
  std::vector<std::string> out = args;
  for (const auto& [key, value] : kv) {
    const ConfigOption opt = key == "config" ? ConfigOption{} : lookup(key);
    if (!opt.known) throw ConfigError("config file: unknown key '" + key + "'");
    const std::string flag = "--" + key;
    if (given(args, flag)) continue;  // command line wins
    if (opt.is_flag) {
      if (value == "true" || value == "1" || value == "yes" || value == "on")
        out.push_back(flag);
      else if (value != "false" && value != "0" && value != "no" && value != "off")
        throw ConfigError("config file: '" + key + "' expects true or false");
      continue;
    }
    out.push_back(flag);
    out.push_back(value);
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Fit and use parametric models for multivariate extremal dependence", "extdep"};
  app.require_subcommand(1);
  std::string config;

  FitArgs fit;
  auto* s_fit = app.add_subcommand("fit", "Fit margins and angular models to a data file");
  s_fit->add_option("--input", fit.input, "CSV file with a header row")->required();
  s_fit->add_option("--columns", fit.columns, "Columns to analyse (2 to 4)")->delimiter(',')->required();
  s_fit->add_option("--threshold-quantile", fit.threshold_quantile, "Marginal threshold quantile")
      ->capture_default_str();
  s_fit->add_option("--k", fit.k, "Number of largest excesses kept (default 100, or 200 when d = 4)");
  s_fit->add_option("--families", fit.families, "Families to fit: AL, TD, PB, HR, ET")
      ->delimiter(',')
      ->capture_default_str();
  s_fit->add_option("--engine", fit.engine, "mle, bayes or both")->capture_default_str();
  s_fit->add_option("--seed", fit.seed, "Seed for optimizer starts and MCMC")->capture_default_str();
  s_fit->add_option("--starts", fit.starts, "Optimizer starts per family")->capture_default_str();
  s_fit->add_option("--mcmc-iter", fit.mcmc_iter, "MCMC iterations including burn-in")->capture_default_str();
  s_fit->add_option("--burn-in", fit.burn_in, "MCMC burn-in iterations")->capture_default_str();
  s_fit->add_flag("--allow-small-sample", fit.allow_small_sample, "Fit even when m < 5p");
  add_output_dir(s_fit, fit.output_dir);

  PredictArgs pred;
  auto* s_pred = app.add_subcommand("predict", "Model and empirical probabilities of extreme events");
  s_pred->add_option("--model", pred.model, "Model file written by fit")->required();
  s_pred->add_option("--margins", pred.margins, "margins.json written by fit")->required();
  s_pred->add_option("--events", pred.events, "CSV with columns event, mode and raw thresholds")->required();
  s_pred->add_option("--input", pred.input, "Raw data for empirical counts");
  add_output_dir(s_pred, pred.output_dir);

  ReturnLevelArgs rl;
  auto* s_rl = app.add_subcommand("return-levels", "Joint return levels and contours");
  s_rl->add_option("--model", rl.model, "Model file written by fit")->required();
  s_rl->add_option("--margins", rl.margins, "margins.json written by fit")->required();
  s_rl->add_option("--free", rl.free, "Column whose level is solved for")->required();
  s_rl->add_option("--free2", rl.free2, "Second free column (contour mode)");
  s_rl->add_option("--fixed", rl.fixed, "Fixed raw thresholds, COL=value,...")->delimiter(',');
  s_rl->add_option("--p", rl.p, "Exceedance probabilities")->delimiter(',')->capture_default_str();
  s_rl->add_option("--points", rl.points, "Points per contour")->capture_default_str();
  s_rl->add_option("--input", rl.input, "Raw data for empirical points");
  add_output_dir(s_rl, rl.output_dir);

  DensityGridArgs grid;
  auto* s_grid = app.add_subcommand("density-grid", "Log angular density on a barycentric grid (d = 3)");
  s_grid->add_option("--model", grid.model, "Model file")->required();
  s_grid->add_option("--resolution", grid.resolution, "Grid resolution R (step 1/(2R))")->capture_default_str();
  add_output_dir(s_grid, grid.output_dir);

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "Draw angular points from a model");
  s_sim->add_option("--model", sim.model, "Model file")->required();
  s_sim->add_option("--n", sim.n, "Number of draws")->capture_default_str();
  s_sim->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  add_output_dir(s_sim, sim.output_dir);

  DiagnoseArgs diag;
  auto* s_diag = app.add_subcommand("diagnose", "Convergence diagnostics for an exported chain");
  s_diag->add_option("--chain", diag.chain, "Chain CSV written by fit")->required();
  add_output_dir(s_diag, diag.output_dir);

  for (auto* sub : app.get_subcommands({})) sub->add_option("--config", config, "key = value settings file");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (const auto path = config_path(args); path && !args.empty()) {
      CLI::App* sub = nullptr;
      try {
        sub = app.get_subcommand(args.front());
      } catch (const CLI::OptionNotFound&) {
      }
      if (sub) {
        args = merge_config_file(args, read_text(*path), [sub](const std::string& key) {
          const CLI::Option* o = sub->get_option_no_throw("--" + key);
          if (!o) return ConfigOption{};
          return ConfigOption{true, o->get_expected_max() == 0};
        });
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigFailure;
  }

  std::vector<char*> cargs{argv[0]};
  for (auto& a : args) cargs.push_back(a.data());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kConfigFailure;
  }

  try {
    if (s_fit->parsed()) return cmd_fit(fit);
    if (s_pred->parsed()) return cmd_predict(pred);
    if (s_rl->parsed()) return cmd_return_levels(rl);
    if (s_grid->parsed()) return cmd_density_grid(grid);
    if (s_sim->parsed()) return cmd_simulate(sim);
    if (s_diag->parsed()) return cmd_diagnose(diag);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kConfigFailure;
}

}  // namespace extdep::cli
