// envgame command-line front end.
//
// Subcommands:
//   list-presets         show the scenario catalog
//   simulate             integrate a scenario's dynamics without optimizing
//   optimize             run the hill-climbing optimizer on a scenario
//   classify             label the dynamical regime of a payoff choice
//   sweep                repeat a scenario over a list of values of one field
//
// Exit codes: 0 success, 1 configuration error (the message names the
// offending field), 2 numerical failure (the message carries the iteration
// and time of failure).

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "envgame/scenarios.hpp"

namespace {

using namespace envgame;

struct CommonArgs {
  std::string preset_name;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;  // dotted-path assignments, e.g. problem.c2=0.001
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--preset", args.preset_name, "Preset scenario name (see list-presets)");
  cmd->add_option("--config", args.config_path, "Scenario config file path");
  cmd->add_option("--out", args.out_dir, "Output directory (default: <out-root>/<name>)");
  cmd->add_option("--set", args.overrides,
                  "Override a config field by dotted path, e.g. --set problem.c2=0.001")
      ->take_all();
  cmd->add_flag("-q,--quiet", args.quiet, "Suppress per-iteration progress lines");
}

std::string out_root() {
  if (const char* env = std::getenv("ENVGAME_OUT_ROOT")) return env;
  return "runs";
}

ScenarioConfig resolve_config(const CommonArgs& args) {
  if (args.preset_name.empty() == args.config_path.empty())
    throw ConfigError("config: give exactly one of --preset or --config");
  ScenarioConfig cfg = args.preset_name.empty() ? load_config_file(args.config_path)
                                                : preset(args.preset_name);
  for (const std::string& ov : args.overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set: expected <section.key>=<value>, got '" + ov + "'");
    set_config_field(cfg, ov.substr(0, eq), ov.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

fs::path resolve_out_dir(const CommonArgs& args, const ScenarioConfig& cfg) {
  if (!args.out_dir.empty()) return args.out_dir;
  return fs::path(out_root()) / cfg.name;
}

ProgressFn progress_printer(bool quiet) {
  if (quiet) return {};
  return [](const IterationLog& log) {
    std::printf("iter=%d J=%.10g theta=%.6g ell=%d wall_ms=%.1f\n", log.iter, log.objective,
                log.theta, log.ell, log.wall_ms);
    std::fflush(stdout);
  };
}

int cmd_run(const CommonArgs& args, RunMode mode) {
  const ScenarioConfig cfg = resolve_config(args);
  const fs::path out = resolve_out_dir(args, cfg);
  const ScenarioResult res = run_scenario(cfg, out, mode, progress_printer(args.quiet));
  if (res.record) {
    std::printf("%s: J=%.10g theta=%.6g %s-> %s\n", cfg.name.c_str(),
                res.record->objective_value, res.record->theta_value,
                res.record->converged ? "(converged) " : (res.record->stalled ? "(stalled) " : ""),
                out.string().c_str());
  } else {
    std::printf("%s: simulated -> %s\n", cfg.name.c_str(), out.string().c_str());
  }
  return 0;
}

int cmd_classify(const std::vector<double>& a0, const std::vector<double>& a1, double theta) {
  auto row4 = [](const std::vector<double>& v, const char* field) {
    if (v.size() != 4) throw ConfigError(std::string(field) + ": expected R,S,T,P");
    return PayoffMatrix::from_row({v[0], v[1], v[2], v[3]});
  };
  const GamePayoffs game(row4(a1, "a1"), row4(a0, "a0"), theta);
  const RegimeReport rep = classify_regime(game);
  std::printf("%s\n", to_string(rep.label));
  std::printf("deplete-state game class: %s\n", to_string(rep.deplete_class));
  if (rep.fixed_point) {
    std::printf("interior fixed point: x*=%.10g n*=%.10g\n", rep.fixed_point->x,
                rep.fixed_point->n);
    std::printf("eigenvalues: %.6g%+.6gi, %.6g%+.6gi\n", rep.eigenvalues[0].real(),
                rep.eigenvalues[0].imag(), rep.eigenvalues[1].real(), rep.eigenvalues[1].imag());
  } else {
    std::printf("interior fixed point: none\n");
  }
  std::printf("diagnostic: n_final=%.4g n_max_late=%.4g oscillations=%d depleted=%s%s\n",
              rep.n_final, rep.n_max_late, rep.oscillations, rep.depleted ? "yes" : "no",
              rep.boundary_case ? " (boundary case)" : "");
  return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& axis, const std::string& values_csv) {
  const ScenarioConfig cfg = resolve_config(args);
  std::vector<double> values;
  std::stringstream ss(values_csv);
  std::string cell;
  while (std::getline(ss, cell, ','))
    values.push_back(config_detail::parse_num("--values", config_detail::trim(cell)));
  const fs::path out = args.out_dir.empty()
                           ? fs::path(out_root()) / (cfg.name + "-sweep")
                           : fs::path(args.out_dir);
  const auto rows = sweep(cfg, axis, values, out);
  int failures = 0;
  for (const auto& r : rows) {
    if (r.ok) {
      std::printf("%s=%s J=%s theta=%s regime=%s oscillations=%d\n", axis.c_str(),
                  num_str(r.value).c_str(), r.objective ? num_str(*r.objective).c_str() : "-",
                  r.theta ? num_str(*r.theta).c_str() : "-", r.regime.c_str(), r.oscillations);
    } else {
      ++failures;
      std::printf("%s=%s FAILED: %s\n", axis.c_str(), num_str(r.value).c_str(), r.error.c_str());
    }
  }
  std::printf("summary: %s\n", (out / "summary.csv").string().c_str());
  return failures == static_cast<int>(rows.size()) && !rows.empty() ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and optimal-control solver for coupled population-environment games"};
  app.name("envgame");
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("list-presets", "List the built-in scenario catalog");

  CommonArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Integrate a scenario without optimizing");
  add_common(sim_cmd, sim_args);

  CommonArgs opt_args;
  auto* opt_cmd = app.add_subcommand("optimize", "Run the hill-climbing optimizer");
  add_common(opt_cmd, opt_args);

  std::vector<double> cls_a0, cls_a1{3.0, 1.0, 6.0, 2.0};
  double cls_theta = 0.5;
  auto* cls_cmd = app.add_subcommand("classify", "Classify the dynamical regime of a payoff choice");
  cls_cmd->add_option("--a0", cls_a0, "Deplete-state payoffs R,S,T,P")->required()->delimiter(',');
  cls_cmd->add_option("--a1", cls_a1, "Replete-state payoffs R,S,T,P (default 3,1,6,2)")
      ->delimiter(',');
  cls_cmd->add_option("--theta", cls_theta, "Cooperator enhancement rate (default 0.5)");

  CommonArgs sweep_args;
  std::string sweep_axis, sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario across values of one field");
  add_common(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--axis", sweep_axis, "Dotted config field to vary, e.g. problem.c2")
      ->required();
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& name : envgame::preset_names()) std::printf("%s\n", name.c_str());
      return 0;
    }
    if (sim_cmd->parsed()) return cmd_run(sim_args, envgame::RunMode::Simulate);
    if (opt_cmd->parsed()) return cmd_run(opt_args, envgame::RunMode::Optimize);
    if (cls_cmd->parsed()) return cmd_classify(cls_a0, cls_a1, cls_theta);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_args, sweep_axis, sweep_values);
  } catch (const envgame::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const envgame::OptimizeError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const envgame::IntegrationError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
