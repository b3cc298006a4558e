#pragma once
// Scenario configuration, the preset catalog, run persistence, and sweeps.
//
// Configs are flat, human-editable key = value documents with one section
// per concern ([problem], [optimizer], [integrator], [output]); see
// serialize_config for the canonical field order. Parsing then serializing
// reproduces a canonical document byte for byte.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "envgame/climb.hpp"
#include "envgame/csv.hpp"
#include "envgame/regime.hpp"
#include "envgame/version.hpp"

namespace envgame {

namespace fs = std::filesystem;

enum class ScenarioKind { Incentive, Propaganda, Awareness, Compare };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Incentive: return "incentive";
    case ScenarioKind::Propaganda: return "propaganda";
    case ScenarioKind::Awareness: return "awareness";
    case ScenarioKind::Compare: return "compare";
  }
  return "?";
}

// Shortest round-trip decimal representation; keeps configs readable and
// reruns byte-identical.
inline std::string num_str(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string num_str(int v) { return std::to_string(v); }

struct ScenarioConfig {
  std::string name;

  // problem
  ScenarioKind kind = ScenarioKind::Incentive;
  std::array<double, 4> a1{3.0, 1.0, 6.0, 2.0};
  std::array<double, 4> a0{4.5, 4.0, 3.0, 3.0};
  double theta = 0.5;
  std::optional<double> gamma;
  double x0 = 0.5;
  double n0 = 0.3;
  std::optional<double> o0;
  double tf = 50.0;
  std::optional<double> u_max;
  std::optional<double> c1;
  std::optional<double> c2;

  // optimizer (unused for compare scenarios)
  double alpha = 0.5;
  double beta = 0.5;
  int iters = 20;
  int ell_max = 30;
  double grid_dt = 0.01;
  InitControl init_control = InitControl::Zero;

  // integrator
  double rel_tol = 1e-8;
  double abs_tol = 1e-8;
  double max_step = 0.0;  // 0: defaults to tf / 100 when the problem is built
  double initial_step = 1e-3;

  // output
  double tail = 0.0;
  double sample_dt = 0.1;

  bool three_state() const { return kind != ScenarioKind::Incentive; }

  GamePayoffs game() const {
    return GamePayoffs(PayoffMatrix::from_row(a1), PayoffMatrix::from_row(a0), theta, gamma);
  }

  SystemState initial_state() const {
    if (three_state()) {
      if (!o0) throw ConfigError("problem.o0: required for three-state scenarios");
      return SystemState{x0, n0, *o0};
    }
    return SystemState{x0, n0, std::nullopt};
  }

  ProblemSpec problem() const {
    if (kind == ScenarioKind::Compare)
      throw ConfigError("problem.kind: compare scenarios have no control problem");
    ProblemKind pk = kind == ScenarioKind::Incentive  ? ProblemKind::Incentive
                     : kind == ScenarioKind::Propaganda ? ProblemKind::Propaganda
                                                        : ProblemKind::Awareness;
    return ProblemSpec{pk, game(), initial_state(), tf, u_max, c1, c2};
  }

  OptimizerConfig optimizer() const { return OptimizerConfig{alpha, beta, iters, ell_max, grid_dt}; }

  IntegratorConfig integrator() const {
    IntegratorConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = abs_tol;
    cfg.max_step = max_step > 0.0 ? max_step : tf / 100.0;
    cfg.initial_step = initial_step;
    return cfg;
  }

  void validate() const {
    if (name.empty()) throw ConfigError("name: must not be empty");
    game();  // payoff invariants
    if (three_state() && !gamma) throw ConfigError("problem.gamma: required for opinion scenarios");
    if (!(tf > 0.0)) throw ConfigError("problem.tf: must be > 0");
    if (kind != ScenarioKind::Compare) {
      problem().validate();
      optimizer().validate();
      ControlSignal probe(tf, grid_dt);  // horizon/grid compatibility
      (void)probe;
    } else if (!initial_state().interior()) {
      throw ConfigError("problem.initial: must be interior");
    }
    integrator().validate();
    if (tail < 0.0) throw ConfigError("output.tail: must be >= 0");
    if (!(sample_dt > 0.0)) throw ConfigError("output.sample_dt: must be > 0");
  }
};

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream out;
  auto row = [&](const char* key, const std::string& v) { out << key << " = " << v << "\n"; };
  out << "name = " << c.name << "\n\n";
  out << "[problem]\n";
  row("kind", to_string(c.kind));
  row("a1", num_str(c.a1[0]) + "," + num_str(c.a1[1]) + "," + num_str(c.a1[2]) + "," +
               num_str(c.a1[3]));
  row("a0", num_str(c.a0[0]) + "," + num_str(c.a0[1]) + "," + num_str(c.a0[2]) + "," +
               num_str(c.a0[3]));
  row("theta", num_str(c.theta));
  if (c.gamma) row("gamma", num_str(*c.gamma));
  row("x0", num_str(c.x0));
  row("n0", num_str(c.n0));
  if (c.o0) row("o0", num_str(*c.o0));
  row("tf", num_str(c.tf));
  if (c.u_max) row("u_max", num_str(*c.u_max));
  if (c.c1) row("c1", num_str(*c.c1));
  if (c.c2) row("c2", num_str(*c.c2));
  if (c.kind != ScenarioKind::Compare) {
    out << "\n[optimizer]\n";
    row("alpha", num_str(c.alpha));
    row("beta", num_str(c.beta));
    row("iters", num_str(c.iters));
    row("ell_max", num_str(c.ell_max));
    row("grid_dt", num_str(c.grid_dt));
    row("init_control", to_string(c.init_control));
  }
  out << "\n[integrator]\n";
  row("rel_tol", num_str(c.rel_tol));
  row("abs_tol", num_str(c.abs_tol));
  row("max_step", num_str(c.max_step));
  row("initial_step", num_str(c.initial_step));
  out << "\n[output]\n";
  row("tail", num_str(c.tail));
  row("sample_dt", num_str(c.sample_dt));
  return out.str();
}

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_num(const std::string& path, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(path + ": not a number: '" + v + "'");
  }
}

inline int parse_int(const std::string& path, const std::string& v) {
  const double x = parse_num(path, v);
  const int i = static_cast<int>(std::llround(x));
  if (std::abs(x - i) > 1e-12) throw ConfigError(path + ": not an integer: '" + v + "'");
  return i;
}

inline std::array<double, 4> parse_row4(const std::string& path, const std::string& v) {
  std::array<double, 4> out{};
  std::stringstream ss(v);
  std::string cell;
  std::size_t i = 0;
  while (std::getline(ss, cell, ',')) {
    if (i >= 4) throw ConfigError(path + ": expected four comma-separated payoffs");
    out[i++] = parse_num(path, trim(cell));
  }
  if (i != 4) throw ConfigError(path + ": expected four comma-separated payoffs");
  return out;
}

}  // namespace config_detail

// Applies one field assignment by dotted path (e.g. "problem.c2"). Shared by
// the parser, CLI --set overrides, and sweep axes.
inline void set_config_field(ScenarioConfig& c, const std::string& path, const std::string& value) {
  using namespace config_detail;
  const std::string v = trim(value);
  if (path == "name") {
    c.name = v;
    return;
  }
  if (path == "problem.kind") {
    if (v == "incentive") c.kind = ScenarioKind::Incentive;
    else if (v == "propaganda") c.kind = ScenarioKind::Propaganda;
    else if (v == "awareness") c.kind = ScenarioKind::Awareness;
    else if (v == "compare") c.kind = ScenarioKind::Compare;
    else throw ConfigError("problem.kind: expected incentive|propaganda|awareness|compare");
    return;
  }
  if (path == "problem.a1") { c.a1 = parse_row4(path, v); return; }
  if (path == "problem.a0") { c.a0 = parse_row4(path, v); return; }
  if (path == "problem.theta") { c.theta = parse_num(path, v); return; }
  if (path == "problem.gamma") { c.gamma = parse_num(path, v); return; }
  if (path == "problem.x0") { c.x0 = parse_num(path, v); return; }
  if (path == "problem.n0") { c.n0 = parse_num(path, v); return; }
  if (path == "problem.o0") { c.o0 = parse_num(path, v); return; }
  if (path == "problem.tf") { c.tf = parse_num(path, v); return; }
  if (path == "problem.u_max") { c.u_max = parse_num(path, v); return; }
  if (path == "problem.c1") { c.c1 = parse_num(path, v); return; }
  if (path == "problem.c2") { c.c2 = parse_num(path, v); return; }
  if (path == "optimizer.alpha") { c.alpha = parse_num(path, v); return; }
  if (path == "optimizer.beta") { c.beta = parse_num(path, v); return; }
  if (path == "optimizer.iters") { c.iters = parse_int(path, v); return; }
  if (path == "optimizer.ell_max") { c.ell_max = parse_int(path, v); return; }
  if (path == "optimizer.grid_dt") { c.grid_dt = parse_num(path, v); return; }
  if (path == "optimizer.init_control") {
    if (v == "zero") c.init_control = InitControl::Zero;
    else if (v == "sign-threshold") c.init_control = InitControl::SignThreshold;
    else throw ConfigError("optimizer.init_control: expected zero|sign-threshold");
    return;
  }
  if (path == "integrator.rel_tol") { c.rel_tol = parse_num(path, v); return; }
  if (path == "integrator.abs_tol") { c.abs_tol = parse_num(path, v); return; }
  if (path == "integrator.max_step") { c.max_step = parse_num(path, v); return; }
  if (path == "integrator.initial_step") { c.initial_step = parse_num(path, v); return; }
  if (path == "output.tail") { c.tail = parse_num(path, v); return; }
  if (path == "output.sample_dt") { c.sample_dt = parse_num(path, v); return; }
  throw ConfigError(path + ": unknown config field");
}

inline ScenarioConfig parse_config(const std::string& text) {
  using namespace config_detail;
  ScenarioConfig c;
  std::istringstream in(text);
  std::string line;
  std::string section;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config: expected 'key = value': '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const std::string path = section.empty() ? key : section + "." + key;
    set_config_field(c, path, value);
  }
  return c;
}

inline ScenarioConfig load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  ScenarioConfig c = parse_config(buf.str());
  if (c.name.empty()) c.name = path.stem().string();
  return c;
}

// ---------------------------------------------------------------------------
// Preset catalog
// ---------------------------------------------------------------------------

inline std::vector<ScenarioConfig> presets() {
  std::vector<ScenarioConfig> all;

  auto incentive = [] {
    ScenarioConfig c;
    c.kind = ScenarioKind::Incentive;
    c.a0 = {4.5, 4.0, 3.0, 3.0};
    c.theta = 0.7;
    c.x0 = 0.7;
    c.n0 = 0.3;
    c.tf = 100.0;
    c.u_max = 1.0;
    c.max_step = 1.0;
    return c;
  };
  {
    ScenarioConfig c = incentive();
    c.name = "incentive-v2-zero";
    c.iters = 40;
    c.init_control = InitControl::Zero;
    all.push_back(c);
  }
  {
    ScenarioConfig c = incentive();
    c.name = "incentive-v2-sgn";
    c.iters = 20;
    c.init_control = InitControl::SignThreshold;
    all.push_back(c);
  }

  auto opinion = [](ScenarioKind kind) {
    ScenarioConfig c;
    c.kind = kind;
    c.a0 = {4.5, 4.0, 3.0, 3.0};
    c.theta = 0.5;
    c.gamma = 0.5;
    c.x0 = 0.5;
    c.n0 = 0.3;
    c.o0 = 0.3;
    c.tf = 50.0;
    c.c1 = 1.0;
    c.c2 = 1.0;
    c.iters = 20;
    c.tail = 50.0;
    c.max_step = 0.5;
    return c;
  };
  {
    ScenarioConfig c = opinion(ScenarioKind::Propaganda);
    c.name = "propaganda-v2-balanced";
    all.push_back(c);
  }
  {
    ScenarioConfig c = opinion(ScenarioKind::Propaganda);
    c.name = "propaganda-v2-cheap";
    c.c2 = 0.001;
    all.push_back(c);
  }
  {
    ScenarioConfig c = opinion(ScenarioKind::Propaganda);
    c.name = "propaganda-toc1-cheap";
    c.a0 = {5.0, 2.0, 3.0, 3.0};
    c.c2 = 0.001;
    all.push_back(c);
  }
  {
    ScenarioConfig c = opinion(ScenarioKind::Awareness);
    c.name = "awareness-v2";
    c.c2 = 0.001;
    all.push_back(c);
  }
  {
    ScenarioConfig c = opinion(ScenarioKind::Awareness);
    c.name = "awareness-otoc";
    c.a0 = {7.0, 4.0, 3.0, 3.0};
    c.c2 = 0.001;
    c.x0 = 0.5;
    c.n0 = 0.8;
    c.o0 = 0.8;
    all.push_back(c);
  }

  auto compare = [](const char* name, std::array<double, 4> a0) {
    ScenarioConfig c;
    c.kind = ScenarioKind::Compare;
    c.name = name;
    c.a0 = a0;
    c.theta = 0.5;
    c.gamma = 0.5;
    c.x0 = 0.5;
    c.n0 = 0.3;
    c.o0 = 0.3;
    c.tf = 100.0;
    c.u_max.reset();
    c.c1.reset();
    c.c2.reset();
    c.max_step = 1.0;
    return c;
  };
  all.push_back(compare("opinion-compare-toc1", {5.0, 2.0, 3.0, 3.0}));
  all.push_back(compare("opinion-compare-v2", {4.5, 4.0, 3.0, 3.0}));
  all.push_back(compare("opinion-compare-otoc", {7.0, 4.0, 3.0, 3.0}));
  return all;
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& c : presets()) names.push_back(c.name);
  return names;
}

inline ScenarioConfig preset(const std::string& name) {
  for (const auto& c : presets())
    if (c.name == name) return c;
  std::string msg = "preset: unknown name '" + name + "'; available:";
  for (const auto& n : preset_names()) msg += " " + n;
  throw ConfigError(msg);
}

// ---------------------------------------------------------------------------
// Trajectory analysis
// ---------------------------------------------------------------------------

struct Peak {
  double t = 0.0;
  double value = 0.0;
};

// Hysteresis peak detector: a maximum is registered once the series has
// dropped more than `prominence` below the running maximum, which suppresses
// interpolation-level wiggles on flat tops. Peaks at the first sample are
// discarded (they are boundary artifacts, not maxima).
inline std::vector<Peak> find_peaks(const std::vector<double>& ts, const std::vector<double>& vs,
                                    double prominence = 1e-3) {
  std::vector<Peak> peaks;
  if (vs.size() < 3) return peaks;
  double run_max = vs[0], t_max = ts[0];
  double run_min = vs[0];
  bool looking_for_peak = true;
  for (std::size_t i = 1; i < vs.size(); ++i) {
    const double v = vs[i];
    if (looking_for_peak) {
      if (v > run_max) {
        run_max = v;
        t_max = ts[i];
      } else if (run_max - v > prominence) {
        if (t_max != ts.front()) peaks.push_back(Peak{t_max, run_max});
        looking_for_peak = false;
        run_min = v;
      }
    } else {
      if (v < run_min) {
        run_min = v;
      } else if (v - run_min > prominence) {
        looking_for_peak = true;
        run_max = v;
        t_max = ts[i];
      }
    }
  }
  return peaks;
}

// Number of episodes with the series above `level`, each necessarily
// separated by a dip below it.
inline int count_high_episodes(const std::vector<double>& vs, double level = 0.5) {
  int count = 0;
  bool above = false;
  for (double v : vs) {
    if (v > level && !above) {
      ++count;
      above = true;
    } else if (v <= level) {
      above = false;
    }
  }
  return count;
}

// Samples coordinate `coord` of a trajectory on a uniform grid.
inline void sample_coordinate(const Trajectory& traj, double t0, double t1, double dt,
                              std::size_t coord, std::vector<double>& ts,
                              std::vector<double>& vs) {
  ts.clear();
  vs.clear();
  for (double t = t0; t <= t1 + 1e-9; t += dt) {
    const double tc = std::min(t, t1);
    ts.push_back(tc);
    vs.push_back(traj.at(tc)[coord]);
  }
}

// ---------------------------------------------------------------------------
// Running scenarios and persisting artifacts
// ---------------------------------------------------------------------------

enum class RunMode { Optimize, Simulate };

struct ScenarioResult {
  ScenarioConfig config;
  RunMode mode = RunMode::Optimize;
  std::optional<RunRecord> record;            // optimize runs
  Trajectory trajectory;                      // cost-augmented state (opinion model for compare)
  std::optional<Trajectory> tail_trajectory;  // uncontrolled continuation past tf
  std::optional<Trajectory> perfect_trajectory;  // compare runs: the two-state model
  fs::path out_dir;

  // Coordinate sample of the primary trajectory (and tail) on [0, tf+tail].
  void sample(std::size_t coord, std::vector<double>& ts, std::vector<double>& vs,
              double dt) const {
    std::vector<double> t2, v2;
    sample_coordinate(trajectory, 0.0, config.tf, dt, coord, ts, vs);
    if (tail_trajectory) {
      sample_coordinate(*tail_trajectory, config.tf, config.tf + config.tail, dt, coord, t2, v2);
      for (std::size_t i = 1; i < t2.size(); ++i) {  // skip the duplicated t = tf node
        ts.push_back(t2[i]);
        vs.push_back(v2[i]);
      }
    }
  }
};

namespace run_detail {

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Uncontrolled continuation of the (augmented) dynamics after the horizon.
inline Trajectory continue_uncontrolled(const ScenarioConfig& cfg, const StateVec& y_end) {
  const GamePayoffs game = cfg.game();
  const std::size_t dim = cfg.three_state() ? 3 : 2;
  auto field = [&game, dim](double, const StateVec& v) {
    const SystemState s = SystemState::from_vec(v, dim);
    const StateVec f = dim == 3 ? field_opinion(game, s) : field_base(game, s);
    StateVec out(v.size());
    for (std::size_t j = 0; j < dim; ++j) out[j] = f[j];
    return out;  // cost coordinate (if present) frozen after the horizon
  };
  return integrate(field, y_end, cfg.tf, cfg.tf + cfg.tail, cfg.integrator(), dim);
}

inline void write_trajectory_csv(const fs::path& path, const ScenarioConfig& cfg,
                                 const Trajectory& traj, const Trajectory* tail,
                                 bool three_state) {
  CsvWriter csv(path.string());
  std::vector<std::string> head{"t", "x", "n"};
  if (three_state) head.push_back("o");
  csv.header(head);
  const double t1 = tail ? cfg.tf + cfg.tail : traj.span().second;
  for (double t = 0.0; t <= t1 + 1e-9; t += cfg.sample_dt) {
    const double tc = std::min(t, t1);
    const StateVec y = (tail && tc > cfg.tf) ? tail->at(tc) : traj.at(tc);
    std::vector<std::string> row{csv_double(tc), csv_double(y[0]), csv_double(y[1])};
    if (three_state) row.push_back(csv_double(y[2]));
    csv.line(row);
  }
}

inline void write_control_csv(const fs::path& path, const ControlSignal& u) {
  CsvWriter csv(path.string());
  csv.header({"t", "u"});
  for (std::size_t i = 0; i < u.cells(); ++i)
    csv.line({csv_double(u.cell_start(i)), csv_double(u.value(i))});
}

inline void write_iterations_csv(const fs::path& path, const std::vector<IterationLog>& logs) {
  CsvWriter csv(path.string());
  csv.header({"iter", "J", "theta", "ell", "wall_ms"});
  for (const auto& l : logs)
    csv.line({std::to_string(l.iter), csv_double(l.objective), csv_double(l.theta),
              std::to_string(l.ell), csv_double(l.wall_ms)});
}

inline void write_switches_csv(const fs::path& path, const SwitchScan& scan) {
  CsvWriter csv(path.string());
  csv.header({"time", "phi", "u_before", "u_after"});
  for (const auto& s : scan.switches)
    csv.line({csv_double(s.time), csv_double(s.phi), csv_double(s.u_before),
              csv_double(s.u_after)});
}

inline void write_manifest(const fs::path& path, const ScenarioResult& res) {
  nlohmann::json j;
  j["name"] = res.config.name;
  j["version"] = kVersion;
  j["created_utc"] = utc_timestamp();
  j["mode"] = res.mode == RunMode::Optimize ? "optimize" : "simulate";
  j["config"] = serialize_config(res.config);
  if (res.record) {
    const RunRecord& r = *res.record;
    j["results"] = {{"J", r.objective_value},
                    {"theta", r.theta_value},
                    {"iterations", r.iterations.size()},
                    {"converged", r.converged},
                    {"stalled", r.stalled},
                    {"switch_count", r.switches.switches.size()},
                    {"singular_candidates", r.switches.singular_candidates.size()}};
    if (!r.warnings.empty()) j["warnings"] = r.warnings;
  }
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

}  // namespace run_detail

// Runs one scenario and persists its artifacts under out_dir. Outputs are
// staged in a temporary sibling directory and moved into place on success,
// so a failed run never leaves a partial result tree.
//
// Compare scenarios integrate the opinion model and the perfect-information
// model side by side; RunMode::Simulate integrates the scenario's dynamics
// under zero control instead of optimizing.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg, const fs::path& out_dir,
                                   RunMode mode = RunMode::Optimize,
                                   const ProgressFn& progress = {}) {
  using namespace run_detail;
  cfg.validate();

  ScenarioResult res;
  res.config = cfg;
  res.out_dir = out_dir;

  if (cfg.kind == ScenarioKind::Compare) {
    res.mode = RunMode::Simulate;
    const GamePayoffs game = cfg.game();
    auto opinion_field = [&game](double, const StateVec& v) {
      return field_opinion(game, SystemState{v[0], v[1], v[2]});
    };
    auto base_field = [&game](double, const StateVec& v) {
      return field_base(game, SystemState{v[0], v[1], std::nullopt});
    };
    const double t_end = cfg.tf + cfg.tail;
    res.trajectory = integrate(opinion_field, StateVec{cfg.x0, cfg.n0, *cfg.o0}, 0.0, t_end,
                               cfg.integrator(), 3);
    res.perfect_trajectory =
        integrate(base_field, StateVec{cfg.x0, cfg.n0}, 0.0, t_end, cfg.integrator(), 2);
  } else if (mode == RunMode::Simulate) {
    res.mode = RunMode::Simulate;
    const ProblemSpec spec = cfg.problem();
    ControlSignal zero(cfg.tf, cfg.grid_dt);
    res.trajectory = forward_trajectory(spec, zero, cfg.integrator());
    if (cfg.tail > 0.0)
      res.tail_trajectory = continue_uncontrolled(cfg, res.trajectory.end_state());
  } else {
    res.mode = RunMode::Optimize;
    const ProblemSpec spec = cfg.problem();
    const ControlSignal u0 =
        make_initial_control(cfg.init_control, spec, cfg.optimizer(), cfg.integrator());
    RunRecord rec = optimize(spec, u0, cfg.optimizer(), cfg.integrator(), progress);
    res.trajectory = rec.forward;
    if (cfg.tail > 0.0)
      res.tail_trajectory = continue_uncontrolled(cfg, res.trajectory.end_state());
    res.record = std::move(rec);
  }

  // Stage, then move into place.
  const fs::path parent = out_dir.has_parent_path() ? out_dir.parent_path() : fs::path(".");
  fs::create_directories(parent);
  const fs::path tmp =
      parent / (out_dir.filename().string() + ".tmp-" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  const Trajectory* tail = res.tail_trajectory ? &*res.tail_trajectory : nullptr;
  write_trajectory_csv(tmp / "trajectory.csv", cfg, res.trajectory, tail, cfg.three_state());
  if (res.perfect_trajectory) {
    write_trajectory_csv(tmp / "trajectory_perfect.csv", cfg, *res.perfect_trajectory, nullptr,
                         false);
  }
  if (res.record) {
    write_iterations_csv(tmp / "iterations.csv", res.record->iterations);
    write_control_csv(tmp / "control.csv", res.record->control);
    if (cfg.kind == ScenarioKind::Incentive)
      write_switches_csv(tmp / "switches.csv", res.record->switches);
  }
  write_manifest(tmp / "manifest.json", res);

  fs::remove_all(out_dir);
  fs::rename(tmp, out_dir);
  res.out_dir = out_dir;
  return res;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  std::string error;
  std::optional<double> objective;  // absent for compare scenarios
  std::optional<double> theta;
  std::string regime;
  int oscillations = 0;
  std::string dir;
};

inline std::string sanitize_token(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (std::isalnum(static_cast<unsigned char>(ch))) out.push_back(ch);
    else if (ch == '.') out.push_back('p');
    else if (ch == '-') out.push_back('m');
    else out.push_back('_');
  }
  return out;
}

// Independent runs of `base` with `axis` set to each value, fanned out to
// one worker per run; the summary table is written after all runs complete.
inline std::vector<SweepRow> sweep(const ScenarioConfig& base, const std::string& axis,
                                   const std::vector<double>& values, const fs::path& out_root) {
  auto run_one = [&](double value) {
    SweepRow row;
    row.value = value;
    try {
      ScenarioConfig cfg = base;
      set_config_field(cfg, axis, num_str(value));
      cfg.name = base.name + "__" + sanitize_token(axis) + "_" + sanitize_token(num_str(value));
      const fs::path dir = out_root / cfg.name;
      const ScenarioResult res = run_scenario(cfg, dir);
      row.dir = dir.string();
      if (res.record) {
        row.objective = res.record->objective_value;
        row.theta = res.record->theta_value;
      }
      row.regime = to_string(classify_regime(cfg.game()).label);
      std::vector<double> ts, ns;
      res.sample(1, ts, ns, cfg.sample_dt);
      row.oscillations = count_high_episodes(ns, 0.5);
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    return row;
  };

  std::vector<std::future<SweepRow>> futures;
  futures.reserve(values.size());
  for (double v : values) futures.push_back(std::async(std::launch::async, run_one, v));
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (auto& f : futures) rows.push_back(f.get());

  fs::create_directories(out_root);
  CsvWriter csv((out_root / "summary.csv").string());
  csv.header({"value", "J", "theta", "regime", "oscillations", "status", "dir"});
  for (const auto& r : rows) {
    csv.line({csv_double(r.value), r.objective ? csv_double(*r.objective) : "",
              r.theta ? csv_double(*r.theta) : "", r.regime, std::to_string(r.oscillations),
              r.ok ? "ok" : "error: " + r.error, r.dir});
  }
  return rows;
}

}  // namespace envgame
