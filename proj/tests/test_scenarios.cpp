#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "envgame/scenarios.hpp"
#include "support.hpp"

using namespace envgame;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Columns of a simple CSV with a header row.
std::vector<std::vector<double>> read_csv_columns(const fs::path& p, std::size_t ncols) {
  std::ifstream in(p);
  REQUIRE(in);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> cols(ncols);
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t c = 0; c < ncols; ++c) {
      REQUIRE(std::getline(ss, cell, ','));
      cols[c].push_back(std::stod(cell));
    }
  }
  return cols;
}

// Composite Simpson on uniformly spaced samples (trapezoid on a leftover pair).
double simpson(const std::vector<double>& ys, double dt) {
  double acc = 0.0;
  std::size_t i = 0;
  for (; i + 2 < ys.size(); i += 2) acc += dt / 3.0 * (ys[i] + 4.0 * ys[i + 1] + ys[i + 2]);
  if (i + 1 < ys.size()) acc += 0.5 * dt * (ys[i] + ys[i + 1]);
  return acc;
}

}  // namespace

TEST_CASE("every preset validates and round-trips through serialization") {
  const auto all = presets();
  REQUIRE(all.size() == 10);
  for (const auto& cfg : all) {
    CAPTURE(cfg.name);
    CHECK_NOTHROW(cfg.validate());
    const std::string text = serialize_config(cfg);
    const ScenarioConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);
  }
}

TEST_CASE("preset catalog pins the headline parameters") {
  const ScenarioConfig inc = preset("incentive-v2-zero");
  CHECK(inc.iters == 40);
  CHECK(inc.theta == 0.7);
  CHECK(inc.x0 == 0.7);
  CHECK(inc.tf == 100.0);
  CHECK(inc.u_max == 1.0);
  CHECK(inc.init_control == InitControl::Zero);

  const ScenarioConfig sgn = preset("incentive-v2-sgn");
  CHECK(sgn.iters == 20);
  CHECK(sgn.init_control == InitControl::SignThreshold);

  const ScenarioConfig cheap = preset("propaganda-v2-cheap");
  CHECK(cheap.c2 == 0.001);
  CHECK(cheap.tf == 50.0);
  CHECK(cheap.tail == 50.0);

  const ScenarioConfig aw = preset("awareness-otoc");
  CHECK(aw.n0 == 0.8);
  CHECK(aw.o0 == 0.8);
  CHECK(aw.a0 == std::array<double, 4>{7, 4, 3, 3});

  const ScenarioConfig cmp = preset("opinion-compare-v2");
  CHECK(cmp.kind == ScenarioKind::Compare);
  CHECK(cmp.gamma == 0.5);
  CHECK(cmp.tf == 100.0);
}

TEST_CASE("unknown preset names list the catalog") {
  try {
    preset("nonexistent");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("incentive-v2-zero") != std::string::npos);
    CHECK(msg.find("opinion-compare-otoc") != std::string::npos);
  }
}

TEST_CASE("config parsing rejects unknown fields and bad values") {
  ScenarioConfig cfg = preset("propaganda-v2-balanced");
  CHECK_THROWS_AS(set_config_field(cfg, "problem.bogus", "1"), ConfigError);
  CHECK_THROWS_AS(set_config_field(cfg, "problem.c2", "abc"), ConfigError);
  CHECK_THROWS_AS(set_config_field(cfg, "optimizer.iters", "2.5"), ConfigError);
  CHECK_NOTHROW(set_config_field(cfg, "problem.c2", "0.001"));
  CHECK(cfg.c2 == 0.001);
}

TEST_CASE("config files load with the file stem as a fallback name") {
  const auto dir = testsupport::scratch_dir("cfg");
  ScenarioConfig cfg = preset("propaganda-v2-balanced");
  cfg.name = "";
  std::ofstream(dir / "myrun.cfg") << serialize_config(cfg);
  const ScenarioConfig loaded = load_config_file(dir / "myrun.cfg");
  CHECK(loaded.name == "myrun");
  CHECK(loaded.c2 == 1.0);
}

TEST_CASE("peak detection and oscillation counting on synthetic series") {
  std::vector<double> ts, vs;
  for (int i = 0; i <= 1000; ++i) {
    const double t = i * 0.01;
    ts.push_back(t);
    vs.push_back(0.5 + 0.1 * t * std::sin(2.0 * t));
  }
  const auto peaks = find_peaks(ts, vs);
  REQUIRE(peaks.size() >= 2);
  for (std::size_t i = 1; i < peaks.size(); ++i) CHECK(peaks[i].value > peaks[i - 1].value);

  std::vector<double> square;
  for (int k = 0; k < 5; ++k) {
    for (int i = 0; i < 10; ++i) square.push_back(0.9);
    for (int i = 0; i < 10; ++i) square.push_back(0.1);
  }
  CHECK(count_high_episodes(square, 0.5) == 5);
  CHECK(count_high_episodes(std::vector<double>(20, 0.2), 0.5) == 0);
}

TEST_CASE("opinion-compare run: growing opinion-model peaks, shrinking perfect-model peaks") {
  const auto dir = testsupport::scratch_dir("compare-v2");
  const ScenarioConfig cfg = preset("opinion-compare-v2");
  const ScenarioResult res = run_scenario(cfg, dir / "run");

  CHECK(fs::exists(dir / "run" / "manifest.json"));
  CHECK(fs::exists(dir / "run" / "trajectory.csv"));
  CHECK(fs::exists(dir / "run" / "trajectory_perfect.csv"));
  CHECK_FALSE(fs::exists(dir / "run" / "iterations.csv"));

  std::vector<double> ts, ns;
  sample_coordinate(res.trajectory, 0.0, cfg.tf, 0.01, 1, ts, ns);
  const auto peaks = find_peaks(ts, ns);
  REQUIRE(peaks.size() >= 2);
  for (std::size_t i = 1; i < peaks.size(); ++i) CHECK(peaks[i].value > peaks[i - 1].value);

  REQUIRE(res.perfect_trajectory.has_value());
  std::vector<double> tp, np;
  sample_coordinate(*res.perfect_trajectory, 0.0, cfg.tf, 0.01, 1, tp, np);
  const auto perfect_peaks = find_peaks(tp, np);
  REQUIRE(perfect_peaks.size() >= 2);
  for (std::size_t i = 1; i < perfect_peaks.size(); ++i)
    CHECK(perfect_peaks[i].value < perfect_peaks[i - 1].value);
}

TEST_CASE("higher gamma slows the growth of opinion-driven oscillations") {
  const auto dir = testsupport::scratch_dir("gamma-growth");
  auto growth = [&](double gamma) {
    ScenarioConfig cfg = preset("opinion-compare-v2");
    set_config_field(cfg, "problem.gamma", num_str(gamma));
    cfg.name += "-g" + num_str(gamma);
    const ScenarioResult res = run_scenario(cfg, dir / cfg.name);
    std::vector<double> ts, ns;
    sample_coordinate(res.trajectory, 0.0, cfg.tf, 0.01, 1, ts, ns);
    const auto peaks = find_peaks(ts, ns);
    REQUIRE(peaks.size() >= 2);
    return (std::log(peaks.back().value) - std::log(peaks.front().value)) /
           (peaks.back().t - peaks.front().t);
  };
  CHECK(growth(0.25) > growth(1.5));
}

TEST_CASE("optimize run persists the full artifact tree and a recomputable J") {
  const auto dir = testsupport::scratch_dir("small-opt");
  ScenarioConfig cfg = preset("propaganda-v2-balanced");
  cfg.name = "small-propaganda";
  cfg.tf = 5.0;
  cfg.iters = 3;
  cfg.tail = 2.0;
  cfg.max_step = 0.0;  // back to tf/100
  const ScenarioResult res = run_scenario(cfg, dir / "run");
  REQUIRE(res.record.has_value());

  CHECK(fs::exists(dir / "run" / "manifest.json"));
  CHECK(fs::exists(dir / "run" / "iterations.csv"));
  CHECK(fs::exists(dir / "run" / "control.csv"));
  CHECK(fs::exists(dir / "run" / "trajectory.csv"));
  // No leftover staging directory.
  for (const auto& entry : fs::directory_iterator(dir))
    CHECK(entry.path().string().find(".tmp-") == std::string::npos);

  // trajectory.csv holds exactly the configured sample grid over [0, tf+tail].
  const auto cols = read_csv_columns(dir / "run" / "trajectory.csv", 4);
  REQUIRE(cols[0].size() == static_cast<std::size_t>((cfg.tf + cfg.tail) / cfg.sample_dt) + 1);
  CHECK(cols[0][1] - cols[0][0] == doctest::Approx(cfg.sample_dt));

  // Recompute J from the persisted samples: Simpson for the n^2 term on
  // [0, tf], the exact cell sum for the control penalty.
  std::vector<double> n2;
  const auto n_tf = static_cast<std::size_t>(cfg.tf / cfg.sample_dt);
  for (std::size_t i = 0; i <= n_tf; ++i) n2.push_back(cols[2][i] * cols[2][i]);
  const auto ucols = read_csv_columns(dir / "run" / "control.csv", 2);
  double u2 = 0.0;
  for (double uv : ucols[1]) u2 += uv * uv * cfg.grid_dt;
  const double j_recomputed = 0.5 * (*cfg.c1 * simpson(n2, cfg.sample_dt) - *cfg.c2 * u2);
  CHECK(std::abs(j_recomputed - res.record->objective_value) < 1e-3);

  // The manifest embeds the exact config document.
  const std::string manifest = slurp(dir / "run" / "manifest.json");
  CHECK(manifest.find("small-propaganda") != std::string::npos);
  CHECK(manifest.find("\"J\"") != std::string::npos);
}

TEST_CASE("cheap propaganda rescues the commons until the control ends") {
  const auto dir = testsupport::scratch_dir("prop-cheap");
  const ScenarioResult res = run_scenario(preset("propaganda-v2-cheap"), dir / "run");
  REQUIRE(res.record.has_value());
  const ControlSignal& u = res.record->control;

  // A large negative opinion impulse right at the start, then much smaller
  // effort for the rest of the horizon.
  CHECK(u.value(0) < -10.0);
  double late_max = 0.0;
  for (std::size_t i = 0; i < u.cells(); ++i)
    if (u.cell_start(i) >= 10.0) late_max = std::max(late_max, std::abs(u.value(i)));
  CHECK(late_max < 0.5 * std::abs(u.value(0)));

  // The environment holds near replete until the horizon, then collapses
  // once the control is switched off.
  std::vector<double> ts, ns;
  res.sample(1, ts, ns, res.config.sample_dt);
  double min_held = 1.0, min_tail = 1.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] >= 20.0 && ts[i] <= res.config.tf) min_held = std::min(min_held, ns[i]);
    if (ts[i] > res.config.tf) min_tail = std::min(min_tail, ns[i]);
  }
  CHECK(min_held > 0.9);
  CHECK(min_tail < 0.1);
}

TEST_CASE("simulate mode writes trajectories but no optimizer artifacts") {
  const auto dir = testsupport::scratch_dir("simulate");
  ScenarioConfig cfg = preset("awareness-v2");
  cfg.tf = 5.0;
  cfg.tail = 0.0;
  const ScenarioResult res = run_scenario(cfg, dir / "run", RunMode::Simulate);
  CHECK_FALSE(res.record.has_value());
  CHECK(fs::exists(dir / "run" / "trajectory.csv"));
  CHECK_FALSE(fs::exists(dir / "run" / "iterations.csv"));
  CHECK_FALSE(fs::exists(dir / "run" / "control.csv"));
}

TEST_CASE("rerunning a scenario reproduces its outputs byte for byte") {
  const auto dir = testsupport::scratch_dir("determinism");
  const ScenarioConfig cfg = preset("opinion-compare-toc1");
  run_scenario(cfg, dir / "a");
  run_scenario(cfg, dir / "b");
  CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));
  CHECK(slurp(dir / "a" / "trajectory_perfect.csv") == slurp(dir / "b" / "trajectory_perfect.csv"));
}

TEST_CASE("sweep fans out, records failures, and writes a summary") {
  const auto dir = testsupport::scratch_dir("sweep");
  ScenarioConfig base = preset("opinion-compare-v2");
  base.tf = 30.0;
  const auto rows = sweep(base, "problem.gamma", {0.25, 0.5, 1.0}, dir / "out");
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CAPTURE(r.error);
    CHECK(r.ok);
    CHECK(r.regime == "V2");
    CHECK_FALSE(r.objective.has_value());  // compare runs carry no J
  }
  CHECK(fs::exists(dir / "out" / "summary.csv"));
  const std::string summary = slurp(dir / "out" / "summary.csv");
  CHECK(summary.find("value,J,theta,regime,oscillations,status,dir") != std::string::npos);

  // A failing value is recorded without sinking the sweep.
  const auto rows2 = sweep(base, "problem.gamma", {-1.0, 0.5}, dir / "out2");
  REQUIRE(rows2.size() == 2);
  CHECK_FALSE(rows2[0].ok);
  CHECK(rows2[0].error.find("gamma") != std::string::npos);
  CHECK(rows2[1].ok);

  CHECK(sweep(base, "problem.gamma", {}, dir / "out3").empty());
}
