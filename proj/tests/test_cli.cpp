#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "support.hpp"

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  const fs::path dir = fs::current_path() / "test-scratch" / "cli-io";
  fs::create_directories(dir);
  const fs::path out_f = dir / ("out" + std::to_string(counter));
  const fs::path err_f = dir / ("err" + std::to_string(counter));
  ++counter;
  const std::string cmd = env_prefix + " " + std::string(ENVGAME_BIN) + " " + args + " > " +
                          out_f.string() + " 2> " + err_f.string();
  const int rc = std::system(cmd.c_str());
  CliResult res;
  res.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  res.out = slurp(out_f);
  res.err = slurp(err_f);
  return res;
}

// Strips the wall-clock column (last) from iterations.csv content.
std::string strip_wall(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << '\n';
  return out.str();
}

// Drops the created_utc line from a manifest.
std::string strip_timestamp(const std::string& json) {
  std::istringstream in(json);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find("created_utc") == std::string::npos) out << line << '\n';
  return out.str();
}

}  // namespace

TEST_CASE("list-presets prints the catalog") {
  const CliResult res = run_cli("list-presets");
  CHECK(res.code == 0);
  CHECK(res.out.find("incentive-v2-zero") != std::string::npos);
  CHECK(res.out.find("awareness-otoc") != std::string::npos);
  CHECK(res.out.find("opinion-compare-v2") != std::string::npos);
}

TEST_CASE("classify labels the pinned payoff choices") {
  const CliResult otoc = run_cli("classify --a0 7,4,3,3 --a1 3,1,6,2 --theta 0.5");
  CHECK(otoc.code == 0);
  CHECK(otoc.out.rfind("OTOC", 0) == 0);  // first line is the label
  CHECK(otoc.out.find("eigenvalues") != std::string::npos);

  const CliResult v2 = run_cli("classify --a0 4.5,4,3,3 --theta 0.5");
  CHECK(v2.code == 0);
  CHECK(v2.out.rfind("V2", 0) == 0);

  const CliResult toc1 = run_cli("classify --a0 5,2,3,3 --theta 0.5");
  CHECK(toc1.code == 0);
  CHECK(toc1.out.rfind("TOC1", 0) == 0);
}

TEST_CASE("unknown presets exit 1 and list the catalog") {
  const CliResult res = run_cli("optimize --preset bogus");
  CHECK(res.code == 1);
  CHECK(res.err.find("config error") != std::string::npos);
  CHECK(res.err.find("incentive-v2-zero") != std::string::npos);
}

TEST_CASE("config errors name the offending field") {
  const CliResult res =
      run_cli("optimize --preset propaganda-v2-balanced --set problem.c2=-1 --out x");
  CHECK(res.code == 1);
  CHECK(res.err.find("problem.c2") != std::string::npos);

  const CliResult res2 = run_cli("optimize --preset propaganda-v2-balanced --set nope.field=1");
  CHECK(res2.code == 1);
  CHECK(res2.err.find("nope.field") != std::string::npos);
}

TEST_CASE("optimize runs a small overridden scenario end to end") {
  const auto dir = testsupport::scratch_dir("cli-opt");
  const std::string out = (dir / "run").string();
  const CliResult res = run_cli(
      "optimize --preset propaganda-v2-balanced --set problem.tf=5 --set optimizer.iters=2 "
      "--set output.tail=0 --out " +
      out);
  CHECK(res.code == 0);
  CHECK(fs::exists(dir / "run" / "manifest.json"));
  CHECK(fs::exists(dir / "run" / "iterations.csv"));
  CHECK(fs::exists(dir / "run" / "control.csv"));
  CHECK(fs::exists(dir / "run" / "trajectory.csv"));
  // Progress lines plus a final J/theta line.
  CHECK(res.out.find("iter=0") != std::string::npos);
  CHECK(res.out.find("J=") != std::string::npos);
  CHECK(res.out.find("theta=") != std::string::npos);
}

TEST_CASE("identical invocations produce byte-identical artifacts") {
  const auto dir = testsupport::scratch_dir("cli-repeat");
  const std::string base =
      "optimize --preset incentive-v2-zero --set problem.tf=5 --set optimizer.iters=2 -q --out ";
  CHECK(run_cli(base + (dir / "a").string()).code == 0);
  CHECK(run_cli(base + (dir / "b").string()).code == 0);
  CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));
  CHECK(slurp(dir / "a" / "control.csv") == slurp(dir / "b" / "control.csv"));
  CHECK(slurp(dir / "a" / "switches.csv") == slurp(dir / "b" / "switches.csv"));
  CHECK(strip_wall(slurp(dir / "a" / "iterations.csv")) ==
        strip_wall(slurp(dir / "b" / "iterations.csv")));
  CHECK(strip_timestamp(slurp(dir / "a" / "manifest.json")) ==
        strip_timestamp(slurp(dir / "b" / "manifest.json")));
}

TEST_CASE("optimize accepts a config file") {
  const auto dir = testsupport::scratch_dir("cli-config");
  std::ofstream(dir / "tiny.cfg") << "name = tiny\n"
                                     "\n"
                                     "[problem]\n"
                                     "kind = propaganda\n"
                                     "a1 = 3,1,6,2\n"
                                     "a0 = 4.5,4,3,3\n"
                                     "theta = 0.5\n"
                                     "gamma = 0.5\n"
                                     "x0 = 0.5\n"
                                     "n0 = 0.3\n"
                                     "o0 = 0.3\n"
                                     "tf = 4\n"
                                     "c1 = 1\n"
                                     "c2 = 1\n"
                                     "\n"
                                     "[optimizer]\n"
                                     "iters = 2\n";
  const CliResult res = run_cli("optimize --config " + (dir / "tiny.cfg").string() + " -q --out " +
                                (dir / "run").string());
  CHECK(res.code == 0);
  CHECK(fs::exists(dir / "run" / "manifest.json"));
  CHECK(slurp(dir / "run" / "manifest.json").find("\"tiny\"") != std::string::npos);

  // Giving both sources is a config error.
  const CliResult both =
      run_cli("optimize --preset awareness-v2 --config " + (dir / "tiny.cfg").string());
  CHECK(both.code == 1);
}

TEST_CASE("simulate writes paired trajectories for compare scenarios") {
  const auto dir = testsupport::scratch_dir("cli-sim");
  const CliResult res = run_cli("simulate --preset opinion-compare-v2 --set problem.tf=20 --out " +
                                (dir / "run").string());
  CHECK(res.code == 0);
  CHECK(fs::exists(dir / "run" / "trajectory.csv"));
  CHECK(fs::exists(dir / "run" / "trajectory_perfect.csv"));
  CHECK_FALSE(fs::exists(dir / "run" / "iterations.csv"));
  // Only the opinion model's file carries the o column.
  CHECK(slurp(dir / "run" / "trajectory.csv").rfind("t,x,n,o", 0) == 0);
  CHECK(slurp(dir / "run" / "trajectory_perfect.csv").rfind("t,x,n", 0) == 0);
}

TEST_CASE("numerical failures exit 2 with iteration context") {
  const auto dir = testsupport::scratch_dir("cli-numfail");
  const CliResult res = run_cli(
      "optimize --preset propaganda-v2-balanced --set problem.tf=5 "
      "--set integrator.rel_tol=1e-300 --set integrator.abs_tol=1e-300 -q --out " +
      (dir / "run").string());
  CHECK(res.code == 2);
  CHECK(res.err.find("numerical failure") != std::string::npos);
  CHECK(res.err.find("iteration 0") != std::string::npos);
  CHECK(res.err.find("t=") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "run"));  // failed runs leave no artifact tree
}

TEST_CASE("sweep writes per-value runs and a summary") {
  const auto dir = testsupport::scratch_dir("cli-sweep");
  const CliResult res = run_cli(
      "sweep --preset opinion-compare-v2 --set problem.tf=20 --axis problem.gamma "
      "--values 0.25,0.75 --out " +
      (dir / "out").string());
  CHECK(res.code == 0);
  CHECK(fs::exists(dir / "out" / "summary.csv"));
  CHECK(res.out.find("problem.gamma=0.25") != std::string::npos);
  CHECK(res.out.find("summary") != std::string::npos);
  int run_dirs = 0;
  for (const auto& e : fs::directory_iterator(dir / "out"))
    if (e.is_directory()) ++run_dirs;
  CHECK(run_dirs == 2);
}

TEST_CASE("the default output root honors ENVGAME_OUT_ROOT") {
  const auto dir = testsupport::scratch_dir("cli-envroot");
  const CliResult res = run_cli(
      "simulate --preset opinion-compare-toc1 --set problem.tf=10",
      "ENVGAME_OUT_ROOT=" + dir.string());
  CHECK(res.code == 0);
  CHECK(fs::exists(dir / "opinion-compare-toc1" / "trajectory.csv"));
}

TEST_CASE("help output matches the golden snapshots") {
  const fs::path golden = fs::path(ENVGAME_GOLDEN_DIR);
  for (const std::string name : {"main", "simulate", "optimize", "classify", "sweep"}) {
    const std::string args = name == "main" ? "--help" : name + " --help";
    const CliResult res = run_cli(args);
    CHECK(res.code == 0);
    const fs::path snap = golden / ("help_" + name + ".txt");
    REQUIRE_MESSAGE(fs::exists(snap), "missing golden snapshot ", snap.string());
    CHECK_MESSAGE(res.out == slurp(snap), "help text drifted for '", args, "'");
  }
  // Every flag of each subcommand is documented.
  const std::string opt_help = run_cli("optimize --help").out;
  for (const char* flag : {"--preset", "--config", "--out", "--set", "--quiet"})
    CHECK(opt_help.find(flag) != std::string::npos);
  const std::string sweep_help = run_cli("sweep --help").out;
  for (const char* flag : {"--axis", "--values", "--preset", "--set"})
    CHECK(sweep_help.find(flag) != std::string::npos);
  const std::string cls_help = run_cli("classify --help").out;
  for (const char* flag : {"--a0", "--a1", "--theta"})
    CHECK(cls_help.find(flag) != std::string::npos);
}
