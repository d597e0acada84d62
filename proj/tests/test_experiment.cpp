#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "rdpi/experiment.hpp"

using namespace rdpi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rdpi_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Experiment short_fig1() {
  Experiment ex = parse_experiment(preset_text("fig1"));
  ex.scenario.t_end = 3.0;
  ex.scenario.sim_modes = 12;
  return ex;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(RDPI_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("design report") {
  const Scenario s = parse_scenario(preset_text("fig1"));
  const Design d = synthesize(s.plant, s.sim_modes, s.design);
  const std::string text = design_report(d, s.plant);
  CHECK(text == design_report(d, s.plant));
  CHECK(text.find("lambda_0 = 2.3005") != std::string::npos);
  CHECK(text.find("lambda_1 = -1.6683") != std::string::npos);
  CHECK(text.find("lambda_2 = -9.5665") != std::string::npos);
  CHECK(text.find("N = 1") != std::string::npos);
  CHECK(text.find("-2 sqrt(5)|c| = -4.4721") != std::string::npos);
  CHECK(text.find("kalman rank = 3 of 3") != std::string::npos);
  CHECK(text.find("closed-loop spectrum: -4.000000 -5.000000 -6.000000") != std::string::npos);
  CHECK(text.find("alpha = 0.2077") != std::string::npos);
}

TEST_CASE("number format") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(-2.5e-20) == "-2.5e-20");
}

TEST_CASE("single run writes trace, field, report and plot script") {
  const fs::path dir = scratch("single");
  EmitOptions emit;
  emit.field = true;
  const auto summaries = run_experiment(short_fig1(), dir, emit);
  REQUIRE(summaries.size() == 1);
  CHECK_FALSE(summaries[0].diverged);

  const std::string trace = slurp(dir / "trace.csv");
  CHECK(trace.rfind("t,y1,u,zeta,state_norm,r,p,h,h_hat\n", 0) == 0);
  std::istringstream lines(trace);
  std::string line;
  int rows = -1;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 301);

  const std::string field = slurp(dir / "field_y.csv");
  CHECK(field.rfind("t,0,0.02,0.04,", 0) == 0);

  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["design"]["N"] == 1);
  CHECK(report["design"]["kalman_rank"] == 3);
  CHECK(report.contains("regulation"));
  CHECK(report["regulation"].contains("window_max_error"));
  CHECK(report.contains("decay_fit"));

  const std::string plot = slurp(dir / "plot.py");
  CHECK(plot.find("trace.csv") != std::string::npos);
  CHECK(plot.find("field_y.csv") != std::string::npos);
  CHECK(fs::exists(dir / "scenario.yaml"));
  fs::remove_all(dir);
}

TEST_CASE("identical configurations give byte-identical CSV") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  EmitOptions emit;
  emit.field = true;
  run_experiment(short_fig1(), a, emit);
  run_experiment(short_fig1(), b, emit);
  CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
  CHECK(slurp(a / "field_y.csv") == slurp(b / "field_y.csv"));
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("sweep writes one directory per delay and a summary") {
  const fs::path dir = scratch("sweep");
  Experiment ex = parse_experiment(preset_text("fig2_sweep"));
  ex.scenario.t_end = 2.0;
  ex.scenario.sim_modes = 10;
  const auto runs = run_experiment(ex, dir, EmitOptions{});
  REQUIRE(runs.size() == 4);
  for (const char* sub : {"h_1", "h_2", "h_3", "h_4"}) {
    CHECK(fs::exists(dir / sub / "trace.csv"));
    CHECK(fs::exists(dir / sub / "report.json"));
  }
  CHECK(*runs[2].h == 3.0);
  const std::string summary = slurp(dir / "summary.csv");
  CHECK(summary.rfind("h,diverged,", 0) == 0);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 5);
  const auto js = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(js["runs"].size() == 4);
  CHECK(fs::exists(dir / "plot.py"));
  fs::remove_all(dir);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  CHECK(cli("design --preset fig1") == 0);
  CHECK(cli("design --preset fig1 --poles=-1,-2,-3") == 4);
  CHECK(cli("design --preset fig1 --modes 1") == 2);
  CHECK(cli("design --preset nope") == 2);
  CHECK(cli("design") == 2);
  CHECK(cli("run --preset fig1 --t-end 1 --modes 8 --out " + (dir / "run").string()) == 0);
  CHECK(fs::exists(dir / "run" / "trace.csv"));
  CHECK(cli("run --preset fig1 --dt 0.7") == 2);
  CHECK(cli("sweep --preset fig1 --out " + (dir / "s").string()) == 2);
  CHECK(cli("sweep --preset fig2_sweep --t-end 1 --modes 8 --delays 1,2 --out " +
            (dir / "s2").string()) == 0);
  CHECK(fs::exists(dir / "s2" / "h_2" / "trace.csv"));

  {
    std::ofstream(dir / "empty.yaml") << "";
    std::ofstream(dir / "typo.yaml") << "plant: {a: 0.2, b: 2, c: 1, theta: 1, h_min: 0.5, "
                                        "h_max: 1.5}\nsimulation: {t_end: 1, foo: 1}\ndelay: 1\n";
  }
  CHECK(cli("run --config " + (dir / "empty.yaml").string()) == 2);
  CHECK(cli("run --config " + (dir / "typo.yaml").string()) == 2);
  CHECK(cli("run --config " + (dir / "missing.yaml").string()) == 2);

  // A step far beyond the explicit stability limit of the feedback term.
  CHECK(cli("run --preset stabilization_only --dt 0.45 --t-end 300 --out " +
            (dir / "div").string()) == 3);
  const auto report = nlohmann::json::parse(slurp(dir / "div" / "report.json"));
  CHECK(report["diverged"] == true);
  fs::remove_all(dir);
}
