#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <string>

#include "rdpi/scenario_io.hpp"

using namespace rdpi;
using std::numbers::pi;

namespace {

const char* kMinimal = R"(plant: {a: 0.2, b: 2, c: 1, theta: pi/3, h_min: 0.5, h_max: 1.5}
simulation: {t_end: 1}
delay: 1
)";

int config_line(const std::string& text) {
  try {
    parse_experiment(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string config_message(const std::string& text) {
  try {
    parse_experiment(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("number expressions") {
  CHECK(parse_number("1.5") == 1.5);
  CHECK(parse_number(" -2e-3 ") == -2e-3);
  CHECK(parse_number("pi") == pi);
  CHECK(parse_number("-pi/4") == -pi / 4);
  CHECK(parse_number("5*pi") == 5 * pi);
  CHECK(parse_number("2 * pi / 3") == 2 * pi / 3);
  CHECK(parse_number("+3") == 3.0);
  CHECK_THROWS_AS(parse_number("abc"), ConfigError);
  CHECK_THROWS_AS(parse_number("1 + 2"), ConfigError);
  CHECK_THROWS_AS(parse_number("1/0"), ConfigError);
  CHECK_THROWS_AS(parse_number(""), ConfigError);
}

TEST_CASE("pole lists") {
  const auto p = parse_poles("-4, -5+2i, -5-2i");
  REQUIRE(p.size() == 3);
  CHECK(p[0] == Complex(-4, 0));
  CHECK(p[1] == Complex(-5, 2));
  CHECK(p[2] == Complex(-5, -2));
  CHECK(parse_poles("-1e-1+i")[0] == Complex(-0.1, 1));
  CHECK(parse_poles("-3-j")[0] == Complex(-3, -1));
  CHECK(parse_poles("2i")[0] == Complex(0, 2));
  CHECK_THROWS_AS(parse_poles("-4,,-5"), ConfigError);
  CHECK_THROWS_AS(parse_poles("-4,x"), ConfigError);
}

TEST_CASE("fig1 preset carries the reference plant and design") {
  const Experiment ex = parse_experiment(preset_text("fig1"));
  const Scenario& s = ex.scenario;
  CHECK(s.plant.a == 0.2);
  CHECK(s.plant.b == 2.0);
  CHECK(s.plant.c == 1.0);
  CHECK(s.plant.theta == doctest::Approx(pi / 3));
  REQUIRE(s.design.poles.size() == 3);
  CHECK(s.design.poles[0] == Complex(-4, 0));
  CHECK(s.design.poles[2] == Complex(-6, 0));
  CHECK(s.sim_modes == 40);
  CHECK(s.t_end == 50.0);
  CHECK(delay_signal_eval(s.h, 0.0) == doctest::Approx(1.0 + 0.5 * std::sin(pi / 4)));
  CHECK(s.reference(25.0) == doctest::Approx(5.0));
  CHECK(s.reference(5.0) == 0.0);
  CHECK(s.perturbation(0.0) == 1.0);
  CHECK(s.perturbation(30.0) == doctest::Approx(25.0));
  CHECK(s.perturbation(45.0) == doctest::Approx(6.0));
  CHECK(ex.sweep_delays.empty());
  REQUIRE(s.phi.terms.size() == 1);
}

TEST_CASE("other presets") {
  const Experiment sweep = parse_experiment(preset_text("fig2_sweep"));
  CHECK(sweep.sweep_delays == std::vector<double>{1, 2, 3, 4});
  CHECK(sweep.scenario.zeta_delay == ZetaDelay::Estimate);
  CHECK(delay_signal_eval(sweep.scenario.h_hat, 3.0) == 1.0);

  const Scenario stab = parse_scenario(preset_text("stabilization_only"));
  CHECK(stab.reference(100.0) == 0.0);
  CHECK(stab.perturbation(100.0) == 0.0);

  CHECK(preset_names().size() == 3);
  CHECK_THROWS_AS(preset_text("fig3"), ConfigError);
}

TEST_CASE("empty configuration lists the required keys") {
  const std::string msg = config_message("");
  CHECK(msg.find("plant") != std::string::npos);
  CHECK(msg.find("delay") != std::string::npos);
  CHECK(msg.find("simulation") != std::string::npos);
  CHECK(config_message("name: x\n").find("missing required keys: plant, delay, simulation") !=
        std::string::npos);
}

TEST_CASE("unknown keys and malformed values carry their line") {
  CHECK(config_line(std::string(kMinimal) + "colour: red\n") == 4);
  CHECK(config_line("plant: {a: 0.2, b: 2, c: 1, theta: pi/3, h_min: 0.5, h_max: 1.5}\n"
                    "simulation:\n"
                    "  t_end: 1\n"
                    "  dtt: 0.1\n"
                    "delay: 1\n") == 4);
  CHECK(config_line("plant: {a: zero, b: 2, c: 1, theta: 1, h_min: 0.5, h_max: 1.5}\n"
                    "simulation: {t_end: 1}\ndelay: 1\n") == 1);
  CHECK(config_line(std::string(kMinimal) + "reference: {wobble: 1}\n") == 4);
  CHECK(config_line("plant: [1, 2\n") >= 1);
  CHECK(config_line(std::string(kMinimal) + "delay_estimate: {kind: spline}\n") == 4);
}

TEST_CASE("missing nested keys are reported") {
  const std::string msg =
      config_message("plant: {a: 0.2, b: 2, c: 1, theta: 1, h_min: 0.5}\n"
                     "simulation: {t_end: 1}\ndelay: 1\n");
  CHECK(msg.find("h_max") != std::string::npos);
}

TEST_CASE("delay amplitude beyond the bounds is a validation error") {
  const std::string text =
      "plant: {a: 0.2, b: 2, c: 1, theta: pi/3, h_min: 0.5, h_max: 1.5}\n"
      "simulation: {t_end: 1}\n"
      "delay: {kind: sinusoidal, mean: 1, amplitude: 0.8, omega: 5*pi}\n";
  CHECK_THROWS_AS(parse_experiment(text), ValidationError);
  CHECK_THROWS_AS(parse_experiment(std::string(kMinimal) + "sweep: {h: [1, 7]}\n"),
                  ValidationError);
}

TEST_CASE("signal forms") {
  const Scenario s = parse_scenario(std::string(kMinimal) +
                                    "reference: {ramp: {from: 0, to: 2, duration: 4}}\n"
                                    "perturbation:\n"
                                    "  - constant: 1\n"
                                    "  - at: 2\n"
                                    "    terms:\n"
                                    "      - constant: 1\n"
                                    "      - sinusoid: {amplitude: 1, omega: pi}\n");
  CHECK(s.reference(2.0) == doctest::Approx(1.0));
  CHECK(s.perturbation(1.0) == 1.0);
  CHECK(s.perturbation(2.5) == doctest::Approx(2.0));
  CHECK_THROWS_AS(parse_scenario(std::string(kMinimal) +
                                 "reference:\n  - constant: 1\n  - constant: 2\n"),
                  ConfigError);
}

TEST_CASE("delay kinds and initial data") {
  const Scenario s = parse_scenario(
      "plant: {a: 0.2, b: 2, c: 1, theta: pi/3, h_min: 0.5, h_max: 2}\n"
      "simulation: {modes: 8, dt: 0.002, t_end: 1, store_stride: 5, interpolation: cubic}\n"
      "design: {poles: '-4,-5+1i,-5-1i', N: 1, alpha_tail_depth: 50}\n"
      "delay: {kind: table, knots: [[0, 1], [10, 2]]}\n"
      "delay_estimate: {kind: constant, value: 1.2}\n"
      "initial:\n"
      "  phi:\n"
      "    - space: {eigenmode: 2}\n"
      "    - time: 2\n"
      "      space: {modal: [0.1, 0.2]}\n"
      "  zeta0: {mode: explicit, profile: 0.3}\n");
  CHECK(delay_signal_eval(s.h, 5.0) == doctest::Approx(1.5));
  CHECK(s.zeta_delay == ZetaDelay::Estimate);
  CHECK(s.interp == Interpolation::Cubic);
  CHECK(s.dt == 0.002);
  CHECK(s.store_stride == 5);
  CHECK(*s.design.N == 1);
  CHECK(s.design.alpha_tail_depth == 50);
  CHECK(s.design.poles[1] == Complex(-5, 1));
  CHECK(s.phi.terms.size() == 2);
  CHECK(s.zeta0.mode == ZetaInit::Mode::Explicit);
  CHECK(s.zeta0.profile(0.0) == 0.3);
}

TEST_CASE("serialization round trip is exact") {
  for (const std::string& name : preset_names()) {
    const Experiment ex = parse_experiment(preset_text(name));
    const std::string once = serialize_experiment(ex);
    const Experiment back = parse_experiment(once);
    CHECK(serialize_experiment(back) == once);
    CHECK(back.scenario.plant.theta == ex.scenario.plant.theta);
    CHECK(back.scenario.reference(17.3) == ex.scenario.reference(17.3));
    CHECK(back.scenario.perturbation(33.1) == ex.scenario.perturbation(33.1));
    CHECK(back.sweep_delays == ex.sweep_delays);
  }
}

TEST_CASE("re-parsed scenario gives a bitwise identical run") {
  Scenario s = parse_scenario(preset_text("fig1"));
  s.t_end = 2.0;
  s.sim_modes = 10;
  Experiment ex{s, {}};
  const Scenario back = parse_scenario(serialize_experiment(ex));
  const Trajectory a = run(s);
  const Trajectory b = run(back);
  CHECK(a.modal == b.modal);
  CHECK(a.zeta == b.zeta);
  CHECK(a.u == b.u);
}
