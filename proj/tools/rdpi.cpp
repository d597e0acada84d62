// rdpi: design and simulate the delayed reaction-diffusion PI loop.
//
//   rdpi design --preset fig1
//   rdpi run    --preset fig1 --out out/fig1 --field
//   rdpi sweep  --preset fig2_sweep --out out/fig2
//
// Exit codes: 0 ok, 1 other failure, 2 configuration or validation error,
// 3 divergence, 4 design-gate refusal.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "rdpi/errors.hpp"
#include "rdpi/experiment.hpp"
#include "rdpi/scenario_io.hpp"

namespace {

struct Options {
  std::string preset;
  std::string config;
  std::string out = "out";
  std::optional<double> dt;
  std::optional<int> modes;
  std::optional<double> t_end;
  std::string poles;
  std::string sweep_h;
  bool field = false;
  double field_interval = 1.0;
  bool no_plot = false;
  bool dump = false;
};

rdpi::Experiment load(const Options& o) {
  std::string text;
  if (!o.preset.empty()) {
    text = rdpi::preset_text(o.preset);
  } else {
    std::ifstream in(o.config);
    if (!in) throw rdpi::ConfigError("cannot read " + o.config);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  rdpi::Experiment ex = rdpi::parse_experiment(text);
  rdpi::Scenario& s = ex.scenario;
  if (o.dt) s.dt = *o.dt;
  if (o.modes) s.sim_modes = *o.modes;
  if (o.t_end) s.t_end = *o.t_end;
  if (!o.poles.empty()) s.design.poles = rdpi::parse_poles(o.poles);
  if (!o.sweep_h.empty()) {
    ex.sweep_delays.clear();
    for (const rdpi::Complex& z : rdpi::parse_poles(o.sweep_h)) {
      if (z.imag() != 0.0) throw rdpi::ConfigError("--delays takes real values");
      ex.sweep_delays.push_back(z.real());
    }
  }
  s.validate();
  return ex;
}

void print_summary(const rdpi::RunSummary& s) {
  if (s.diverged) {
    std::printf("%-28s diverged at t = %.4g\n", s.label.c_str(), s.divergence_time);
    return;
  }
  const rdpi::RegulationReport& r = s.regulation;
  std::printf("%-28s final |y1-r| = %.3e  last-10%% max = %.3e", s.label.c_str(),
              r.final_error, r.window_max_error);
  if (s.decay) std::printf("  decay fit = %.4f", s.decay->kappa_hat);
  std::printf("\n");
}

int run_verb(const std::string& verb, const Options& o) {
  rdpi::Experiment ex = load(o);
  if (o.dump) std::cout << rdpi::serialize_experiment(ex);
  rdpi::EmitOptions emit;
  emit.field = o.field;
  emit.field_interval = o.field_interval;
  emit.plot = !o.no_plot;

  if (verb == "design") {
    const rdpi::Design d =
        rdpi::synthesize(ex.scenario.plant, ex.scenario.sim_modes, ex.scenario.design);
    std::cout << rdpi::design_report(d, ex.scenario.plant);
    return 0;
  }
  if (verb == "run") {
    ex.sweep_delays.clear();
    for (const auto& s : rdpi::run_experiment(ex, o.out, emit)) print_summary(s);
    std::printf("wrote %s\n", o.out.c_str());
    return 0;
  }
  if (ex.sweep_delays.empty()) {
    throw rdpi::ConfigError("sweep needs a 'sweep' section or --delays");
  }
  bool any_diverged = false;
  for (const auto& s : rdpi::run_experiment(ex, o.out, emit)) {
    print_summary(s);
    any_diverged = any_diverged || s.diverged;
  }
  std::printf("wrote %s\n", o.out.c_str());
  return any_diverged ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design and simulation of a PI-regulated reaction-diffusion "
               "loop with a time-varying state delay"};
  app.require_subcommand(1);
  Options o;

  std::string presets;
  for (const auto& p : rdpi::preset_names()) presets += (presets.empty() ? "" : ", ") + p;

  auto add_common = [&](CLI::App* cmd) {
    auto* pre = cmd->add_option("--preset", o.preset, "Built-in scenario: " + presets);
    auto* cfg = cmd->add_option("--config", o.config, "Scenario file (YAML)");
    pre->excludes(cfg);
    cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
    cmd->add_option("--dt", o.dt, "Override the time step");
    cmd->add_option("--modes", o.modes, "Override the number of simulated modes");
    cmd->add_option("--t-end", o.t_end, "Override the horizon");
    cmd->add_option("--poles", o.poles, "Override the poles, e.g. -4,-5+1i,-5-1i");
    cmd->add_flag("--dump-config", o.dump, "Print the resolved configuration");
    cmd->callback([&o, cmd] {
      if (o.preset.empty() && o.config.empty()) {
        throw CLI::ValidationError(cmd->get_name(), "one of --preset or --config is required");
      }
    });
  };

  auto* design = app.add_subcommand("design", "Print the controller design");
  auto* run = app.add_subcommand("run", "Run one closed-loop simulation");
  auto* sweep = app.add_subcommand("sweep", "Run the scenario for each swept plant delay");
  for (auto* cmd : {design, run, sweep}) add_common(cmd);
  for (auto* cmd : {run, sweep}) {
    cmd->add_flag("--field", o.field, "Write field_y.csv snapshots");
    cmd->add_option("--field-interval", o.field_interval, "Time between field snapshots")
        ->capture_default_str();
    cmd->add_flag("--no-plot", o.no_plot, "Do not write plot.py");
  }
  sweep->add_option("--delays", o.sweep_h, "Override the swept delays, e.g. 1,2,3,4");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    return run_verb(verb, o);
  } catch (const rdpi::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const rdpi::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const rdpi::DivergenceError& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return 3;
  } catch (const rdpi::DesignGateError& e) {
    std::fprintf(stderr, "design refused: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
