#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rdpi/simulate.hpp"

namespace rdpi {

/// A parsed configuration file: one scenario, optionally swept over a list
/// of constant plant delays (each run keeps the scenario's delay estimate).
struct Experiment {
  Scenario scenario;
  std::vector<double> sweep_delays;
};

/// Parses the YAML scenario format documented in docs/scenario_format.md.
/// Unknown keys and malformed values raise ConfigError with the line number;
/// invariant violations raise ValidationError.
Experiment parse_experiment(std::string_view text);

/// parse_experiment(text).scenario
Scenario parse_scenario(std::string_view text);

/// Inverse of parse_experiment; numbers are written with 17 significant
/// digits so that re-parsing reproduces the run bit for bit.
std::string serialize_experiment(const Experiment& experiment);

/// Names of the built-in presets.
std::vector<std::string> preset_names();

/// Configuration text of a preset. Throws ConfigError for unknown names.
std::string preset_text(std::string_view name);

/// Parses a number with the small expression grammar used in configs:
/// products and quotients of decimal literals and `pi`, with a leading sign.
double parse_number(std::string_view text);

/// Parses "-4,-5+2i,-5-2i" into complex poles.
std::vector<Complex> parse_poles(std::string_view text);

}  // namespace rdpi
