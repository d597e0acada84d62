#include "rdpi/scenario_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <numbers>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace rdpi {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// ---------------------------------------------------------------------------
// Presets

constexpr std::string_view kFig1 = R"(# Time-varying delay, reference step to 5 and a perturbation surge.
name: fig1
plant: {a: 0.2, b: 2, c: 1, theta: pi/3, h_min: 0.5, h_max: 1.5}
design:
  poles: [-4, -5, -6]
simulation: {modes: 40, dt: 1e-3, t_end: 50, store_stride: 10, interpolation: linear}
delay: {kind: sinusoidal, mean: 1, amplitude: 0.5, omega: 5*pi, phase: pi/4}
reference:
  - at: 0
    constant: 0
  - at: 10
    terms:
      - smoothstep: {from: 0, to: 5, duration: 10}
      - burst: {amplitude: 2, omega: 0.8*pi, duration: 10}
perturbation:
  - at: 0
    constant: 1
  - at: 25
    smoothstep: {from: 1, to: 25, duration: 5}
  - at: 30
    smoothstep: {from: 25, to: 6, duration: 10}
initial:
  phi:
    - time: {sinusoid: {amplitude: 10, omega: 3*pi, phase: pi/2}}
      space: {polynomial: [0, 1, -2, 1]}
  zeta0:
    mode: auto
    profile: {sinusoid: {amplitude: 1, omega: 3*pi, phase: pi/2}}
)";

constexpr std::string_view kFig2Sweep = R"(# Delay mismatch: the integral state uses h_hat = 1 while the plant delay
# takes each value of the sweep.
name: fig2_sweep
plant: {a: 0.2, b: 2, c: 1, theta: pi/3, h_min: 0.5, h_max: 4}
design:
  poles: [-4, -5, -6]
simulation: {modes: 40, dt: 1e-3, t_end: 40, store_stride: 10, interpolation: linear}
delay: {kind: constant, value: 1}
delay_estimate: {kind: constant, value: 1}
reference:
  - at: 0
    constant: 0
  - at: 5
    smoothstep: {from: 0, to: 5, duration: 5}
perturbation: 1
initial:
  phi:
    - time: {sinusoid: {amplitude: 10, omega: 3*pi, phase: pi/2}}
      space: {polynomial: [0, 1, -2, 1]}
  zeta0:
    mode: auto
    profile: {sinusoid: {amplitude: 1, omega: 3*pi, phase: pi/2}}
sweep:
  h: [1, 2, 3, 4]
)";

constexpr std::string_view kStabilization = R"(# Zero reference and zero perturbation: pure stabilization.
name: stabilization_only
plant: {a: 0.2, b: 2, c: 1, theta: pi/3, h_min: 0.5, h_max: 1.5}
design:
  poles: [-4, -5, -6]
simulation: {modes: 40, dt: 1e-3, t_end: 20, store_stride: 10, interpolation: linear}
delay: {kind: sinusoidal, mean: 1, amplitude: 0.5, omega: 5*pi, phase: pi/4}
reference: 0
perturbation: 0
initial:
  phi:
    - time: {sinusoid: {amplitude: 10, omega: 3*pi, phase: pi/2}}
      space: {polynomial: [0, 1, -2, 1]}
  zeta0:
    mode: auto
    profile: {sinusoid: {amplitude: 1, omega: 3*pi, phase: pi/2}}
)";

// ---------------------------------------------------------------------------
// Parsing helpers

int line_of(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  return m.line >= 0 ? m.line + 1 : 0;
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& what) {
  throw ConfigError(what, line_of(n));
}

void expect_map(const YAML::Node& n, const std::string& ctx) {
  if (!n.IsMap()) fail(n, ctx + ": expected a mapping");
}

void check_keys(const YAML::Node& n, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
  expect_map(n, ctx);
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                [&](const char* a) { return key == a; });
    if (!ok) fail(kv.first, ctx + ": unknown key '" + key + "'");
  }
}

double number(const YAML::Node& n, const std::string& ctx) {
  if (!n.IsScalar()) fail(n, ctx + ": expected a number");
  try {
    return parse_number(n.Scalar());
  } catch (const ConfigError& e) {
    fail(n, ctx + ": " + e.what());
  }
}

double number_or(const YAML::Node& parent, const char* key, double fallback,
                 const std::string& ctx) {
  const YAML::Node n = parent[key];
  return n ? number(n, ctx + "." + key) : fallback;
}

double required_number(const YAML::Node& parent, const char* key,
                       const std::string& ctx) {
  const YAML::Node n = parent[key];
  if (!n) fail(parent, ctx + ": missing required key '" + key + "'");
  return number(n, ctx + "." + key);
}

int integer(const YAML::Node& n, const std::string& ctx) {
  const double v = number(n, ctx);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    fail(n, ctx + ": expected an integer");
  }
  return static_cast<int>(v);
}

std::vector<double> number_list(const YAML::Node& n, const std::string& ctx) {
  if (!n.IsSequence()) fail(n, ctx + ": expected a list of numbers");
  std::vector<double> out;
  for (const auto& item : n) out.push_back(number(item, ctx));
  return out;
}

Primitive parse_primitive(const std::string& kind, const YAML::Node& body,
                          const std::string& ctx) {
  const std::string where = ctx + "." + kind;
  if (kind == "constant") return Constant{number(body, where)};
  if (kind == "ramp" || kind == "smoothstep") {
    check_keys(body, {"from", "to", "duration"}, where);
    const double from = required_number(body, "from", where);
    const double to = required_number(body, "to", where);
    const double duration = required_number(body, "duration", where);
    if (!(duration > 0.0)) fail(body, where + ": duration must be > 0");
    if (kind == "ramp") return Ramp{from, to, duration};
    return Smoothstep{from, to, duration};
  }
  if (kind == "sinusoid") {
    check_keys(body, {"offset", "amplitude", "omega", "phase"}, where);
    return Sinusoid{number_or(body, "offset", 0.0, where),
                    required_number(body, "amplitude", where),
                    required_number(body, "omega", where),
                    number_or(body, "phase", 0.0, where)};
  }
  if (kind == "burst") {
    check_keys(body, {"amplitude", "omega", "duration"}, where);
    const Burst b{required_number(body, "amplitude", where),
                  required_number(body, "omega", where),
                  required_number(body, "duration", where)};
    if (!(b.duration > 0.0)) fail(body, where + ": duration must be > 0");
    return b;
  }
  fail(body, ctx + ": unknown signal primitive '" + kind + "'");
}

bool is_primitive_key(const std::string& k) {
  return k == "constant" || k == "ramp" || k == "smoothstep" ||
         k == "sinusoid" || k == "burst";
}

Primitive parse_primitive_map(const YAML::Node& n, const std::string& ctx) {
  expect_map(n, ctx);
  if (n.size() != 1) fail(n, ctx + ": a term holds exactly one primitive");
  const auto kv = *n.begin();
  return parse_primitive(kv.first.as<std::string>(), kv.second, ctx);
}

Segment parse_segment(const YAML::Node& n, double default_start,
                      const std::string& ctx) {
  expect_map(n, ctx);
  Segment seg;
  seg.start = default_start;
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    if (key == "at") {
      seg.start = number(kv.second, ctx + ".at");
    } else if (key == "terms") {
      if (!kv.second.IsSequence()) fail(kv.second, ctx + ".terms: expected a list");
      for (const auto& t : kv.second) {
        seg.terms.push_back(parse_primitive_map(t, ctx + ".terms"));
      }
    } else if (is_primitive_key(key)) {
      seg.terms.push_back(parse_primitive(key, kv.second, ctx));
    } else {
      fail(kv.first, ctx + ": unknown key '" + key + "'");
    }
  }
  if (seg.terms.empty()) fail(n, ctx + ": segment without terms");
  return seg;
}

Signal parse_signal(const YAML::Node& n, const std::string& ctx) {
  try {
    if (n.IsScalar()) return Signal(number(n, ctx));
    if (n.IsMap()) return Signal({parse_segment(n, 0.0, ctx)});
    if (n.IsSequence()) {
      std::vector<Segment> segs;
      for (std::size_t i = 0; i < n.size(); ++i) {
        const std::string sctx = ctx + "[" + std::to_string(i) + "]";
        if (i > 0 && !n[i]["at"]) fail(n[i], sctx + ": missing 'at'");
        segs.push_back(parse_segment(n[i], 0.0, sctx));
      }
      return Signal(std::move(segs));
    }
  } catch (const ValidationError& e) {
    fail(n, ctx + ": " + e.what());
  }
  fail(n, ctx + ": expected a number, a segment or a list of segments");
}

DelaySignal parse_delay(const YAML::Node& n, const std::string& ctx) {
  if (n.IsScalar()) return ConstantDelay{number(n, ctx)};
  expect_map(n, ctx);
  const YAML::Node kind_node = n["kind"];
  if (!kind_node) fail(n, ctx + ": missing required key 'kind'");
  const std::string kind = kind_node.as<std::string>();
  if (kind == "constant") {
    check_keys(n, {"kind", "value"}, ctx);
    return ConstantDelay{required_number(n, "value", ctx)};
  }
  if (kind == "sinusoidal") {
    check_keys(n, {"kind", "mean", "amplitude", "omega", "phase"}, ctx);
    return SinusoidalDelay{required_number(n, "mean", ctx),
                           required_number(n, "amplitude", ctx),
                           required_number(n, "omega", ctx),
                           number_or(n, "phase", 0.0, ctx)};
  }
  if (kind == "table") {
    check_keys(n, {"kind", "knots"}, ctx);
    const YAML::Node knots = n["knots"];
    if (!knots || !knots.IsSequence()) fail(n, ctx + ": 'knots' must be a list");
    TableDelay table;
    for (const auto& k : knots) {
      const std::vector<double> pair = number_list(k, ctx + ".knots");
      if (pair.size() != 2) fail(k, ctx + ".knots: expected [time, value]");
      table.knots.emplace_back(pair[0], pair[1]);
    }
    try {
      (void)delay_range(table);
    } catch (const ValidationError& e) {
      fail(knots, ctx + ": " + e.what());
    }
    return table;
  }
  fail(kind_node, ctx + ": unknown delay kind '" + kind + "'");
}

SpatialProfile parse_space(const YAML::Node& n, const std::string& ctx) {
  expect_map(n, ctx);
  if (n.size() != 1) fail(n, ctx + ": expected one of polynomial, eigenmode, modal");
  const auto kv = *n.begin();
  const std::string kind = kv.first.as<std::string>();
  if (kind == "polynomial") {
    return PolynomialProfile{number_list(kv.second, ctx + ".polynomial")};
  }
  if (kind == "eigenmode") {
    const int idx = integer(kv.second, ctx + ".eigenmode");
    if (idx < 0) fail(kv.second, ctx + ".eigenmode: index must be >= 0");
    return EigenmodeProfile{idx};
  }
  if (kind == "modal") return ModalProfile{number_list(kv.second, ctx + ".modal")};
  fail(kv.first, ctx + ": unknown spatial profile '" + kind + "'");
}

std::vector<Complex> parse_pole_list(const YAML::Node& n,
                                     const std::string& ctx) {
  if (n.IsScalar()) {
    try {
      return parse_poles(n.Scalar());
    } catch (const ConfigError& e) {
      fail(n, ctx + ": " + e.what());
    }
  }
  if (!n.IsSequence()) fail(n, ctx + ": expected a list of poles");
  std::vector<Complex> poles;
  for (const auto& item : n) {
    if (!item.IsScalar()) fail(item, ctx + ": expected a pole");
    try {
      const auto one = parse_poles(item.Scalar());
      poles.insert(poles.end(), one.begin(), one.end());
    } catch (const ConfigError& e) {
      fail(item, ctx + ": " + e.what());
    }
  }
  return poles;
}

// ---------------------------------------------------------------------------
// Emission helpers

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit_primitive(YAML::Emitter& out, const Primitive& p) {
  out << YAML::Flow << YAML::BeginMap;
  std::visit(
      Overloaded{
          [&](const Constant& c) { out << YAML::Key << "constant" << YAML::Value << fmt(c.value); },
          [&](const Ramp& r) {
            out << YAML::Key << "ramp" << YAML::Value << YAML::BeginMap
                << YAML::Key << "from" << YAML::Value << fmt(r.from)
                << YAML::Key << "to" << YAML::Value << fmt(r.to)
                << YAML::Key << "duration" << YAML::Value << fmt(r.duration)
                << YAML::EndMap;
          },
          [&](const Smoothstep& r) {
            out << YAML::Key << "smoothstep" << YAML::Value << YAML::BeginMap
                << YAML::Key << "from" << YAML::Value << fmt(r.from)
                << YAML::Key << "to" << YAML::Value << fmt(r.to)
                << YAML::Key << "duration" << YAML::Value << fmt(r.duration)
                << YAML::EndMap;
          },
          [&](const Sinusoid& s) {
            out << YAML::Key << "sinusoid" << YAML::Value << YAML::BeginMap
                << YAML::Key << "offset" << YAML::Value << fmt(s.offset)
                << YAML::Key << "amplitude" << YAML::Value << fmt(s.amplitude)
                << YAML::Key << "omega" << YAML::Value << fmt(s.omega)
                << YAML::Key << "phase" << YAML::Value << fmt(s.phase)
                << YAML::EndMap;
          },
          [&](const Burst& b) {
            out << YAML::Key << "burst" << YAML::Value << YAML::BeginMap
                << YAML::Key << "amplitude" << YAML::Value << fmt(b.amplitude)
                << YAML::Key << "omega" << YAML::Value << fmt(b.omega)
                << YAML::Key << "duration" << YAML::Value << fmt(b.duration)
                << YAML::EndMap;
          },
      },
      p);
  out << YAML::EndMap;
}

void emit_signal(YAML::Emitter& out, const Signal& s) {
  out << YAML::BeginSeq;
  for (const Segment& seg : s.segments()) {
    out << YAML::BeginMap << YAML::Key << "at" << YAML::Value << fmt(seg.start)
        << YAML::Key << "terms" << YAML::Value << YAML::BeginSeq;
    for (const Primitive& p : seg.terms) emit_primitive(out, p);
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq;
}

void emit_delay(YAML::Emitter& out, const DelaySignal& d) {
  out << YAML::BeginMap;
  std::visit(
      Overloaded{
          [&](const ConstantDelay& c) {
            out << YAML::Key << "kind" << YAML::Value << "constant"
                << YAML::Key << "value" << YAML::Value << fmt(c.value);
          },
          [&](const SinusoidalDelay& s) {
            out << YAML::Key << "kind" << YAML::Value << "sinusoidal"
                << YAML::Key << "mean" << YAML::Value << fmt(s.mean)
                << YAML::Key << "amplitude" << YAML::Value << fmt(s.amplitude)
                << YAML::Key << "omega" << YAML::Value << fmt(s.omega)
                << YAML::Key << "phase" << YAML::Value << fmt(s.phase);
          },
          [&](const TableDelay& t) {
            out << YAML::Key << "kind" << YAML::Value << "table" << YAML::Key
                << "knots" << YAML::Value << YAML::BeginSeq;
            for (const auto& [time, value] : t.knots) {
              out << YAML::Flow << YAML::BeginSeq << fmt(time) << fmt(value)
                  << YAML::EndSeq;
            }
            out << YAML::EndSeq;
          },
      },
      d);
  out << YAML::EndMap;
}

void emit_numbers(YAML::Emitter& out, const std::vector<double>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << fmt(x);
  out << YAML::EndSeq;
}

std::string pole_text(const Complex& p) {
  if (p.imag() == 0.0) return fmt(p.real());
  return fmt(p.real()) + (p.imag() >= 0 ? "+" : "") + fmt(p.imag()) + "i";
}

}  // namespace

// ---------------------------------------------------------------------------

double parse_number(std::string_view text) {
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto factor = [&]() -> double {
    skip();
    if (text.substr(pos, 2) == "pi") {
      pos += 2;
      return std::numbers::pi;
    }
    double v = 0.0;
    const char* begin = text.data() + pos;
    const char* end = text.data() + text.size();
    if (pos < text.size() && text[pos] == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr == begin) {
      throw ConfigError("cannot parse number '" + std::string(text) + "'");
    }
    pos = static_cast<std::size_t>(ptr - text.data());
    return v;
  };

  skip();
  double sign = 1.0;
  if (pos < text.size() && text[pos] == '-' && text.substr(pos + 1, 2) == "pi") {
    sign = -1.0;
    ++pos;
  }
  double value = sign * factor();
  for (;;) {
    skip();
    if (pos >= text.size()) break;
    const char op = text[pos];
    if (op != '*' && op != '/') {
      throw ConfigError("cannot parse number '" + std::string(text) + "'");
    }
    ++pos;
    const double rhs = factor();
    value = op == '*' ? value * rhs : value / rhs;
  }
  if (!std::isfinite(value)) {
    throw ConfigError("non-finite number '" + std::string(text) + "'");
  }
  return value;
}

std::vector<Complex> parse_poles(std::string_view text) {
  std::vector<Complex> poles;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string token(text.substr(start, end - start));
    token.erase(std::remove_if(token.begin(), token.end(),
                               [](unsigned char ch) { return std::isspace(ch); }),
                token.end());
    if (token.empty()) throw ConfigError("empty pole in list '" + std::string(text) + "'");
    if (token.back() == 'i' || token.back() == 'j') {
      token.pop_back();
      std::size_t split = std::string::npos;
      for (std::size_t k = token.size(); k-- > 1;) {
        if ((token[k] == '+' || token[k] == '-') && token[k - 1] != 'e' &&
            token[k - 1] != 'E') {
          split = k;
          break;
        }
      }
      double re = 0.0, im = 0.0;
      std::string imag_text;
      if (split == std::string::npos) {
        imag_text = token;
      } else {
        re = parse_number(token.substr(0, split));
        imag_text = token.substr(split);
      }
      if (imag_text == "+" || imag_text.empty()) {
        im = 1.0;
      } else if (imag_text == "-") {
        im = -1.0;
      } else {
        im = parse_number(imag_text);
      }
      poles.emplace_back(re, im);
    } else {
      poles.emplace_back(parse_number(token), 0.0);
    }
    start = end + 1;
  }
  return poles;
}

Experiment parse_experiment(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
  if (root.IsNull() || (root.IsMap() && root.size() == 0)) {
    throw ConfigError(
        "empty configuration; required keys: plant, delay, simulation");
  }
  check_keys(root,
             {"name", "plant", "design", "simulation", "delay",
              "delay_estimate", "reference", "perturbation", "initial",
              "sweep"},
             "config");
  std::vector<std::string> missing;
  for (const char* key : {"plant", "delay", "simulation"}) {
    if (!root[key]) missing.emplace_back(key);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ConfigError("missing required keys: " + list, line_of(root));
  }

  Experiment ex;
  Scenario& s = ex.scenario;
  if (root["name"]) s.name = root["name"].as<std::string>();

  const YAML::Node plant = root["plant"];
  check_keys(plant, {"a", "b", "c", "theta", "h_min", "h_max"}, "plant");
  s.plant.a = required_number(plant, "a", "plant");
  s.plant.b = required_number(plant, "b", "plant");
  s.plant.c = required_number(plant, "c", "plant");
  s.plant.theta = required_number(plant, "theta", "plant");
  s.plant.h_min = required_number(plant, "h_min", "plant");
  s.plant.h_max = required_number(plant, "h_max", "plant");

  if (const YAML::Node design = root["design"]) {
    check_keys(design, {"poles", "N", "alpha_tail_depth"}, "design");
    if (design["poles"]) s.design.poles = parse_pole_list(design["poles"], "design.poles");
    if (design["N"]) s.design.N = integer(design["N"], "design.N");
    if (design["alpha_tail_depth"]) {
      s.design.alpha_tail_depth =
          integer(design["alpha_tail_depth"], "design.alpha_tail_depth");
    }
  }

  const YAML::Node sim = root["simulation"];
  check_keys(sim, {"modes", "dt", "t_end", "store_stride", "interpolation"},
             "simulation");
  if (sim["modes"]) s.sim_modes = integer(sim["modes"], "simulation.modes");
  s.dt = number_or(sim, "dt", s.dt, "simulation");
  s.t_end = required_number(sim, "t_end", "simulation");
  if (sim["store_stride"]) {
    s.store_stride = integer(sim["store_stride"], "simulation.store_stride");
  }
  if (const YAML::Node interp = sim["interpolation"]) {
    const std::string v = interp.as<std::string>();
    if (v == "linear" || v == "1") {
      s.interp = Interpolation::Linear;
    } else if (v == "cubic" || v == "3") {
      s.interp = Interpolation::Cubic;
    } else {
      fail(interp, "simulation.interpolation: expected linear or cubic");
    }
  }

  s.h = parse_delay(root["delay"], "delay");
  if (const YAML::Node est = root["delay_estimate"]) {
    s.h_hat = parse_delay(est, "delay_estimate");
    s.zeta_delay = ZetaDelay::Estimate;
  } else {
    s.h_hat = s.h;
    s.zeta_delay = ZetaDelay::Exact;
  }

  if (root["reference"]) s.reference = parse_signal(root["reference"], "reference");
  if (root["perturbation"]) {
    s.perturbation = parse_signal(root["perturbation"], "perturbation");
  }

  if (const YAML::Node init = root["initial"]) {
    check_keys(init, {"phi", "zeta0"}, "initial");
    if (const YAML::Node phi = init["phi"]) {
      if (!phi.IsSequence()) fail(phi, "initial.phi: expected a list of terms");
      for (std::size_t i = 0; i < phi.size(); ++i) {
        const std::string ctx = "initial.phi[" + std::to_string(i) + "]";
        const YAML::Node term = phi[i];
        check_keys(term, {"time", "space"}, ctx);
        if (!term["space"]) fail(term, ctx + ": missing required key 'space'");
        InitialField::Term t{
            term["time"] ? parse_signal(term["time"], ctx + ".time") : Signal(1.0),
            parse_space(term["space"], ctx + ".space")};
        s.phi.terms.push_back(std::move(t));
      }
    }
    if (const YAML::Node z = init["zeta0"]) {
      check_keys(z, {"mode", "profile"}, "initial.zeta0");
      if (z["mode"]) {
        const std::string mode = z["mode"].as<std::string>();
        if (mode == "auto") {
          s.zeta0.mode = ZetaInit::Mode::Auto;
        } else if (mode == "explicit") {
          s.zeta0.mode = ZetaInit::Mode::Explicit;
        } else {
          fail(z["mode"], "initial.zeta0.mode: expected auto or explicit");
        }
      }
      if (z["profile"]) s.zeta0.profile = parse_signal(z["profile"], "initial.zeta0.profile");
    }
  }

  if (const YAML::Node sweep = root["sweep"]) {
    check_keys(sweep, {"h"}, "sweep");
    if (!sweep["h"]) fail(sweep, "sweep: missing required key 'h'");
    ex.sweep_delays = number_list(sweep["h"], "sweep.h");
    if (ex.sweep_delays.empty()) fail(sweep, "sweep.h: empty list");
  }

  s.validate();
  for (double h : ex.sweep_delays) {
    if (h < s.plant.h_min || h > s.plant.h_max) {
      throw ValidationError("sweep delay " + fmt(h) +
                            " outside [h_min, h_max]");
    }
  }
  return ex;
}

Scenario parse_scenario(std::string_view text) {
  return parse_experiment(text).scenario;
}

std::string serialize_experiment(const Experiment& ex) {
  const Scenario& s = ex.scenario;
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << s.name;
  out << YAML::Key << "plant" << YAML::Value << YAML::Flow << YAML::BeginMap
      << YAML::Key << "a" << YAML::Value << fmt(s.plant.a)
      << YAML::Key << "b" << YAML::Value << fmt(s.plant.b)
      << YAML::Key << "c" << YAML::Value << fmt(s.plant.c)
      << YAML::Key << "theta" << YAML::Value << fmt(s.plant.theta)
      << YAML::Key << "h_min" << YAML::Value << fmt(s.plant.h_min)
      << YAML::Key << "h_max" << YAML::Value << fmt(s.plant.h_max)
      << YAML::EndMap;

  out << YAML::Key << "design" << YAML::Value << YAML::BeginMap;
  if (!s.design.poles.empty()) {
    out << YAML::Key << "poles" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const Complex& p : s.design.poles) out << pole_text(p);
    out << YAML::EndSeq;
  }
  if (s.design.N) out << YAML::Key << "N" << YAML::Value << *s.design.N;
  out << YAML::Key << "alpha_tail_depth" << YAML::Value
      << s.design.alpha_tail_depth << YAML::EndMap;

  out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap
      << YAML::Key << "modes" << YAML::Value << s.sim_modes
      << YAML::Key << "dt" << YAML::Value << fmt(s.dt)
      << YAML::Key << "t_end" << YAML::Value << fmt(s.t_end)
      << YAML::Key << "store_stride" << YAML::Value << s.store_stride
      << YAML::Key << "interpolation" << YAML::Value
      << (s.interp == Interpolation::Cubic ? "cubic" : "linear")
      << YAML::EndMap;

  out << YAML::Key << "delay" << YAML::Value;
  emit_delay(out, s.h);
  if (s.zeta_delay == ZetaDelay::Estimate) {
    out << YAML::Key << "delay_estimate" << YAML::Value;
    emit_delay(out, s.h_hat);
  }
  out << YAML::Key << "reference" << YAML::Value;
  emit_signal(out, s.reference);
  out << YAML::Key << "perturbation" << YAML::Value;
  emit_signal(out, s.perturbation);

  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "phi" << YAML::Value << YAML::BeginSeq;
  for (const InitialField::Term& term : s.phi.terms) {
    out << YAML::BeginMap << YAML::Key << "time" << YAML::Value;
    emit_signal(out, term.time);
    out << YAML::Key << "space" << YAML::Value << YAML::BeginMap;
    std::visit(Overloaded{
                   [&](const PolynomialProfile& p) {
                     out << YAML::Key << "polynomial" << YAML::Value;
                     emit_numbers(out, p.coefficients);
                   },
                   [&](const EigenmodeProfile& e) {
                     out << YAML::Key << "eigenmode" << YAML::Value << e.index;
                   },
                   [&](const ModalProfile& m) {
                     out << YAML::Key << "modal" << YAML::Value;
                     emit_numbers(out, m.coefficients);
                   },
               },
               term.space);
    out << YAML::EndMap << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "zeta0" << YAML::Value << YAML::BeginMap << YAML::Key
      << "mode" << YAML::Value
      << (s.zeta0.mode == ZetaInit::Mode::Auto ? "auto" : "explicit")
      << YAML::Key << "profile" << YAML::Value;
  emit_signal(out, s.zeta0.profile);
  out << YAML::EndMap << YAML::EndMap;

  if (!ex.sweep_delays.empty()) {
    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap << YAML::Key
        << "h" << YAML::Value;
    emit_numbers(out, ex.sweep_delays);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::vector<std::string> preset_names() {
  return {"fig1", "fig2_sweep", "stabilization_only"};
}

std::string preset_text(std::string_view name) {
  if (name == "fig1") return std::string(kFig1);
  if (name == "fig2_sweep") return std::string(kFig2Sweep);
  if (name == "stabilization_only") return std::string(kStabilization);
  throw ConfigError("unknown preset '" + std::string(name) +
                    "' (expected fig1, fig2_sweep or stabilization_only)");
}

}  // namespace rdpi
