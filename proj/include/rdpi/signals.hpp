#pragma once

#include <utility>
#include <variant>
#include <vector>

namespace rdpi {

// Scalar time signals built from a few smooth primitives. A signal is a list
// of segments; the segment with the latest start not after t is active and
// evaluates the sum of its terms at the local time t - start. Before the
// first start the first segment is used.

/// value
struct Constant {
  double value = 0.0;
};
/// Linear from `from` to `to` over `duration`, then held.
struct Ramp {
  double from = 0.0;
  double to = 0.0;
  double duration = 1.0;
};
/// Quintic (C2) transition from `from` to `to` over `duration`, then held.
struct Smoothstep {
  double from = 0.0;
  double to = 0.0;
  double duration = 1.0;
};
/// offset + amplitude sin(omega s + phase)
struct Sinusoid {
  double offset = 0.0;
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;
};
/// amplitude sin(omega s) sin^2(pi s / duration) on [0, duration], else 0.
struct Burst {
  double amplitude = 0.0;
  double omega = 0.0;
  double duration = 1.0;
};

using Primitive = std::variant<Constant, Ramp, Smoothstep, Sinusoid, Burst>;

double evaluate(const Primitive& p, double local_time);

struct Segment {
  double start = 0.0;
  std::vector<Primitive> terms;
};

class Signal {
 public:
  Signal() : Signal(0.0) {}
  explicit Signal(double value);
  explicit Signal(std::vector<Segment> segments);

  double operator()(double t) const;
  const std::vector<Segment>& segments() const { return segments_; }

 private:
  std::vector<Segment> segments_;
};

struct ConstantDelay {
  double value = 1.0;
};
/// mean + amplitude sin(omega t + phase)
struct SinusoidalDelay {
  double mean = 1.0;
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;
};
/// Piecewise-linear through (time, value) knots; times strictly increasing.
struct TableDelay {
  std::vector<std::pair<double, double>> knots;
};

using DelaySignal = std::variant<ConstantDelay, SinusoidalDelay, TableDelay>;

/// h(t) for t >= 0. Throws ValidationError for t < 0 or outside a table.
double delay_signal_eval(const DelaySignal& h, double t);

/// Guaranteed range of the descriptor over t >= 0 (exact for every kind).
std::pair<double, double> delay_range(const DelaySignal& h);

}  // namespace rdpi
