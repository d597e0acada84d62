#include "rdpi/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rdpi/errors.hpp"

namespace rdpi {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double clamp_fraction(double s, double duration) {
  if (duration <= 0.0) return s >= 0.0 ? 1.0 : 0.0;
  return std::clamp(s / duration, 0.0, 1.0);
}

}  // namespace

double evaluate(const Primitive& p, double s) {
  return std::visit(
      Overloaded{
          [](const Constant& c) { return c.value; },
          [s](const Ramp& r) {
            return r.from + (r.to - r.from) * clamp_fraction(s, r.duration);
          },
          [s](const Smoothstep& q) {
            const double x = clamp_fraction(s, q.duration);
            const double w = x * x * x * (x * (6.0 * x - 15.0) + 10.0);
            return q.from + (q.to - q.from) * w;
          },
          [s](const Sinusoid& q) {
            return q.offset + q.amplitude * std::sin(q.omega * s + q.phase);
          },
          [s](const Burst& q) {
            if (s < 0.0 || s > q.duration || q.duration <= 0.0) return 0.0;
            const double w = std::sin(std::numbers::pi * s / q.duration);
            return q.amplitude * std::sin(q.omega * s) * w * w;
          },
      },
      p);
}

Signal::Signal(double value) : segments_{Segment{0.0, {Constant{value}}}} {}

Signal::Signal(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw ValidationError("signal needs a segment");
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    if (!(segments_[i].start > segments_[i - 1].start)) {
      throw ValidationError("signal segment starts must increase");
    }
  }
}

double Signal::operator()(double t) const {
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), t,
      [](double v, const Segment& seg) { return v < seg.start; });
  const Segment& seg = it == segments_.begin() ? segments_.front() : *(it - 1);
  double sum = 0.0;
  for (const Primitive& p : seg.terms) sum += evaluate(p, t - seg.start);
  return sum;
}

double delay_signal_eval(const DelaySignal& h, double t) {
  if (t < 0.0) throw ValidationError("delay signal evaluated at t < 0");
  return std::visit(
      Overloaded{
          [](const ConstantDelay& d) { return d.value; },
          [t](const SinusoidalDelay& d) {
            return d.mean + d.amplitude * std::sin(d.omega * t + d.phase);
          },
          [t](const TableDelay& d) {
            const auto& k = d.knots;
            if (k.empty() || t < k.front().first || t > k.back().first) {
              throw ValidationError("delay table does not cover t = " +
                                    std::to_string(t));
            }
            auto it = std::upper_bound(
                k.begin(), k.end(), t,
                [](double v, const auto& knot) { return v < knot.first; });
            if (it == k.end()) return k.back().second;
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double w = (t - lo.first) / (hi.first - lo.first);
            return lo.second + w * (hi.second - lo.second);
          },
      },
      h);
}

std::pair<double, double> delay_range(const DelaySignal& h) {
  return std::visit(
      Overloaded{
          [](const ConstantDelay& d) { return std::pair{d.value, d.value}; },
          [](const SinusoidalDelay& d) {
            if (d.omega == 0.0) {
              const double v = d.mean + d.amplitude * std::sin(d.phase);
              return std::pair{v, v};
            }
            const double a = std::abs(d.amplitude);
            return std::pair{d.mean - a, d.mean + a};
          },
          [](const TableDelay& d) {
            if (d.knots.empty()) throw ValidationError("empty delay table");
            double lo = d.knots.front().second, hi = lo;
            for (std::size_t i = 0; i < d.knots.size(); ++i) {
              if (i > 0 && !(d.knots[i].first > d.knots[i - 1].first)) {
                throw ValidationError("delay table times must increase");
              }
              lo = std::min(lo, d.knots[i].second);
              hi = std::max(hi, d.knots[i].second);
            }
            return std::pair{lo, hi};
          },
      },
      h);
}

}  // namespace rdpi
