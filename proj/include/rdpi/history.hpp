#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "rdpi/errors.hpp"

namespace rdpi {

enum class Interpolation { Linear = 1, Cubic = 3 };

/// Fixed-capacity ring of (time, state) samples with interpolated lookups.
/// Pushing into a full buffer drops the oldest sample. Times must increase.
template <typename Scalar = double>
class HistoryBuffer {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  HistoryBuffer(int dimension, int capacity,
                Interpolation order = Interpolation::Linear)
      : states_(dimension, std::max(capacity, 4)),
        times_(std::max(capacity, 4)),
        order_(order) {}

  int dimension() const { return static_cast<int>(states_.rows()); }
  int size() const { return size_; }
  int capacity() const { return static_cast<int>(times_.size()); }
  Interpolation order() const { return order_; }
  double oldest() const { return time_at(0); }
  double newest() const { return time_at(size_ - 1); }

  void push(double t, const Eigen::Ref<const Vector>& y) {
    if (size_ > 0 && !(t > newest())) {
      throw ValidationError("history: sample times must increase");
    }
    int slot;
    if (size_ < capacity()) {
      slot = physical(size_);
      ++size_;
    } else {
      slot = head_;
      head_ = (head_ + 1) % capacity();
    }
    times_(slot) = t;
    states_.col(slot) = y;
  }

  /// State at time t in [oldest(), newest()].
  void sample(double t, Eigen::Ref<Vector> out) const {
    if (size_ == 0 || t < oldest() || t > newest()) {
      throw ValidationError("history: lookup at t = " + std::to_string(t) +
                            " outside the retained window");
    }
    // Largest logical index with time <= t.
    int lo = 0, hi = size_ - 1;
    while (lo < hi) {
      const int mid = (lo + hi + 1) / 2;
      if (time_at(mid) <= t) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    if (time_at(lo) == t || size_ == 1) {
      out = states_.col(physical(lo));
      return;
    }
    if (order_ == Interpolation::Linear || size_ < 4) {
      const double t0 = time_at(lo), t1 = time_at(lo + 1);
      const Scalar w = Scalar((t - t0) / (t1 - t0));
      out = (Scalar(1) - w) * states_.col(physical(lo)) +
            w * states_.col(physical(lo + 1));
      return;
    }
    const int first = std::clamp(lo - 1, 0, size_ - 4);
    out.setZero();
    for (int j = 0; j < 4; ++j) {
      Scalar weight = 1;
      const double tj = time_at(first + j);
      for (int k = 0; k < 4; ++k) {
        if (k == j) continue;
        const double tk = time_at(first + k);
        weight *= Scalar((t - tk) / (tj - tk));
      }
      out += weight * states_.col(physical(first + j));
    }
  }

  Vector sample(double t) const {
    Vector out(dimension());
    sample(t, out);
    return out;
  }

 private:
  int physical(int logical) const { return (head_ + logical) % capacity(); }
  double time_at(int logical) const { return times_(physical(logical)); }

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> states_;
  Eigen::VectorXd times_;
  Interpolation order_;
  int head_ = 0;
  int size_ = 0;
};

}  // namespace rdpi
