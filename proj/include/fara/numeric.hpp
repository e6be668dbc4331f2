#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace fara {

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      correction_ += (sum_ - t) + value;
    } else {
      correction_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  /// Adds a*b with the product's rounding error captured by fma.
  void add_product(double a, double b) {
    const double p = a * b;
    add(p);
    correction_ += std::fma(a, b, -p);
  }

  double value() const { return sum_ + correction_; }

 private:
  double sum_ = 0.0;
  double correction_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

inline double compensated_dot(std::span<const double> a, std::span<const double> b) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add_product(a[i], b[i]);
  return acc.value();
}

}  // namespace fara
