#pragma once

#include <distsynth/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace distsynth {

// Reference spaces whose distance distribution is known in closed form,
// used as positive controls for the statistical checks.

// Unit-circumference circle with arc distance; d(X,Y) ~ U[0,1/2].
struct CircleSpace {
  static double distance(double x, double y) {
    const double a = std::fabs(x - y);
    return std::min(a, 1.0 - a);
  }
  static double sample_distance(Stream& rng) {
    return distance(rng.next_unit(), rng.next_unit());
  }
  static double target_cdf(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 0.5) return 1.0;
    return 2.0 * t;
  }
};

// Half-line with standard exponential measure; |X−Y| ~ Exp(1).
struct ExponentialLine {
  static double sample_distance(Stream& rng) {
    const double x = -std::log(rng.next_unit_open());
    const double y = -std::log(rng.next_unit_open());
    return std::fabs(x - y);
  }
  static double target_cdf(double t) { return t <= 0.0 ? 0.0 : 1.0 - std::exp(-t); }
};

// Fair binary sequences under d(x,y) = Σ_k 2^{-k}·|x_k−y_k|; the XOR of two
// independent fair sequences is again fair, so d ~ U[0,1]. 64 bits keep the
// discretization error (2^-64) far below any statistical resolution.
struct BinarySequenceSpace {
  static double distance(std::uint64_t x, std::uint64_t y) {
    return static_cast<double>(x ^ y) * 0x1p-64;
  }
  static double sample_distance(Stream& rng) {
    return distance(rng.next_u64(), rng.next_u64());
  }
  static double target_cdf(double t) { return std::clamp(t, 0.0, 1.0); }
};

// (0,1] with d(x,y) = |log x − log y| and uniform measure; since −log U is
// standard exponential, d ~ Exp(1) as well.
struct LogMetricSpace {
  static double distance(double x, double y) { return std::fabs(std::log(y / x)); }
  static double sample_distance(Stream& rng) {
    return distance(rng.next_unit_open(), rng.next_unit_open());
  }
  static double target_cdf(double t) { return t <= 0.0 ? 0.0 : 1.0 - std::exp(-t); }
};

}  // namespace distsynth
