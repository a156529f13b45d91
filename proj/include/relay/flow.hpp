#pragma once

#include <array>

#include "relay/params.hpp"

namespace relay {

struct Headpoint {
  double x = 0.0;
  double y = 0.0;

  friend Headpoint operator-(Headpoint v) { return {-v.x, -v.y}; }
  friend bool operator==(const Headpoint&, const Headpoint&) = default;
};

/// Frozen feedback sigma * sign(x(t-1)) on one inter-event segment.
enum class FlowSign : int { Minus = -1, Plus = 1 };

constexpr double value(FlowSign s) noexcept { return static_cast<double>(static_cast<int>(s)); }
constexpr FlowSign flip(FlowSign s) noexcept {
  return s == FlowSign::Plus ? FlowSign::Minus : FlowSign::Plus;
}
constexpr FlowSign flow_sign(int sign) noexcept { return sign > 0 ? FlowSign::Plus : FlowSign::Minus; }

/// Below this value of |omega2| t^2 the trigonometric/hyperbolic kernels are
/// evaluated from their Taylor series, which is shared by both regimes.
inline constexpr double kSeriesThreshold = 1e-8;

/// cos(omega t), cosh(|omega| t) or 1, depending on the regime.
double gcos(double t, const Rates& r);
/// sin(omega t)/omega, sinh(|omega| t)/|omega| or t.
double gsinc(double t, const Rates& r);

// e^{-mu t} gcos(t) and e^{-mu t} gsinc(t). Bounded for t >= 0 in every
// regime, so preferred wherever the exponential factor multiplies anyway.
double damped_cos(double t, const Rates& r);
double damped_sinc(double t, const Rates& r);

using Matrix2 = std::array<std::array<double, 2>, 2>;

Matrix2 flow_matrix(double t, const Rates& r);
std::array<double, 2> flow_offset(double t, const Rates& r);

/// A(t) v + s b(t): the constant-feedback flow from headpoint v for time t.
Headpoint apply_flow(double t, Headpoint v, FlowSign s, const Rates& r);

}  // namespace relay
