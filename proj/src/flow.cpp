#include "relay/flow.hpp"

#include <cmath>

namespace relay {

namespace {

bool use_series(double t, const Rates& r) {
  return r.regime == Regime::Critical || std::abs(r.omega2) * t * t < kSeriesThreshold;
}

double series_cos(double t, const Rates& r) {
  const double u = r.omega2 * t * t;
  return 1.0 - u / 2.0 + u * u / 24.0;
}

double series_sinc(double t, const Rates& r) {
  const double u = r.omega2 * t * t;
  return t * (1.0 - u / 6.0 + u * u / 120.0);
}

}  // namespace

double gcos(double t, const Rates& r) {
  if (use_series(t, r)) return series_cos(t, r);
  const double w = r.omega_abs();
  return r.regime == Regime::Underdamped ? std::cos(w * t) : std::cosh(w * t);
}

double gsinc(double t, const Rates& r) {
  if (use_series(t, r)) return series_sinc(t, r);
  const double w = r.omega_abs();
  return r.regime == Regime::Underdamped ? std::sin(w * t) / w : std::sinh(w * t) / w;
}

double damped_cos(double t, const Rates& r) {
  if (r.regime == Regime::Overdamped && !use_series(t, r)) {
    const double k = r.omega_abs();
    // mu - k written without cancellation: (mu^2 - k^2) / (mu + k) = Omega^2 / (mu + k).
    const double slow = r.Omega_sq() / (r.mu + k);
    const double fast = r.mu + k;
    return 0.5 * (std::exp(-slow * t) + std::exp(-fast * t));
  }
  return std::exp(-r.mu * t) * gcos(t, r);
}

double damped_sinc(double t, const Rates& r) {
  if (r.regime == Regime::Overdamped && !use_series(t, r)) {
    const double k = r.omega_abs();
    const double slow = r.Omega_sq() / (r.mu + k);
    const double fast = r.mu + k;
    return 0.5 * (std::exp(-slow * t) - std::exp(-fast * t)) / k;
  }
  return std::exp(-r.mu * t) * gsinc(t, r);
}

Matrix2 flow_matrix(double t, const Rates& r) {
  const double c = damped_cos(t, r);
  const double s = damped_sinc(t, r);
  const double mu = r.mu;
  return {{{c - mu * s, -2.0 * mu * s}, {r.Omega_sq() / (2.0 * mu) * s, c + mu * s}}};
}

std::array<double, 2> flow_offset(double t, const Rates& r) {
  const double c = damped_cos(t, r);
  const double s = damped_sinc(t, r);
  return {2.0 * r.mu * s, 1.0 - (c + r.mu * s)};
}

Headpoint apply_flow(double t, Headpoint v, FlowSign s, const Rates& r) {
  // Shift to the flow's fixed point (0, s); the homogeneous part is A(t).
  const Matrix2 a = flow_matrix(t, r);
  const double sv = value(s);
  const double u = v.y - sv;
  return {a[0][0] * v.x + a[0][1] * u, a[1][0] * v.x + a[1][1] * u + sv};
}

}  // namespace relay
