#pragma once

#include <cmath>

namespace relay {

/// Dimensionless model parameters: filter quality factor, product of center
/// frequency and delay, and the feedback sign.
class Parameters {
 public:
  Parameters(double Q, double Omega, int sigma);

  double Q() const noexcept { return Q_; }
  double Omega() const noexcept { return Omega_; }
  int sigma() const noexcept { return sigma_; }

  Parameters with_Omega(double Omega) const { return {Q_, Omega, sigma_}; }
  Parameters with_Q(double Q) const { return {Q, Omega_, sigma_}; }

  friend bool operator==(const Parameters&, const Parameters&) = default;

 private:
  double Q_;
  double Omega_;
  int sigma_;
};

enum class Regime { Underdamped, Overdamped, Critical };

/// Damping rate mu and the signed squared angular rate omega2 of the
/// constant-feedback linear flow.
struct Rates {
  double mu = 0.0;
  double omega2 = 0.0;
  Regime regime = Regime::Critical;

  /// |omega|; the angular rate when underdamped, the hyperbolic rate when
  /// overdamped.
  double omega_abs() const noexcept { return std::sqrt(std::abs(omega2)); }
  /// mu^2 + omega^2, which equals Omega^2.
  double Omega_sq() const noexcept { return mu * mu + omega2; }
};

Rates derive_rates(const Parameters& p);

}  // namespace relay
