#include "relay/params.hpp"

#include <cmath>
#include <string>

#include "relay/error.hpp"

namespace relay {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::CornerCollision: return "CornerCollision";
    case ErrorKind::Nonoscillatory: return "Nonoscillatory";
    case ErrorKind::NoCrossing: return "NoCrossing";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::LostBranch: return "LostBranch";
  }
  return "Unknown";
}

Parameters::Parameters(double Q, double Omega, int sigma)
    : Q_(Q), Omega_(Omega), sigma_(sigma) {
  if (!(Q > 0.0) || !std::isfinite(Q)) {
    throw Error(ErrorKind::InvalidArgument, "Q must be positive and finite");
  }
  if (!(Omega > 0.0) || !std::isfinite(Omega)) {
    throw Error(ErrorKind::InvalidArgument, "Omega must be positive and finite");
  }
  if (sigma != 1 && sigma != -1) {
    throw Error(ErrorKind::InvalidArgument, "sigma must be +1 or -1, got " + std::to_string(sigma));
  }
}

Rates derive_rates(const Parameters& p) {
  Rates r;
  const double two_q = 2.0 * p.Q();
  r.mu = p.Omega() / two_q;
  const double disc = 4.0 * p.Q() * p.Q() - 1.0;
  r.omega2 = p.Omega() * p.Omega() * disc / (two_q * two_q);
  if (p.Q() > 0.5) {
    r.regime = Regime::Underdamped;
  } else if (p.Q() < 0.5) {
    r.regime = Regime::Overdamped;
  } else {
    r.regime = Regime::Critical;
    r.omega2 = 0.0;
  }
  return r;
}

}  // namespace relay
