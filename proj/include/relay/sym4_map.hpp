#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "relay/event_sim.hpp"
#include "relay/params.hpp"

namespace relay {

/// Map state at a Z-type event, normalised so the feedback on the next
/// segment is -1: y at the headpoint (x is zero) and the intervals between
/// the nu stored crossings, most recent first.
struct StateVector {
  double yZ = 0.0;
  std::vector<double> T;

  int nu() const noexcept { return static_cast<int>(T.size()); }
};

/// Time to the next H-type event: 1 - sum(T).
double delta_of(const StateVector& s);

/// Time from the H-type event to the next zero crossing.
double z_of(const StateVector& s, const Rates& r);

/// Z-to-Z two-event shift followed by the sign flip.
StateVector map_M(const StateVector& s, const Parameters& p);
/// Z-to-Z two-event shift without the sign flip.
StateVector map_M_plus(const StateVector& s, const Parameters& p);
/// R M+ R: shift through the opposite-sign half of the cycle.
StateVector map_M_minus(const StateVector& s, const Parameters& p);
StateVector reflect(StateVector s);

/// Event-simulator state equivalent to the map state, at time t.
SystemState to_system_state(const StateVector& s, const Parameters& p, double t = 0.0);
/// Inverse of to_system_state; st must sit exactly on a Z-type event.
StateVector from_system_state(const SystemState& st, const Parameters& p);

struct RootScanOptions {
  int grid_points = 512;
  int refinements = 8;
  double residual_tol = 1e-12;
};

/// Scaled residual of the switching-interval equation; a positive multiple
/// of tan(omega z) - sin(omega T)/(e^{mu T} + cos(omega T)).
double switching_residual(double T, int nu, const Rates& r);

/// Search bracket for the switching interval.
std::pair<double, double> switching_bracket(int nu, const Rates& r);

/// All roots of the switching-interval equation in its bracket, ascending.
std::vector<double> switching_roots(int nu, const Parameters& p, const RootScanOptions& opts = {});

/// Smallest root; throws NoRoot when the bracket holds none.
double solve_T_star(int nu, const Parameters& p, const RootScanOptions& opts = {});

struct Validity {
  bool z_window = false;
  bool delta_window = false;
  /// Crossing direction at the Z event agrees with the zero count and sigma.
  bool parity = false;

  bool ok() const noexcept { return z_window && delta_window && parity; }
};

struct FixedPoint {
  int nu = 0;
  double Tstar = 0.0;
  double yZstar = 0.0;
  double zstar = 0.0;
  double deltastar = 0.0;
  Validity valid;
  Parameters params;

  double period() const noexcept { return 2.0 * Tstar; }
  StateVector state() const;
};

/// Fixed-point record for a given switching interval.
FixedPoint make_fixed_point(int nu, const Parameters& p, double Tstar);

/// Smallest root that is a valid fixed point for p.sigma(); if none is valid,
/// the smallest root with its flags cleared. Throws NoRoot.
FixedPoint fixed_point(int nu, const Parameters& p, const RootScanOptions& opts = {});

/// Root nearest to T_guess, preferring valid ones.
FixedPoint fixed_point_near(int nu, const Parameters& p, double T_guess, const RootScanOptions& opts = {});

struct JacobianCoeffs {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  /// (a-1)d - bc - (1 + 2 gcos e^{-mu T} + e^{-2 mu T})
  double identity1_residual = 0.0;
  /// a(d+1) - bc - e^{-2 mu T}
  double identity2_residual = 0.0;
};

JacobianCoeffs jacobian_coeffs(const FixedPoint& fp);

Eigen::MatrixXd jacobian_matrix(const JacobianCoeffs& jc, int nu);

struct Spectrum {
  std::vector<std::complex<double>> roots;
  int unstable_count = 0;
};

/// Monic characteristic polynomial, coefficients by ascending power.
std::vector<double> char_poly(const JacobianCoeffs& jc, int nu);
std::complex<double> char_residual(const JacobianCoeffs& jc, int nu, std::complex<double> lambda);

Spectrum char_roots(const JacobianCoeffs& jc, int nu);

/// Spectrum of a fixed point, ready for stability decisions.
Spectrum spectrum_of(const FixedPoint& fp);

/// x at the H event (x(t-1) turning positive) of the periodic orbit.
double x_H(const FixedPoint& fp);

}  // namespace relay
