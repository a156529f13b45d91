#pragma once

#include <optional>
#include <span>
#include <vector>

#include "relay/atlas.hpp"
#include "relay/event_sim.hpp"
#include "relay/sym4_map.hpp"

namespace relay {

struct TorusOptions {
  /// Section points (H events) simulated per Omega.
  std::size_t h_iterates = 100000;
  /// Leading fraction of the section dropped before classification.
  double transient_fraction = 0.2;
  /// Reuse the final state of the previous Omega as the next seed.
  bool warm_start = true;
  /// Map whose fixed point seeds the first run.
  int nu = 3;
  /// Relative kick applied to y at the seeding fixed point.
  double perturbation = 1e-2;
  ClassifyOptions classify;
};

struct TorusSection {
  double Omega = 0.0;
  OrbitClass cls;
  /// Post-transient section points.
  std::vector<Headpoint> points;
  SystemState final_state;
};

/// Fixed point of map nu with its headpoint y scaled by (1 + eps).
SystemState perturbed_fixed_point_seed(const FixedPoint& fp, double eps);

/// Long run from one seed; classifies and returns the post-transient section.
TorusSection torus_section(const Parameters& p, const SystemState& seed, const TorusOptions& opts = {});

/// Sections for each Omega. Without an explicit seed the first run starts from
/// the perturbed fixed point of opts.nu (or a constant history if that map has
/// no valid fixed point).
std::vector<TorusSection> torus_scan(double Q, std::span<const double> Omegas, int sigma,
                                     const TorusOptions& opts = {}, std::optional<SystemState> seed = {});

struct TorusTrackOptions {
  /// Per-step section run; shorter than a scan run since the state is warm.
  TorusOptions section = [] {
    TorusOptions o;
    o.h_iterates = 10000;
    return o;
  }();
  double dQ_max = 0.01;
  double dQ_min = 1e-4;
  /// y extent of the section below which the orbit counts as collapsed; also
  /// at least half the extent at the previous accepted point.
  double min_amplitude = 0.3;
  /// Omega probes per measured torus width when recentering.
  int width_probes = 16;
};

struct TorusTrackPoint {
  double Q = 0.0;
  double Omega = 0.0;
  /// Omega interval found on the torus at this Q.
  double lo = 0.0;
  double hi = 0.0;
  double amplitude = 0.0;
};

struct TorusTrack {
  std::vector<TorusTrackPoint> points;
  /// Warm state at the last point.
  SystemState state;
  bool reached = false;
};

/// y extent of a section.
double section_amplitude(const TorusSection& s);

/// Follows a torus attractor in Q from (Q0, Omega0), recentering Omega inside
/// the torus window after every step. seed must already lie on the torus.
TorusTrack track_torus(double Q0, double Omega0, double Q1, int sigma, const SystemState& seed,
                       const TorusTrackOptions& opts = {});

enum class Criticality { Supercritical, Subcritical, Undetermined };
std::string_view to_string(Criticality c);

struct CriticalityOptions {
  /// Distance from the NS point, relative to its Omega, on the unstable side.
  double rel_offset = 1e-3;
  double perturbation = 1e-3;
  TorusOptions section;
};

/// Empirical label of an NS point: a small kick off the just-unstable fixed
/// point settling on a closed curve counts as supercritical, one landing on
/// another cycle (or decaying) as subcritical.
Criticality ns_criticality(const BifurcationPoint& ns, const CriticalityOptions& opts = {});

}  // namespace relay
