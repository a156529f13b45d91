#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "relay/sym4_map.hpp"

namespace relay {

struct NSCoefficients {
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
};

NSCoefficients ns_coeffs(const FixedPoint& fp);

/// Real and imaginary parts of the characteristic equation on the unit
/// circle, lambda = e^{i phi}, after multiplication by e^{-i nu phi / 2}.
std::pair<double, double> ns_residuals(const NSCoefficients& f, int nu, double phi);

enum class BifKind { NS, PF, Corner1, Corner2 };
std::string_view to_string(BifKind kind);

struct BifurcationPoint {
  BifKind kind = BifKind::NS;
  double Q = 0.0;
  double Omega = 0.0;
  int nu = 0;
  int sigma = -1;
  double Tstar = 0.0;
  /// Root angle for NS points.
  std::optional<double> phi;
  /// Kind-specific residual (|lambda|-1 for NS, the pitchfork condition for PF).
  double residual = 0.0;
};

struct OmegaRange {
  double min = 0.0;
  double max = 0.0;
};

struct ScanOptions {
  int samples = 2000;
  RootScanOptions roots;
};

/// One sample of a fixed-point branch of a single map.
struct BranchSample {
  double Omega = 0.0;
  std::optional<FixedPoint> fp;  // empty where no valid fixed point exists
  Spectrum spectrum;
};

/// Valid fixed points of map nu along an Omega grid, following the root
/// nearest the previous sample.
std::vector<BranchSample> follow_branch(int nu, double Q, int sigma, OmegaRange range,
                                        const ScanOptions& opts = {});

/// (1 + d) + e^{-2 mu T*}; zero at a lambda = -1 root for odd nu.
double pitchfork_function(const FixedPoint& fp);
/// -a - 1; zero at a lambda = -1 root for even nu.
double pitchfork_function_even(const FixedPoint& fp);

/// Sign changes of the lambda = -1 condition along valid fixed points of
/// map nu, refined to the crossing. No precondition on nu or sigma.
std::vector<BifurcationPoint> pitchfork_candidates(int nu, double Q, int sigma, OmegaRange range,
                                                   const ScanOptions& opts = {});

/// Pitchfork points of the odd-nu branch under negative feedback.
std::vector<BifurcationPoint> pitchfork_locus(int nu, double Q, OmegaRange range,
                                              const ScanOptions& opts = {});

/// Points where a complex-conjugate root pair crosses the unit circle.
std::vector<BifurcationPoint> ns_locus(int nu, double Q, OmegaRange range, int sigma = -1,
                                       const ScanOptions& opts = {});

enum class CornerType { Relabel = 1, Terminal = 2 };

double Omega_from_omega(double omega, double Q);
double omega_from_Omega(double Omega, double Q);

/// Omega where omega = K pi, K = nu+1 (relabel) or 2nu+1 (terminal).
/// Empty when Q <= 1/2.
std::optional<double> corner_omega(int nu, double Q, CornerType type);

struct CornerCurve {
  int nu = 0;
  CornerType type = CornerType::Relabel;
  std::vector<std::pair<double, double>> points;  // (Q, Omega)
};

std::pair<CornerCurve, CornerCurve> corner_lines(int nu, std::span<const double> Qs);

/// Whether the valid branch of map nu reaches the given corner from below.
bool corner_on_branch(int nu, double Q, int sigma, CornerType type, const RootScanOptions& opts = {});

/// Map sharing a mode with nu across a relabel corner, if any.
std::optional<int> mode_partner(int nu, double Q, int sigma);

/// Normalised 3dB edges w = omega/omega_c of the bandpass filter.
std::pair<double, double> passband(double Q);

struct RegionCell {
  bool exists = false;
  bool stable = false;
  int unstable_count = -1;
  double Tstar = 0.0;
  double xH = 0.0;
};

struct RegionGrid {
  std::vector<int> nus;
  std::vector<double> Qs;
  std::vector<double> Omegas;
  int sigma = -1;
  std::vector<RegionCell> cells;

  const RegionCell& at(std::size_t iq, std::size_t io, std::size_t k) const {
    return cells[(iq * Omegas.size() + io) * nus.size() + k];
  }
};

std::vector<double> linspace(double lo, double hi, int n);

RegionGrid region_scan(std::span<const int> nus, std::span<const double> Qs, std::span<const double> Omegas,
                       int sigma, int threads = 1, const RootScanOptions& opts = {});

struct PeriodRow {
  int nu = 0;
  double Omega = 0.0;
  double Tstar = 0.0;
  double invP = 0.0;
  double xH = 0.0;
  int unstable_count = 0;
};

struct PeriodMarker {
  BifKind kind = BifKind::NS;
  int nu = 0;
  double Omega = 0.0;
  double invP = 0.0;
  double xH = 0.0;
};

struct PeriodDiagram {
  double Q = 0.0;
  int sigma = -1;
  std::vector<PeriodRow> rows;
  std::vector<PeriodMarker> markers;
  std::pair<double, double> passband;  // normalised filter edges
};

PeriodDiagram period_diagram(std::span<const int> nus, double Q, OmegaRange range, int sigma,
                             const ScanOptions& opts = {}, int threads = 1);

struct ModeSample {
  double Omega = 0.0;
  int nu = 0;
  FixedPoint fp;
  double xH = 0.0;
  double invP = 0.0;
  Spectrum spectrum;
};

struct ModeBranch {
  std::vector<ModeSample> samples;
  std::vector<BifurcationPoint> relabels;
  std::optional<BifurcationPoint> termination;
};

/// Follow a four-symbol symmetric mode from range.min to range.max (or the
/// reverse when backward), switching maps at relabel corners. Throws
/// LostBranch if the mode cannot be continued.
ModeBranch mode_trace(int nu0, double Q, OmegaRange range, int sigma, const ScanOptions& opts = {},
                      bool backward = false);

}  // namespace relay
