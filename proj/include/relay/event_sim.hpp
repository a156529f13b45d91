#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "relay/flow.hpp"
#include "relay/params.hpp"

namespace relay {

enum class EventKind { Z, Zbar, H, Hbar };

constexpr bool is_zero_event(EventKind k) noexcept { return k == EventKind::Z || k == EventKind::Zbar; }
constexpr bool is_history_event(EventKind k) noexcept { return !is_zero_event(k); }
constexpr EventKind bar(EventKind k) noexcept {
  switch (k) {
    case EventKind::Z: return EventKind::Zbar;
    case EventKind::Zbar: return EventKind::Z;
    case EventKind::H: return EventKind::Hbar;
    case EventKind::Hbar: return EventKind::H;
  }
  return k;
}
std::string symbol(EventKind k);

struct Event {
  EventKind kind;
  double time;
};

/// Headpoint plus the zero crossings of x inside the delay window.
struct SystemState {
  double t = 0.0;
  Headpoint v;
  /// Crossing times tau_1 > tau_2 > ... > tau_k, all in (t-1, t].
  std::vector<double> zeros;
  /// Sign of x(t-1) on the current segment.
  int xsign_delayed = 1;
};

/// History x = x0 on [-1, 0] with y(0) = y0. No crossings in the window.
SystemState constant_history(double x0, double y0 = 0.0);

/// Feedback sigma * sign(x(t-1)) in force on the current segment.
FlowSign frozen_feedback(const SystemState& st, const Parameters& p);

/// Throws InvalidState if the zero list or the sign bookkeeping is inconsistent.
void validate(const SystemState& st, const Parameters& p);

struct SimOptions {
  /// Event times closer than this are reported as a corner collision.
  double tie_tolerance = 1e-10;
  int max_root_iterations = 200;
  /// |x| and |y - s| below this at a zero-free state count as resting on the
  /// flow's fixed point.
  double stationary_tolerance = 1e-14;
};

/// Time until the oldest stored crossing leaves the delay window.
std::optional<double> next_h_delay(const SystemState& st);

/// Smallest z > 0 at which x of the frozen flow vanishes, if any.
std::optional<double> next_z_delay(const SystemState& st, FlowSign s, const Rates& r,
                                   const SimOptions& opts = {});

struct StepResult {
  Event event;
  SystemState state;
};

StepResult step(const SystemState& st, const Parameters& p, const SimOptions& opts = {});

struct SimBudget {
  std::size_t max_events = 2000;
  double max_time = std::numeric_limits<double>::infinity();
  /// Dense output spacing; zero disables sampling.
  double sample_dt = 0.0;
  /// Stop after this many section points; zero means no limit.
  std::size_t max_h_events = 0;
};

enum class Termination { Budget, Nonoscillatory };

struct Sample {
  double t;
  double x;
  double y;
};

struct OrbitRecord {
  Parameters params;
  std::vector<Event> events;
  std::vector<Sample> samples;
  /// Headpoints at H events (x(t-1) turning positive).
  std::vector<Headpoint> h_section;
  SystemState initial_state;
  SystemState final_state;
  Termination termination = Termination::Budget;
};

OrbitRecord simulate(const SystemState& st0, const Parameters& p, const SimBudget& budget,
                     const SimOptions& opts = {});

enum class Symmetry { Symmetric, Asymmetric };

struct SymbolLabel {
  std::vector<EventKind> sequence;
  int nu = 0;
  Symmetry symmetry = Symmetry::Asymmetric;

  /// e.g. "[H,Z,Hb,Zb]_3^S"
  std::string str() const;
};

enum class OrbitTag { Periodic, Quasiperiodic, Nonoscillatory, Undecided };
std::string_view to_string(OrbitTag tag);

struct OrbitClass {
  OrbitTag tag = OrbitTag::Undecided;
  std::optional<SymbolLabel> label;
  std::optional<double> period;
};

struct ClassifyOptions {
  std::size_t min_events = 200;
  double period_rtol = 1e-8;
  int periods_to_match = 3;
  std::size_t max_period_events = 64;
  /// Leading fraction of the section treated as transient.
  double transient_fraction = 0.2;
  /// Relative change allowed between section diameters of the two halves of
  /// the post-transient run.
  double diameter_rtol = 0.05;
  /// Box grids (cells per axis, after scaling both axes to unit range) for
  /// the closed-curve test.
  int coarse_boxes = 16;
  int fine_boxes = 64;
  /// Allowed deviation of the box-counting dimension from 1.
  double dimension_tol = 0.3;
  std::size_t min_section_points = 200;
};

OrbitClass classify(const OrbitRecord& rec, const ClassifyOptions& opts = {});

/// Closed-curve test on a set of section points, as used by classify.
bool looks_like_closed_curve(const std::vector<Headpoint>& pts, const ClassifyOptions& opts = {});

}  // namespace relay
