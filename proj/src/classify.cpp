#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>

#include "relay/event_sim.hpp"

namespace relay {

std::string SymbolLabel::str() const {
  std::string out = "[";
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (i > 0) out += ",";
    out += symbol(sequence[i]);
  }
  out += "]_" + std::to_string(nu) + "^" + (symmetry == Symmetry::Symmetric ? "S" : "A");
  return out;
}

std::string_view to_string(OrbitTag tag) {
  switch (tag) {
    case OrbitTag::Periodic: return "Periodic";
    case OrbitTag::Quasiperiodic: return "Quasiperiodic";
    case OrbitTag::Nonoscillatory: return "Nonoscillatory";
    case OrbitTag::Undecided: return "Undecided";
  }
  return "Undecided";
}

namespace {

double diameter(std::span<const Headpoint> pts) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& p : pts) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  return std::hypot(xmax - xmin, ymax - ymin);
}

// Whether the last m blocks of n events repeat kinds and gaps within rtol of
// the block length.
bool repeats(const std::vector<Event>& ev, std::size_t n, std::size_t m, double rtol) {
  const std::size_t total = ev.size();
  if (m * n + 1 > total) return false;
  const std::size_t first = total - m * n;
  double period = 0.0;
  for (std::size_t i = total - n; i < total; ++i) period += ev[i].time - ev[i - 1].time;
  if (!(period > 0.0)) return false;
  const double tol = rtol * period;
  for (std::size_t i = first + n; i < total; ++i) {
    const double cur = ev[i].time - ev[i - 1].time;
    const double prev = ev[i - n].time - ev[i - n - 1].time;
    if (ev[i].kind != ev[i - n].kind || std::abs(cur - prev) > tol) return false;
  }
  return true;
}

// Smallest event count n such that the last periods_to_match periods repeat.
// A match whose divisor nearly matches too is a slowly settling orbit, not a
// multiple-length cycle, so it is left undecided.
std::optional<std::size_t> find_period(const std::vector<Event>& ev, const ClassifyOptions& opts) {
  const auto m = static_cast<std::size_t>(std::max(opts.periods_to_match, 2));
  for (std::size_t n = 1; n <= opts.max_period_events; ++n) {
    if (m * n + 1 > ev.size()) break;
    if (!repeats(ev, n, m, opts.period_rtol)) continue;
    for (std::size_t d = 1; d < n; ++d) {
      if (n % d == 0 && repeats(ev, d, m, 1e3 * opts.period_rtol)) return std::nullopt;
    }
    return n;
  }
  return std::nullopt;
}

}  // namespace

namespace {

using Grid = std::vector<std::uint8_t>;

Grid occupancy(const std::vector<Headpoint>& pts, double xmin, double sx, double ymin, double sy, int n) {
  Grid g(static_cast<std::size_t>(n * n), 0);
  for (const auto& p : pts) {
    const int i = std::min(n - 1, static_cast<int>((p.x - xmin) / sx * n));
    const int j = std::min(n - 1, static_cast<int>((p.y - ymin) / sy * n));
    g[static_cast<std::size_t>(i * n + j)] = 1;
  }
  return g;
}

// Connected components of cells equal to `value`; diagonal steps allowed
// when `diagonal` is set.
int components(const Grid& g, int n, std::uint8_t value, bool diagonal) {
  std::vector<std::uint8_t> seen(g.size(), 0);
  std::vector<int> stack;
  int count = 0;
  for (int start = 0; start < n * n; ++start) {
    if (g[static_cast<std::size_t>(start)] != value || seen[static_cast<std::size_t>(start)]) continue;
    ++count;
    stack.push_back(start);
    seen[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      const int ci = c / n, cj = c % n;
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if ((di == 0 && dj == 0) || (!diagonal && di != 0 && dj != 0)) continue;
          const int i = ci + di, j = cj + dj;
          if (i < 0 || j < 0 || i >= n || j >= n) continue;
          const auto k = static_cast<std::size_t>(i * n + j);
          if (g[k] != value || seen[k]) continue;
          seen[k] = 1;
          stack.push_back(i * n + j);
        }
      }
    }
  }
  return count;
}

}  // namespace

bool looks_like_closed_curve(const std::vector<Headpoint>& pts, const ClassifyOptions& opts) {
  if (pts.size() < opts.min_section_points) return false;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& p : pts) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double sx = xmax - xmin, sy = ymax - ymin;
  if (!(sx > 0.0) || !(sy > 0.0)) return false;

  // A curve fills boxes in proportion to their count per axis.
  const int nc = opts.coarse_boxes, nf = opts.fine_boxes;
  const Grid coarse = occupancy(pts, xmin, sx, ymin, sy, nc);
  const Grid fine = occupancy(pts, xmin, sx, ymin, sy, nf);
  const auto filled = [](const Grid& g) { return static_cast<double>(std::count(g.begin(), g.end(), 1)); };
  const double dim = std::log(filled(fine) / filled(coarse)) / std::log(static_cast<double>(nf) / nc);
  if (std::abs(dim - 1.0) > opts.dimension_tol) return false;

  // One connected piece that encloses at least one empty region. Pad with an
  // empty border so everything outside the curve is a single component.
  if (components(fine, nf, 1, true) != 1) return false;
  const int np = nf + 2;
  Grid padded(static_cast<std::size_t>(np * np), 0);
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nf; ++j) {
      padded[static_cast<std::size_t>((i + 1) * np + j + 1)] = fine[static_cast<std::size_t>(i * nf + j)];
    }
  }
  return components(padded, np, 0, false) >= 2;
}

OrbitClass classify(const OrbitRecord& rec, const ClassifyOptions& opts) {
  OrbitClass out;
  if (rec.termination == Termination::Nonoscillatory) {
    out.tag = OrbitTag::Nonoscillatory;
    return out;
  }
  const auto& ev = rec.events;
  if (ev.size() < opts.min_events) return out;

  if (const auto n = find_period(ev, opts)) {
    const std::size_t total = ev.size();
    const std::size_t start = total - *n;
    std::vector<Event> cycle(ev.begin() + static_cast<std::ptrdiff_t>(start), ev.end());
    std::vector<double> gaps(*n);
    for (std::size_t i = 0; i < *n; ++i) gaps[i] = ev[start + i].time - ev[start + i - 1].time;

    const auto h = std::find_if(cycle.begin(), cycle.end(), [](const Event& e) { return e.kind == EventKind::H; });
    const auto shift = h == cycle.end() ? 0 : std::distance(cycle.begin(), h);
    std::rotate(cycle.begin(), cycle.begin() + shift, cycle.end());
    std::rotate(gaps.begin(), gaps.begin() + shift, gaps.end());

    SymbolLabel label;
    for (const auto& e : cycle) label.sequence.push_back(e.kind);

    // Crossings strictly inside the unit window preceding a zero crossing.
    const auto zpos = std::find_if(cycle.begin(), cycle.end(), [](const Event& e) { return is_zero_event(e.kind); });
    if (zpos != cycle.end()) {
      const double tz = zpos->time;
      label.nu = static_cast<int>(std::count_if(ev.begin(), ev.end(), [&](const Event& e) {
        return is_zero_event(e.kind) && e.time > tz - 1.0 && e.time < tz;
      }));
    }

    const double period = std::accumulate(gaps.begin(), gaps.end(), 0.0);
    bool symmetric = *n % 2 == 0;
    const std::size_t half = *n / 2;
    for (std::size_t i = 0; symmetric && i < half; ++i) {
      symmetric = cycle[i + half].kind == bar(cycle[i].kind) &&
                  std::abs(gaps[i + half] - gaps[i]) <= opts.period_rtol * period;
    }
    label.symmetry = symmetric ? Symmetry::Symmetric : Symmetry::Asymmetric;

    out.tag = OrbitTag::Periodic;
    out.label = std::move(label);
    out.period = period;
    return out;
  }

  const auto skip = static_cast<std::size_t>(opts.transient_fraction * static_cast<double>(rec.h_section.size()));
  const std::span<const Headpoint> tail(rec.h_section.data() + skip, rec.h_section.size() - skip);
  if (tail.size() < opts.min_section_points) return out;
  const std::size_t mid = tail.size() / 2;
  const double d1 = diameter(tail.first(mid));
  const double d2 = diameter(tail.subspan(mid));
  if (!(d2 > 1e-7) || std::abs(d1 - d2) > opts.diameter_rtol * d2) return out;
  const std::vector<Headpoint> last(tail.begin() + static_cast<std::ptrdiff_t>(mid), tail.end());
  if (looks_like_closed_curve(last, opts)) out.tag = OrbitTag::Quasiperiodic;
  return out;
}

}  // namespace relay
