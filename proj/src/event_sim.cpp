#include "relay/event_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include <boost/math/tools/toms748_solve.hpp>

#include "relay/error.hpp"

namespace relay {

std::string symbol(EventKind k) {
  switch (k) {
    case EventKind::Z: return "Z";
    case EventKind::Zbar: return "Zb";
    case EventKind::H: return "H";
    case EventKind::Hbar: return "Hb";
  }
  return "?";
}

SystemState constant_history(double x0, double y0) {
  if (x0 == 0.0 || !std::isfinite(x0)) {
    throw Error(ErrorKind::InvalidArgument, "constant history needs a finite nonzero x0");
  }
  SystemState st;
  st.t = 0.0;
  st.v = {x0, y0};
  st.xsign_delayed = x0 > 0.0 ? 1 : -1;
  return st;
}

FlowSign frozen_feedback(const SystemState& st, const Parameters& p) {
  return flow_sign(p.sigma() * st.xsign_delayed);
}

void validate(const SystemState& st, const Parameters& p) {
  if (st.xsign_delayed != 1 && st.xsign_delayed != -1) {
    throw Error(ErrorKind::InvalidState, "xsign_delayed must be +1 or -1");
  }
  if (!std::isfinite(st.t) || !std::isfinite(st.v.x) || !std::isfinite(st.v.y)) {
    throw Error(ErrorKind::InvalidState, "non-finite state");
  }
  for (std::size_t i = 0; i < st.zeros.size(); ++i) {
    const double tau = st.zeros[i];
    if (!(tau > st.t - 1.0 && tau <= st.t)) {
      throw Error(ErrorKind::InvalidState, "stored zero outside the delay window");
    }
    if (i > 0 && !(tau < st.zeros[i - 1])) {
      throw Error(ErrorKind::InvalidState, "stored zeros are not strictly decreasing");
    }
  }
  const int parity = (st.zeros.size() % 2 == 0) ? 1 : -1;
  const int expected = st.xsign_delayed * parity;
  int actual = 0;
  if (st.v.x != 0.0) {
    actual = st.v.x > 0.0 ? 1 : -1;
  } else {
    const double slope = value(frozen_feedback(st, p)) - st.v.y;
    if (slope == 0.0) throw Error(ErrorKind::InvalidState, "headpoint is tangent to the switching manifold");
    actual = slope > 0.0 ? 1 : -1;
  }
  if (actual != expected) {
    throw Error(ErrorKind::InvalidState, "sign of x is inconsistent with the stored crossings");
  }
}

std::optional<double> next_h_delay(const SystemState& st) {
  if (st.zeros.empty()) return std::nullopt;
  return st.zeros.back() + 1.0 - st.t;
}

std::optional<double> next_z_delay(const SystemState& st, FlowSign s, const Rates& r,
                                   const SimOptions& opts) {
  // x(t) = e^{-mu t} h(t) with h = p gcos(t) + q gsinc(t).
  const double p = st.v.x;
  const double q = -r.mu * (st.v.x + 2.0 * (st.v.y - value(s)));
  if (std::abs(p) <= opts.stationary_tolerance && std::abs(q) <= opts.stationary_tolerance * r.mu) {
    return std::nullopt;
  }
  auto h = [&](double t) { return p * gcos(t, r) + q * gsinc(t, r); };

  double hi = 0.0;
  const bool oscillatory = r.regime == Regime::Underdamped && r.omega2 > 0.0;
  if (oscillatory) {
    // Consecutive zeros of h are exactly pi/omega apart.
    const double half = M_PI / r.omega_abs();
    if (p == 0.0) return half;
    hi = half;
  } else {
    if (p == 0.0) return std::nullopt;
    // At most one crossing; it exists iff h changes sign at infinity.
    const double k = r.omega_abs();
    const double tail = k > 0.0 ? p + q / k : q;
    if (tail == 0.0 || (tail > 0.0) == (p > 0.0)) return std::nullopt;
    hi = 1.0 / r.mu;
    int doublings = 0;
    while ((h(hi) > 0.0) == (p > 0.0)) {
      hi *= 2.0;
      if (++doublings > 2000 || !std::isfinite(hi)) {
        throw Error(ErrorKind::NoConvergence, "could not bracket the zero crossing");
      }
    }
  }

  const double h_hi = h(hi);
  if (h_hi == 0.0) return hi;
  std::uintmax_t iters = static_cast<std::uintmax_t>(opts.max_root_iterations);
  const auto bracket = boost::math::tools::toms748_solve(
      h, 0.0, hi, p, h_hi, boost::math::tools::eps_tolerance<double>(52), iters);
  if (iters >= static_cast<std::uintmax_t>(opts.max_root_iterations)) {
    throw Error(ErrorKind::NoConvergence, "zero-crossing refinement exceeded its iteration budget");
  }
  const double z = 0.5 * (bracket.first + bracket.second);
  if (!(z > 0.0)) return std::nullopt;
  return z;
}

StepResult step(const SystemState& st, const Parameters& p, const SimOptions& opts) {
  const Rates r = derive_rates(p);
  const FlowSign s = frozen_feedback(st, p);
  const auto delta = next_h_delay(st);
  const auto z = next_z_delay(st, s, r, opts);
  if (!delta && !z) {
    throw Error(ErrorKind::Nonoscillatory, "no further events: trajectory rests on the flow's fixed point");
  }
  if (delta && z && std::abs(*delta - *z) < opts.tie_tolerance) {
    throw Error(ErrorKind::CornerCollision,
                "H-type and Z-type events coincide at t = " + std::to_string(st.t + *z));
  }

  SystemState next = st;
  Event ev{EventKind::Z, 0.0};
  if (delta && (!z || *delta < *z)) {
    next.v = apply_flow(*delta, st.v, s, r);
    next.t = st.zeros.back() + 1.0;
    next.zeros.pop_back();
    next.xsign_delayed = -st.xsign_delayed;
    ev = {next.xsign_delayed > 0 ? EventKind::H : EventKind::Hbar, next.t};
  } else {
    next.v = apply_flow(*z, st.v, s, r);
    next.v.x = 0.0;
    next.t = st.t + *z;
    next.zeros.insert(next.zeros.begin(), next.t);
    ev = {value(s) - next.v.y > 0.0 ? EventKind::Z : EventKind::Zbar, next.t};
  }
  return {ev, std::move(next)};
}

OrbitRecord simulate(const SystemState& st0, const Parameters& p, const SimBudget& budget,
                     const SimOptions& opts) {
  validate(st0, p);
  const Rates r = derive_rates(p);
  OrbitRecord rec{p, {}, {}, {}, st0, st0, Termination::Budget};
  rec.events.reserve(std::min<std::size_t>(budget.max_events, std::size_t{1} << 20));

  double next_sample = st0.t;
  auto emit_samples = [&](const SystemState& from, double until) {
    if (budget.sample_dt <= 0.0) return;
    const FlowSign s = frozen_feedback(from, p);
    while (next_sample <= until) {
      const Headpoint v = apply_flow(next_sample - from.t, from.v, s, r);
      rec.samples.push_back({next_sample, v.x, v.y});
      next_sample = st0.t + budget.sample_dt * static_cast<double>(rec.samples.size());
    }
  };

  SystemState st = st0;
  while (rec.events.size() < budget.max_events && st.t < budget.max_time &&
         (budget.max_h_events == 0 || rec.h_section.size() < budget.max_h_events)) {
    StepResult res;
    try {
      res = step(st, p, opts);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Nonoscillatory) throw;
      rec.termination = Termination::Nonoscillatory;
      if (std::isfinite(budget.max_time)) emit_samples(st, budget.max_time);
      break;
    }
    emit_samples(st, std::min(res.event.time, budget.max_time));
    if (res.event.kind == EventKind::H) rec.h_section.push_back(res.state.v);
    rec.events.push_back(res.event);
    st = std::move(res.state);
  }
  rec.final_state = st;
  return rec;
}

}  // namespace relay
