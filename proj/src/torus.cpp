#include "relay/torus.hpp"

#include <algorithm>
#include <cmath>

#include "relay/error.hpp"

namespace relay {

SystemState perturbed_fixed_point_seed(const FixedPoint& fp, double eps) {
  StateVector s = fp.state();
  s.yZ *= 1.0 + eps;
  return to_system_state(s, fp.params);
}

TorusSection torus_section(const Parameters& p, const SystemState& seed, const TorusOptions& opts) {
  SimBudget budget;
  budget.max_h_events = opts.h_iterates;
  // a 4-symbol orbit spends four events per H event; leave room for longer cycles
  budget.max_events = 16 * opts.h_iterates + 1000;
  const OrbitRecord rec = simulate(seed, p, budget);

  ClassifyOptions copts = opts.classify;
  copts.transient_fraction = opts.transient_fraction;
  TorusSection out;
  out.Omega = p.Omega();
  out.cls = classify(rec, copts);
  const auto skip = static_cast<std::size_t>(opts.transient_fraction * static_cast<double>(rec.h_section.size()));
  out.points.assign(rec.h_section.begin() + static_cast<std::ptrdiff_t>(skip), rec.h_section.end());
  out.final_state = rec.final_state;
  return out;
}

namespace {

SystemState default_seed(const Parameters& p, const TorusOptions& opts) {
  try {
    const FixedPoint fp = fixed_point(opts.nu, p);
    if (fp.valid.ok()) return perturbed_fixed_point_seed(fp, opts.perturbation);
  } catch (const Error&) {
  }
  return constant_history(1.0);
}

}  // namespace

std::vector<TorusSection> torus_scan(double Q, std::span<const double> Omegas, int sigma, const TorusOptions& opts,
                                     std::optional<SystemState> seed) {
  std::vector<TorusSection> out;
  out.reserve(Omegas.size());
  for (double Om : Omegas) {
    const Parameters p(Q, Om, sigma);
    SystemState start;
    if (!out.empty() && opts.warm_start && out.back().cls.tag != OrbitTag::Nonoscillatory) {
      start = out.back().final_state;
    } else if (seed) {
      start = *seed;
    } else {
      start = default_seed(p, opts);
    }
    out.push_back(torus_section(p, start, opts));
  }
  return out;
}

double section_amplitude(const TorusSection& s) {
  if (s.points.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(s.points.begin(), s.points.end(),
                                            [](const Headpoint& a, const Headpoint& b) { return a.y < b.y; });
  return hi->y - lo->y;
}

namespace {

bool on_torus(const TorusSection& s, double min_amp) {
  return s.cls.tag != OrbitTag::Periodic && s.cls.tag != OrbitTag::Nonoscillatory &&
         section_amplitude(s) > min_amp;
}

}  // namespace

TorusTrack track_torus(double Q0, double Omega0, double Q1, int sigma, const SystemState& seed,
                       const TorusTrackOptions& opts) {
  if (!(Q1 > Q0) || !(opts.dQ_min > 0.0) || opts.dQ_max < opts.dQ_min || opts.width_probes < 1)
    throw Error(ErrorKind::InvalidArgument, "track_torus: need Q1 > Q0 and 0 < dQ_min <= dQ_max");
  const auto& so = opts.section;
  TorusTrack out;
  double Q = Q0, Om = Omega0;
  double slope = 0.0, dQ = opts.dQ_max, width = 0.0;
  double floor_amp = opts.min_amplitude;
  {
    const auto s = torus_section(Parameters(Q, Om, sigma), seed, so);
    out.state = s.final_state;
    if (!on_torus(s, floor_amp)) return out;
    out.points.push_back({Q, Om, Om, Om, section_amplitude(s)});
    floor_amp = std::max(opts.min_amplitude, 0.5 * out.points.back().amplitude);
  }
  while (Q < Q1) {
    const double q = std::min(Q + dQ, Q1);
    const double w = Om + slope * (q - Q);
    const auto s = torus_section(Parameters(q, w, sigma), out.state, so);
    if (!on_torus(s, floor_amp)) {
      dQ *= 0.5;
      if (dQ < opts.dQ_min) return out;
      continue;
    }
    // walk outwards to both edges of the window, keeping every state seen
    struct Probe {
      double Omega;
      SystemState state;
      double amplitude;
    };
    const double dO = std::max(width / opts.width_probes, 2e-6);
    std::vector<Probe> seen{{w, s.final_state, section_amplitude(s)}};
    for (const double dir : {1.0, -1.0}) {
      double at = w;
      SystemState from = s.final_state;
      for (int i = 0; i < 8 * opts.width_probes; ++i) {
        const auto t = torus_section(Parameters(q, at + dir * dO, sigma), from, so);
        if (!on_torus(t, floor_amp)) break;
        at += dir * dO;
        from = t.final_state;
        seen.push_back({at, from, section_amplitude(t)});
      }
    }
    const auto [lo_it, hi_it] =
        std::minmax_element(seen.begin(), seen.end(), [](const Probe& x, const Probe& y) { return x.Omega < y.Omega; });
    const double lo = lo_it->Omega, hi = hi_it->Omega;
    width = hi - lo + dO;
    const double mid = 0.5 * (lo + hi);
    // jumping straight to the middle can throw the orbit off a narrow torus
    const Probe& best = *std::min_element(seen.begin(), seen.end(), [mid](const Probe& x, const Probe& y) {
      return std::abs(x.Omega - mid) < std::abs(y.Omega - mid);
    });
    const double c = best.Omega;
    slope = (c - Om) / (q - Q);
    Q = q;
    Om = c;
    out.state = best.state;
    out.points.push_back({Q, Om, lo, hi, best.amplitude});
    // a collapsing orbit still has a wide section early on
    floor_amp = std::max(opts.min_amplitude, 0.5 * out.points.back().amplitude);
    dQ = std::clamp(0.3 * width / std::max(std::abs(slope), 0.1), opts.dQ_min, opts.dQ_max);
  }
  out.reached = true;
  return out;
}

std::string_view to_string(Criticality c) {
  switch (c) {
    case Criticality::Supercritical: return "supercritical";
    case Criticality::Subcritical: return "subcritical";
    case Criticality::Undetermined: break;
  }
  return "undetermined";
}

Criticality ns_criticality(const BifurcationPoint& ns, const CriticalityOptions& opts) {
  if (ns.kind != BifKind::NS) throw Error(ErrorKind::InvalidArgument, "criticality needs an NS point");
  if (!(opts.rel_offset > 0.0)) throw Error(ErrorKind::InvalidArgument, "rel_offset must be positive");
  const double d = opts.rel_offset * ns.Omega;
  const FixedPoint lo = fixed_point_near(ns.nu, Parameters(ns.Q, ns.Omega - d, ns.sigma), ns.Tstar);
  const FixedPoint hi = fixed_point_near(ns.nu, Parameters(ns.Q, ns.Omega + d, ns.sigma), ns.Tstar);
  const int ulo = spectrum_of(lo).unstable_count, uhi = spectrum_of(hi).unstable_count;
  if (ulo == uhi) return Criticality::Undetermined;
  const FixedPoint& fp = uhi > ulo ? hi : lo;
  if (!fp.valid.ok()) return Criticality::Undetermined;
  const TorusSection s = torus_section(fp.params, perturbed_fixed_point_seed(fp, opts.perturbation), opts.section);
  switch (s.cls.tag) {
    case OrbitTag::Quasiperiodic: return Criticality::Supercritical;
    case OrbitTag::Periodic:
    case OrbitTag::Nonoscillatory: return Criticality::Subcritical;
    case OrbitTag::Undecided: break;
  }
  return Criticality::Undetermined;
}

}  // namespace relay
