#include "relay/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/math/tools/toms748_solve.hpp>

#include "relay/error.hpp"
#include "relay/flow.hpp"
#include "relay/parallel.hpp"

namespace relay {

NSCoefficients ns_coeffs(const FixedPoint& fp) {
  const Rates r = derive_rates(fp.params);
  const double T = fp.Tstar;
  const double ec = damped_cos(T, r);
  const double es = damped_sinc(T, r);
  const double e2 = std::exp(-2.0 * r.mu * T);
  return {2.0 * ec + e2, -(ec - r.mu * es) - e2, (ec - r.mu * es) - e2};
}

std::pair<double, double> ns_residuals(const NSCoefficients& f, int nu, double phi) {
  const double half = 0.5 * phi;
  const double s = std::sin(half);
  // sin((nu+1)x)/sin(x) -> nu+1 as x -> 0
  const double ratio = std::abs(s) < 1e-300 ? nu + 1.0 : std::sin((nu + 1) * half) / s;
  const double re = (f.f1 + std::cos(phi)) * ratio + f.f2 * std::cos(nu * half);
  const double im = 2.0 * std::cos(half) * std::sin((nu + 1) * half) + f.f3 * std::sin(nu * half);
  return {re, im};
}

std::string_view to_string(BifKind kind) {
  switch (kind) {
    case BifKind::NS: return "NS";
    case BifKind::PF: return "PF";
    case BifKind::Corner1: return "Corner1";
    case BifKind::Corner2: return "Corner2";
  }
  return "?";
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need at least one sample");
  if (n == 1) return {lo};
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i == n - 1 ? hi : lo + (hi - lo) * i / (n - 1);
  return v;
}

namespace {

void check_range(OmegaRange range) {
  if (!(range.min > 0.0) || !(range.max >= range.min)) {
    throw Error(ErrorKind::InvalidArgument, "Omega range must satisfy 0 < min <= max");
  }
}

struct Probe {
  FixedPoint fp;
  Spectrum spectrum;
};

// Valid fixed point of map nu near T_guess (or the smallest valid one).
std::optional<Probe> probe(int nu, const Parameters& p, std::optional<double> T_guess, const RootScanOptions& opts) {
  try {
    FixedPoint fp = T_guess ? fixed_point_near(nu, p, *T_guess, opts) : fixed_point(nu, p, opts);
    if (!fp.valid.ok()) return std::nullopt;
    Spectrum sp = spectrum_of(fp);
    return Probe{std::move(fp), std::move(sp)};
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Largest step in T* still treated as the same branch.
double branch_jump(int nu, double T) {
  if (nu == 0) return 0.2 * T;
  return 0.2 / (static_cast<double>(nu) * (nu + 1));
}

std::optional<Probe> probe_continuing(int nu, const Parameters& p, double T_prev, const RootScanOptions& opts) {
  auto pr = probe(nu, p, T_prev, opts);
  if (pr && std::abs(pr->fp.Tstar - T_prev) > branch_jump(nu, T_prev)) return std::nullopt;
  return pr;
}

bool ulp_close(double a, double b) {
  return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
}

// Bisect a change of unstable_count between two valid samples of the branch.
std::optional<BifurcationPoint> bisect_count_change(int nu, double Q, int sigma, const BranchSample& a,
                                                    const BranchSample& b, const RootScanOptions& opts) {
  double lo = a.Omega, hi = b.Omega;
  double T_lo = a.fp->Tstar;
  const int count_lo = a.spectrum.unstable_count;
  Probe hi_probe{*b.fp, b.spectrum};
  Probe lo_probe{*a.fp, a.spectrum};
  for (int it = 0; it < 200 && !ulp_close(lo, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    auto pr = probe_continuing(nu, Parameters(Q, mid, sigma), T_lo, opts);
    if (!pr) return std::nullopt;
    if (pr->spectrum.unstable_count == count_lo) {
      lo = mid;
      T_lo = pr->fp.Tstar;
      lo_probe = *pr;
    } else {
      hi = mid;
      hi_probe = *pr;
    }
  }
  // The crossing root is the one nearest the unit circle on either side.
  std::complex<double> best = 0.0;
  double best_gap = std::numeric_limits<double>::infinity();
  const Probe* at = &lo_probe;
  for (const Probe* pr : {&lo_probe, &hi_probe}) {
    for (auto l : pr->spectrum.roots) {
      const double gap = std::abs(std::abs(l) - 1.0);
      if (gap < best_gap) {
        best_gap = gap;
        best = l;
        at = pr;
      }
    }
  }
  BifurcationPoint pt;
  pt.Q = Q;
  pt.Omega = at->fp.params.Omega();
  pt.nu = nu;
  pt.sigma = sigma;
  pt.Tstar = at->fp.Tstar;
  pt.residual = std::abs(best) - 1.0;
  if (std::abs(best.imag()) > 1e-6) {
    pt.kind = BifKind::NS;
    pt.phi = std::abs(std::arg(best));
  } else if (best.real() < 0.0) {
    pt.kind = BifKind::PF;
  } else {
    return std::nullopt;
  }
  return pt;
}

}  // namespace

std::vector<BranchSample> follow_branch(int nu, double Q, int sigma, OmegaRange range, const ScanOptions& opts) {
  check_range(range);
  std::vector<BranchSample> out;
  std::optional<double> T_prev;
  for (double Om : linspace(range.min, range.max, opts.samples)) {
    BranchSample s;
    s.Omega = Om;
    auto pr = probe(nu, Parameters(Q, Om, sigma), T_prev, opts.roots);
    if (pr) {
      T_prev = pr->fp.Tstar;
      s.fp = std::move(pr->fp);
      s.spectrum = std::move(pr->spectrum);
    } else {
      T_prev.reset();
    }
    out.push_back(std::move(s));
  }
  return out;
}

double pitchfork_function(const FixedPoint& fp) {
  const JacobianCoeffs jc = jacobian_coeffs(fp);
  return 1.0 + jc.d + std::exp(-2.0 * derive_rates(fp.params).mu * fp.Tstar);
}

double pitchfork_function_even(const FixedPoint& fp) { return -jacobian_coeffs(fp).a - 1.0; }

std::vector<BifurcationPoint> pitchfork_candidates(int nu, double Q, int sigma, OmegaRange range,
                                                   const ScanOptions& opts) {
  const auto branch = follow_branch(nu, Q, sigma, range, opts);
  auto pf = [nu](const FixedPoint& fp) { return nu % 2 == 1 ? pitchfork_function(fp) : pitchfork_function_even(fp); };
  std::vector<BifurcationPoint> out;
  for (std::size_t i = 1; i < branch.size(); ++i) {
    const auto& a = branch[i - 1];
    const auto& b = branch[i];
    if (!a.fp || !b.fp) continue;
    const double fa = pf(*a.fp), fb = pf(*b.fp);
    if (fa == 0.0 || (fa > 0.0) == (fb > 0.0)) continue;
    const double T_a = a.fp->Tstar;
    auto g = [&](double Om) {
      auto pr = probe_continuing(nu, Parameters(Q, Om, sigma), T_a, opts.roots);
      if (!pr) throw Error(ErrorKind::LostBranch, "branch lost while refining");
      return pf(pr->fp);
    };
    try {
      std::uintmax_t iters = 200;
      const auto br = boost::math::tools::toms748_solve(g, a.Omega, b.Omega, fa, fb,
                                                        boost::math::tools::eps_tolerance<double>(52), iters);
      const double Om = std::abs(g(br.first)) <= std::abs(g(br.second)) ? br.first : br.second;
      auto pr = probe_continuing(nu, Parameters(Q, Om, sigma), T_a, opts.roots);
      if (!pr) continue;
      BifurcationPoint pt;
      pt.kind = BifKind::PF;
      pt.Q = Q;
      pt.Omega = Om;
      pt.nu = nu;
      pt.sigma = sigma;
      pt.Tstar = pr->fp.Tstar;
      pt.residual = pf(pr->fp);
      out.push_back(pt);
    } catch (const Error&) {
    }
  }
  return out;
}

std::vector<BifurcationPoint> pitchfork_locus(int nu, double Q, OmegaRange range, const ScanOptions& opts) {
  if (nu < 1 || nu % 2 == 0) throw Error(ErrorKind::InvalidArgument, "pitchfork points need odd nu");
  std::vector<BifurcationPoint> out;
  for (auto& pt : pitchfork_candidates(nu, Q, -1, range, opts)) {
    const Rates r = derive_rates(Parameters(Q, pt.Omega, -1));
    const bool past_half_turn = r.omega2 > 0.0 && r.omega_abs() * pt.Tstar > M_PI;
    if (std::abs(pt.residual) <= 1e-9 && past_half_turn) out.push_back(pt);
  }
  return out;
}

std::vector<BifurcationPoint> ns_locus(int nu, double Q, OmegaRange range, int sigma, const ScanOptions& opts) {
  if (nu < 1) throw Error(ErrorKind::InvalidArgument, "NS points need nu >= 1");
  const auto branch = follow_branch(nu, Q, sigma, range, opts);
  std::vector<BifurcationPoint> out;
  for (std::size_t i = 1; i < branch.size(); ++i) {
    const auto& a = branch[i - 1];
    const auto& b = branch[i];
    if (!a.fp || !b.fp || a.spectrum.unstable_count == b.spectrum.unstable_count) continue;
    auto pt = bisect_count_change(nu, Q, sigma, a, b, opts.roots);
    if (pt && pt->kind == BifKind::NS) out.push_back(*pt);
  }
  return out;
}

double omega_from_Omega(double Omega, double Q) {
  return Omega * std::sqrt(std::abs(4.0 * Q * Q - 1.0)) / (2.0 * Q);
}

double Omega_from_omega(double omega, double Q) {
  if (!(Q > 0.5)) throw Error(ErrorKind::InvalidArgument, "omega is real only for Q > 1/2");
  return 2.0 * Q * omega / std::sqrt(4.0 * Q * Q - 1.0);
}

std::optional<double> corner_omega(int nu, double Q, CornerType type) {
  if (nu < 0) throw Error(ErrorKind::InvalidArgument, "nu must be non-negative");
  if (!(Q > 0.5)) return std::nullopt;
  const int K = type == CornerType::Relabel ? nu + 1 : 2 * nu + 1;
  return Omega_from_omega(K * M_PI, Q);
}

std::pair<CornerCurve, CornerCurve> corner_lines(int nu, std::span<const double> Qs) {
  CornerCurve c1{nu, CornerType::Relabel, {}}, c2{nu, CornerType::Terminal, {}};
  for (double Q : Qs) {
    if (auto om = corner_omega(nu, Q, CornerType::Relabel)) c1.points.emplace_back(Q, *om);
    if (auto om = corner_omega(nu, Q, CornerType::Terminal)) c2.points.emplace_back(Q, *om);
  }
  return {c1, c2};
}

bool corner_on_branch(int nu, double Q, int sigma, CornerType type, const RootScanOptions& opts) {
  const auto om = corner_omega(nu, Q, type);
  if (!om) return false;
  const double T_corner = type == CornerType::Relabel ? 1.0 / (nu + 1) : 2.0 / (2 * nu + 1);
  const auto pr = probe(nu, Parameters(Q, *om * (1.0 - 1e-6), sigma), T_corner, opts);
  return pr && std::abs(pr->fp.Tstar - T_corner) < 1e-4;
}

std::optional<int> mode_partner(int nu, double Q, int sigma) {
  if (corner_on_branch(nu, Q, sigma, CornerType::Relabel)) return nu + 1;
  if (nu >= 1 && corner_on_branch(nu - 1, Q, sigma, CornerType::Relabel)) return nu - 1;
  return std::nullopt;
}

std::pair<double, double> passband(double Q) {
  if (!(Q > 0.0)) throw Error(ErrorKind::InvalidArgument, "Q must be positive");
  const double h = 1.0 / (2.0 * Q);
  const double root = std::sqrt(1.0 + h * h);
  return {root - h, root + h};
}

RegionGrid region_scan(std::span<const int> nus, std::span<const double> Qs, std::span<const double> Omegas,
                       int sigma, int threads, const RootScanOptions& opts) {
  RegionGrid g;
  g.nus.assign(nus.begin(), nus.end());
  g.Qs.assign(Qs.begin(), Qs.end());
  g.Omegas.assign(Omegas.begin(), Omegas.end());
  g.sigma = sigma;
  if (g.nus.empty()) return g;
  g.cells.resize(g.Qs.size() * g.Omegas.size() * g.nus.size());
  const std::size_t rows = g.Qs.size() * g.Omegas.size();
  parallel_for(rows, threads, [&](std::size_t cell) {
    const double Q = g.Qs[cell / g.Omegas.size()];
    const double Om = g.Omegas[cell % g.Omegas.size()];
    for (std::size_t k = 0; k < g.nus.size(); ++k) {
      RegionCell& c = g.cells[cell * g.nus.size() + k];
      const auto pr = probe(g.nus[k], Parameters(Q, Om, sigma), std::nullopt, opts);
      if (!pr) continue;
      c.exists = true;
      c.unstable_count = pr->spectrum.unstable_count;
      c.stable = c.unstable_count == 0;
      c.Tstar = pr->fp.Tstar;
      c.xH = x_H(pr->fp);
    }
  });
  return g;
}

PeriodDiagram period_diagram(std::span<const int> nus, double Q, OmegaRange range, int sigma,
                             const ScanOptions& opts, int threads) {
  check_range(range);
  PeriodDiagram pd;
  pd.Q = Q;
  pd.sigma = sigma;
  pd.passband = passband(Q);
  std::vector<std::vector<PeriodRow>> rows(nus.size());
  std::vector<std::vector<PeriodMarker>> marks(nus.size());
  parallel_for(nus.size(), threads, [&](std::size_t k) {
    const int nu = nus[k];
    const auto branch = follow_branch(nu, Q, sigma, range, opts);
    for (const auto& s : branch) {
      if (!s.fp) continue;
      rows[k].push_back({nu, s.Omega, s.fp->Tstar, 1.0 / s.fp->period(), x_H(*s.fp), s.spectrum.unstable_count});
    }
    auto add = [&](const BifurcationPoint& pt) {
      const FixedPoint fp = make_fixed_point(nu, Parameters(Q, pt.Omega, sigma), pt.Tstar);
      marks[k].push_back({pt.kind, nu, pt.Omega, 1.0 / fp.period(), x_H(fp)});
    };
    if (nu >= 1) {
      for (const auto& pt : ns_locus(nu, Q, range, sigma, opts)) add(pt);
    }
    for (const auto& pt : pitchfork_candidates(nu, Q, sigma, range, opts)) add(pt);
    for (auto type : {CornerType::Relabel, CornerType::Terminal}) {
      const auto om = corner_omega(nu, Q, type);
      if (!om || *om < range.min || *om > range.max) continue;
      if (!corner_on_branch(nu, Q, sigma, type, opts.roots)) continue;
      const double invP = type == CornerType::Relabel ? (nu + 1) / 2.0 : (2 * nu + 1) / 4.0;
      marks[k].push_back({type == CornerType::Relabel ? BifKind::Corner1 : BifKind::Corner2, nu, *om, invP, 0.0});
    }
    std::sort(marks[k].begin(), marks[k].end(), [](const auto& x, const auto& y) { return x.Omega < y.Omega; });
  });
  for (std::size_t k = 0; k < nus.size(); ++k) {
    pd.rows.insert(pd.rows.end(), rows[k].begin(), rows[k].end());
    pd.markers.insert(pd.markers.end(), marks[k].begin(), marks[k].end());
  }
  return pd;
}

ModeBranch mode_trace(int nu0, double Q, OmegaRange range, int sigma, const ScanOptions& opts, bool backward) {
  check_range(range);
  auto grid = linspace(range.min, range.max, opts.samples);
  if (backward) std::reverse(grid.begin(), grid.end());

  ModeBranch out;
  int nu = nu0;
  auto start = probe(nu, Parameters(Q, grid.front(), sigma), std::nullopt, opts.roots);
  if (!start) {
    throw Error(ErrorKind::InvalidArgument,
                "no valid fixed point for nu = " + std::to_string(nu) + " at the start of the range");
  }
  auto push = [&](const Probe& pr) {
    out.samples.push_back({pr.fp.params.Omega(), pr.fp.nu, pr.fp, x_H(pr.fp), 1.0 / pr.fp.period(), pr.spectrum});
  };
  push(*start);

  auto between = [&](double c, double prev, double cur) {
    return backward ? (c >= cur && c < prev) : (c > prev && c <= cur);
  };

  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double prev_Om = grid[i - 1];
    const double Om = grid[i];
    const Parameters p(Q, Om, sigma);
    const double T_prev = out.samples.back().fp.Tstar;

    if (auto pr = probe_continuing(nu, p, T_prev, opts.roots)) {
      push(*pr);
      continue;
    }
    const int next_nu = backward ? nu - 1 : nu + 1;
    const int lower_nu = backward ? nu - 1 : nu;
    if (next_nu >= 0) {
      const auto c = corner_omega(lower_nu, Q, CornerType::Relabel);
      if (c && between(*c, prev_Om, Om)) {
        if (auto pr = probe_continuing(next_nu, p, T_prev, opts.roots)) {
          BifurcationPoint pt;
          pt.kind = BifKind::Corner1;
          pt.Q = Q;
          pt.Omega = *c;
          pt.nu = lower_nu;
          pt.sigma = sigma;
          pt.Tstar = 1.0 / (lower_nu + 1);
          out.relabels.push_back(pt);
          nu = next_nu;
          push(*pr);
          continue;
        }
      }
    }
    if (!backward) {
      const auto c = corner_omega(nu, Q, CornerType::Terminal);
      if (c && between(*c, prev_Om, Om)) {
        BifurcationPoint pt;
        pt.kind = BifKind::Corner2;
        pt.Q = Q;
        pt.Omega = *c;
        pt.nu = nu;
        pt.sigma = sigma;
        pt.Tstar = 2.0 / (2 * nu + 1);
        out.termination = pt;
        return out;
      }
    }
    throw Error(ErrorKind::LostBranch, "mode lost between Omega = " + std::to_string(prev_Om) + " and " +
                                           std::to_string(Om) + "; last good nu = " + std::to_string(nu) +
                                           ", T* = " + std::to_string(T_prev));
  }
  return out;
}

}  // namespace relay
