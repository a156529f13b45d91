#include "relay/sym4_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/tools/toms748_solve.hpp>

#include "relay/error.hpp"
#include "relay/flow.hpp"

namespace relay {

double delta_of(const StateVector& s) {
  if (s.T.empty()) return 1.0;
  const double delta = 1.0 - std::accumulate(s.T.begin(), s.T.end(), 0.0);
  if (delta < 0.0) throw Error(ErrorKind::InvalidState, "stored intervals exceed the delay");
  return delta;
}

double z_of(const StateVector& s, const Rates& r) {
  const double delta = delta_of(s);
  const double lift = s.yZ + 1.0;
  if (lift == 0.0) {
    throw Error(ErrorKind::NoCrossing, "headpoint at yZ = -1 gives a zero-length crossing interval");
  }
  // x after the H event is proportional to -num; the next zero solves
  // gsinc(z)/gcos(z) = num/den.
  const double num = lift * damped_sinc(delta, r);
  const double den = 2.0 - lift * damped_cos(delta, r);
  if (r.regime == Regime::Underdamped && r.omega2 > 0.0) {
    const double w = r.omega_abs();
    double phase = std::atan2(w * num, den);
    if (phase <= 0.0) phase += M_PI;
    return phase / w;
  }
  if (den == 0.0) throw Error(ErrorKind::NoCrossing, "no crossing: flow approaches the node tangentially");
  const double ratio = num / den;
  if (r.regime == Regime::Overdamped && r.omega2 < 0.0) {
    const double k = r.omega_abs();
    const double th = k * ratio;
    if (!(th > 0.0 && th < 1.0)) throw Error(ErrorKind::NoCrossing, "overdamped flow does not reach x = 0");
    return std::atanh(th) / k;
  }
  if (!(ratio > 0.0)) throw Error(ErrorKind::NoCrossing, "critically damped flow does not reach x = 0");
  return ratio;
}

StateVector reflect(StateVector s) {
  s.yZ = -s.yZ;
  return s;
}

StateVector map_M(const StateVector& s, const Parameters& p) {
  const Rates r = derive_rates(p);
  const double delta = delta_of(s);
  const double z = z_of(s, r);
  StateVector out;
  out.yZ = -1.0 + 2.0 * damped_cos(z, r) - (s.yZ + 1.0) * damped_cos(delta + z, r);
  if (!s.T.empty()) {
    out.T.reserve(s.T.size());
    out.T.push_back(delta + z);
    out.T.insert(out.T.end(), s.T.begin(), s.T.end() - 1);
  }
  return out;
}

StateVector map_M_plus(const StateVector& s, const Parameters& p) { return reflect(map_M(s, p)); }

StateVector map_M_minus(const StateVector& s, const Parameters& p) {
  return reflect(map_M_plus(reflect(s), p));
}

SystemState to_system_state(const StateVector& s, const Parameters& p, double t) {
  SystemState st;
  st.t = t;
  st.v = {0.0, s.yZ};
  st.zeros.reserve(s.T.size() + 1);
  st.zeros.push_back(t);
  double age = 0.0;
  for (double gap : s.T) {
    age += gap;
    st.zeros.push_back(t - age);
  }
  // Feedback on the next segment is -1.
  st.xsign_delayed = -p.sigma();
  return st;
}

StateVector from_system_state(const SystemState& st, const Parameters& p) {
  if (st.v.x != 0.0 || st.zeros.empty() || st.zeros.front() != st.t) {
    throw Error(ErrorKind::InvalidState, "state is not at a Z-type event");
  }
  StateVector s;
  s.yZ = frozen_feedback(st, p) == FlowSign::Minus ? st.v.y : -st.v.y;
  for (std::size_t j = 1; j < st.zeros.size(); ++j) s.T.push_back(st.zeros[j - 1] - st.zeros[j]);
  return s;
}

double switching_residual(double T, int nu, const Rates& r) {
  // e^{mu T} gsinc(z) - gsinc(delta), multiplied by e^{-mu (2z + delta)}.
  const double z = (nu + 1) * T - 1.0;
  const double delta = 1.0 - nu * T;
  return damped_sinc(z, r) - std::exp(-2.0 * r.mu * z) * damped_sinc(delta, r);
}

std::pair<double, double> switching_bracket(int nu, const Rates& r) {
  if (nu < 0) throw Error(ErrorKind::InvalidArgument, "nu must be non-negative");
  if (nu == 0) return {1.0, 1.0 + 20.0 / r.mu};
  return {1.0 / (nu + 1), 1.0 / nu};
}

namespace {

std::vector<double> scan_roots(int nu, const Rates& r, int points) {
  const auto [lo, hi] = switching_bracket(nu, r);
  auto f = [&](double T) { return switching_residual(T, nu, r); };
  std::vector<double> roots;
  const double step = (hi - lo) / points;
  double t_prev = lo;
  double f_prev = f(lo);
  for (int i = 1; i <= points; ++i) {
    const double t_cur = i == points ? hi : lo + step * i;
    const double f_cur = f(t_cur);
    if (f_cur == 0.0 && i < points) {
      roots.push_back(t_cur);
    } else if (f_prev != 0.0 && f_cur != 0.0 && (f_prev > 0.0) != (f_cur > 0.0)) {
      std::uintmax_t iters = 200;
      const auto br = boost::math::tools::toms748_solve(
          f, t_prev, t_cur, f_prev, f_cur, boost::math::tools::eps_tolerance<double>(53), iters);
      const double a = br.first, b = br.second;
      roots.push_back(std::abs(f(a)) <= std::abs(f(b)) ? a : b);
    }
    t_prev = t_cur;
    f_prev = f_cur;
  }
  return roots;
}

}  // namespace

std::vector<double> switching_roots(int nu, const Parameters& p, const RootScanOptions& opts) {
  const Rates r = derive_rates(p);
  auto roots = scan_roots(nu, r, opts.grid_points);
  if (roots.empty() && opts.refinements > 1) roots = scan_roots(nu, r, opts.grid_points * opts.refinements);
  return roots;
}

double solve_T_star(int nu, const Parameters& p, const RootScanOptions& opts) {
  const auto roots = switching_roots(nu, p, opts);
  if (roots.empty()) {
    throw Error(ErrorKind::NoRoot, "no switching interval for nu = " + std::to_string(nu));
  }
  const double T = roots.front();
  if (std::abs(switching_residual(T, nu, derive_rates(p))) > opts.residual_tol) {
    throw Error(ErrorKind::NoConvergence, "switching interval refinement did not reach tolerance");
  }
  return T;
}

StateVector FixedPoint::state() const { return {yZstar, std::vector<double>(static_cast<std::size_t>(nu), Tstar)}; }

FixedPoint make_fixed_point(int nu, const Parameters& p, double Tstar) {
  const Rates r = derive_rates(p);
  FixedPoint fp{nu, Tstar, 0.0, 0.0, 0.0, {}, p};
  fp.zstar = (nu + 1) * Tstar - 1.0;
  fp.deltastar = 1.0 - nu * Tstar;
  fp.yZstar = -1.0 + 2.0 / (std::exp(r.mu * fp.zstar) * gcos(fp.zstar, r) + damped_cos(fp.deltastar, r));

  if (r.regime == Regime::Underdamped && r.omega2 > 0.0) {
    const double half = M_PI / r.omega_abs();
    fp.valid.z_window = fp.zstar > 0.0 && fp.zstar < half;
    fp.valid.delta_window = fp.deltastar > 0.0 && fp.deltastar < half;
  } else {
    fp.valid.z_window = fp.zstar > 0.0;
    fp.valid.delta_window = fp.deltastar > 0.0;
  }
  const double lift = fp.yZstar + 1.0;
  const int want = p.sigma() * ((nu + 1) % 2 == 0 ? 1 : -1);
  fp.valid.parity = lift != 0.0 && (lift > 0.0 ? 1 : -1) == want;
  return fp;
}

FixedPoint fixed_point(int nu, const Parameters& p, const RootScanOptions& opts) {
  const auto roots = switching_roots(nu, p, opts);
  if (roots.empty()) {
    throw Error(ErrorKind::NoRoot, "no switching interval for nu = " + std::to_string(nu));
  }
  for (double T : roots) {
    FixedPoint fp = make_fixed_point(nu, p, T);
    if (fp.valid.ok()) return fp;
  }
  return make_fixed_point(nu, p, roots.front());
}

FixedPoint fixed_point_near(int nu, const Parameters& p, double T_guess, const RootScanOptions& opts) {
  const auto roots = switching_roots(nu, p, opts);
  if (roots.empty()) {
    throw Error(ErrorKind::NoRoot, "no switching interval for nu = " + std::to_string(nu));
  }
  std::optional<FixedPoint> best_valid, best_any;
  for (double T : roots) {
    FixedPoint fp = make_fixed_point(nu, p, T);
    auto closer = [&](const std::optional<FixedPoint>& cur) {
      return !cur || std::abs(T - T_guess) < std::abs(cur->Tstar - T_guess);
    };
    if (fp.valid.ok() && closer(best_valid)) best_valid = fp;
    if (closer(best_any)) best_any = fp;
  }
  return best_valid ? *best_valid : *best_any;
}

JacobianCoeffs jacobian_coeffs(const FixedPoint& fp) {
  const double lift = fp.yZstar + 1.0;
  if (lift == 0.0) throw Error(ErrorKind::Degenerate, "yZ* = -1: Jacobian coefficient c is undefined");
  const Rates r = derive_rates(fp.params);
  const double T = fp.Tstar;
  const double ec = damped_cos(T, r);
  const double es = damped_sinc(T, r);
  const double e2 = std::exp(-2.0 * r.mu * T);
  JacobianCoeffs jc;
  jc.a = -(ec + r.mu * es);
  jc.b = -r.Omega_sq() * lift * es;
  jc.c = es / lift;
  jc.d = -1.0 - (ec - r.mu * es);
  jc.identity1_residual = (jc.a - 1.0) * jc.d - jc.b * jc.c - (1.0 + 2.0 * ec + e2);
  jc.identity2_residual = jc.a * (jc.d + 1.0) - jc.b * jc.c - e2;
  return jc;
}

Eigen::MatrixXd jacobian_matrix(const JacobianCoeffs& jc, int nu) {
  const int n = nu + 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  m(0, 0) = jc.a;
  if (nu == 0) return m;
  m(1, 0) = jc.c;
  for (int j = 1; j < n; ++j) {
    m(0, j) = jc.b;
    m(1, j) = jc.d;
  }
  for (int i = 2; i < n; ++i) m(i, i - 1) = 1.0;
  return m;
}

std::vector<double> char_poly(const JacobianCoeffs& jc, int nu) {
  if (nu == 0) return {-jc.a, 1.0};
  const double A = (jc.a - 1.0) * jc.d - jc.b * jc.c;
  std::vector<double> c(static_cast<std::size_t>(nu) + 2, A);
  c[0] = A + jc.d;
  c[static_cast<std::size_t>(nu)] = -(jc.a + jc.d);
  c[static_cast<std::size_t>(nu) + 1] = 1.0;
  return c;
}

namespace {

// Polynomial value and derivative by Horner's scheme.
std::pair<std::complex<double>, std::complex<double>> horner(const std::vector<double>& c, std::complex<double> x) {
  std::complex<double> p = 0.0, dp = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    dp = dp * x + p;
    p = p * x + *it;
  }
  return {p, dp};
}

}  // namespace

std::complex<double> char_residual(const JacobianCoeffs& jc, int nu, std::complex<double> lambda) {
  return horner(char_poly(jc, nu), lambda).first;
}

Spectrum char_roots(const JacobianCoeffs& jc, int nu) {
  Spectrum out;
  if (nu == 0) {
    out.roots = {jc.a};
  } else {
    const auto c = char_poly(jc, nu);
    const int n = nu + 1;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -c[static_cast<std::size_t>(i)];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    const Eigen::VectorXcd ev = solver.eigenvalues();
    out.roots.assign(ev.data(), ev.data() + ev.size());
    // A few guarded Newton steps tighten roots the eigen-solve left loose.
    for (auto& root : out.roots) {
      for (int it = 0; it < 3; ++it) {
        const auto [p, dp] = horner(c, root);
        if (p == 0.0 || dp == 0.0) break;
        const std::complex<double> next = root - p / dp;
        if (std::abs(next - root) > 1e-6 * std::max(1.0, std::abs(root))) break;
        if (std::abs(horner(c, next).first) >= std::abs(p)) break;
        root = next;
      }
      if (std::abs(root.imag()) < 1e-14 * std::max(1.0, std::abs(root))) root = root.real();
    }
  }
  out.unstable_count = static_cast<int>(
      std::count_if(out.roots.begin(), out.roots.end(), [](auto l) { return std::abs(l) > 1.0; }));
  return out;
}

Spectrum spectrum_of(const FixedPoint& fp) { return char_roots(jacobian_coeffs(fp), fp.nu); }

double x_H(const FixedPoint& fp) {
  const Rates r = derive_rates(fp.params);
  const Headpoint at_switch = apply_flow(fp.deltastar, {0.0, fp.yZstar}, FlowSign::Minus, r);
  // In the normalised frame the switch is an H event for sigma = +1 and its
  // mirror image for sigma = -1.
  return fp.params.sigma() * at_switch.x;
}

}  // namespace relay
