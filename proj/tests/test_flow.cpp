#include <doctest.h>

#include <cmath>
#include <random>

#include "relay/error.hpp"
#include "relay/flow.hpp"

using namespace relay;

namespace {

// frozen-feedback right-hand side: (Q/Om) x' = -x - y + s, y' = Q Om x
Headpoint rhs(Headpoint v, double s, const Parameters& p) {
  return {p.Omega() / p.Q() * (-v.x - v.y + s), p.Q() * p.Omega() * v.x};
}

Headpoint rk4(Headpoint v, double s, const Parameters& p, double t, int n) {
  const double h = t / n;
  auto add = [](Headpoint a, Headpoint b, double k) { return Headpoint{a.x + k * b.x, a.y + k * b.y}; };
  for (int i = 0; i < n; ++i) {
    const Headpoint k1 = rhs(v, s, p);
    const Headpoint k2 = rhs(add(v, k1, h / 2), s, p);
    const Headpoint k3 = rhs(add(v, k2, h / 2), s, p);
    const Headpoint k4 = rhs(add(v, k3, h), s, p);
    v.x += h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    v.y += h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
  }
  return v;
}

Matrix2 mul(const Matrix2& a, const Matrix2& b) {
  Matrix2 c{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return c;
}

}  // namespace

TEST_CASE("rates in the three regimes") {
  SUBCASE("critical") {
    const Rates r = derive_rates(Parameters(0.5, 1.0, -1));
    CHECK(r.mu == doctest::Approx(1.0));
    CHECK(r.omega2 == 0.0);
    CHECK(r.regime == Regime::Critical);
  }
  SUBCASE("underdamped") {
    const Rates r = derive_rates(Parameters(1.5, 14.0, -1));
    CHECK(r.mu == doctest::Approx(14.0 / 3.0).epsilon(1e-14));
    CHECK(r.omega2 == doctest::Approx(196.0 * 8.0 / 9.0).epsilon(1e-14));
    CHECK(r.regime == Regime::Underdamped);
    CHECK(r.Omega_sq() == doctest::Approx(196.0).epsilon(1e-14));
  }
  SUBCASE("overdamped") {
    const Rates r = derive_rates(Parameters(0.4, 7.0, -1));
    CHECK(r.mu == doctest::Approx(8.75).epsilon(1e-14));
    CHECK(r.omega2 < 0.0);
    CHECK(r.regime == Regime::Overdamped);
  }
  CHECK_THROWS_AS(Parameters(-1.0, 1.0, 1), Error);
  CHECK_THROWS_AS(Parameters(1.0, 0.0, 1), Error);
  CHECK_THROWS_AS(Parameters(1.0, 1.0, 0), Error);
}

TEST_CASE("kernels") {
  for (double Q : {0.3, 0.5, 1.5}) {
    const Rates r = derive_rates(Parameters(Q, 7.0, 1));
    CHECK(gcos(0.0, r) == 1.0);
    CHECK(gsinc(0.0, r) == 0.0);
  }
  const Rates crit = derive_rates(Parameters(0.5, 3.0, 1));
  for (double t : {0.1, 0.7, 2.5}) CHECK(gsinc(t, crit) == t);

  const Rates r = derive_rates(Parameters(1.5, 14.0, -1));
  const double w = std::sqrt(r.omega2);
  CHECK(gcos(0.1, r) == doctest::Approx(std::cos(w * 0.1)).epsilon(1e-12));
  CHECK(gsinc(0.1, r) == doctest::Approx(std::sin(w * 0.1) / w).epsilon(1e-12));
  CHECK(damped_cos(0.1, r) == doctest::Approx(std::exp(-r.mu * 0.1) * std::cos(w * 0.1)).epsilon(1e-12));

  const Rates o = derive_rates(Parameters(0.4, 7.0, -1));
  const double k = o.omega_abs();
  CHECK(gcos(0.3, o) == doctest::Approx(std::cosh(k * 0.3)).epsilon(1e-12));
  CHECK(gsinc(0.3, o) == doctest::Approx(std::sinh(k * 0.3) / k).epsilon(1e-12));
}

TEST_CASE("flow matrix") {
  for (double Q : {0.3, 0.5, 1.5}) {
    const Rates r = derive_rates(Parameters(Q, 14.0, 1));
    const Matrix2 A0 = flow_matrix(0.0, r);
    CHECK(A0[0][0] == 1.0);
    CHECK(A0[0][1] == 0.0);
    CHECK(A0[1][0] == 0.0);
    CHECK(A0[1][1] == 1.0);
    const auto b0 = flow_offset(0.0, r);
    CHECK(b0[0] == 0.0);
    CHECK(b0[1] == 0.0);

    for (double t : {0.1, 0.5, 1.0}) {
      const Matrix2 A = flow_matrix(t, r);
      const double det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
      CHECK(det == doctest::Approx(std::exp(-2.0 * r.mu * t)).epsilon(1e-12));
    }
    const Matrix2 A12 = flow_matrix(0.37, r);
    const Matrix2 AA = mul(flow_matrix(0.12, r), flow_matrix(0.25, r));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(A12[i][j] == doctest::Approx(AA[i][j]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("apply_flow") {
  const Parameters p(1.5, 14.0, -1);
  const Rates r = derive_rates(p);

  for (FlowSign s : {FlowSign::Plus, FlowSign::Minus}) {
    const Headpoint rest{0.0, value(s)};
    for (double t : {0.0, 0.3, 5.0}) {
      const Headpoint v = apply_flow(t, rest, s, r);
      CHECK(v.x == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
      CHECK(v.y == doctest::Approx(value(s)).epsilon(1e-15));
    }
  }
  const Headpoint v0{0.3, -0.2};
  const Headpoint same = apply_flow(0.0, v0, FlowSign::Plus, r);
  CHECK(same.x == v0.x);
  CHECK(std::abs(same.y - v0.y) <= 1e-16);

  SUBCASE("rk4 oracle") {
    const Headpoint a = apply_flow(0.05, v0, FlowSign::Plus, r);
    const Headpoint b = rk4(v0, 1.0, p, 0.05, 2000);
    CHECK(std::abs(a.x - b.x) <= 1e-8);
    CHECK(std::abs(a.y - b.y) <= 1e-8);
  }

  SUBCASE("finite-difference derivative") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uQ(0.2, 3.0), uO(1.0, 30.0), uv(-2.0, 2.0), ut(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      const Parameters q(uQ(rng), uO(rng), 1);
      const Rates rq = derive_rates(q);
      const Headpoint v{uv(rng), uv(rng)};
      const FlowSign s = i % 2 ? FlowSign::Plus : FlowSign::Minus;
      const double t = ut(rng);
      const double h = 1e-5;
      const Headpoint fp = apply_flow(t + h, v, s, rq), fm = apply_flow(t - h, v, s, rq);
      const Headpoint mid = apply_flow(t, v, s, rq);
      const Headpoint f = rhs(mid, value(s), q);
      const double scale = std::max({1.0, std::abs(f.x), std::abs(f.y)});
      CHECK(std::abs((fp.x - fm.x) / (2 * h) - f.x) <= 1e-4 * scale);
      CHECK(std::abs((fp.y - fm.y) / (2 * h) - f.y) <= 1e-4 * scale);
    }
  }

  SUBCASE("continuity across Q = 1/2") {
    const Headpoint v{0.7, -0.4};
    for (double t : {0.01, 0.2, 1.3}) {
      const Headpoint c = apply_flow(t, v, FlowSign::Minus, derive_rates(Parameters(0.5, 9.0, 1)));
      for (double dq : {-1e-6, 1e-6}) {
        const Headpoint n = apply_flow(t, v, FlowSign::Minus, derive_rates(Parameters(0.5 + dq, 9.0, 1)));
        CHECK(std::abs(n.x - c.x) <= 1e-5);
        CHECK(std::abs(n.y - c.y) <= 1e-5);
      }
    }
  }

  SUBCASE("odd symmetry") {
    for (double Q : {0.3, 0.5, 1.5}) {
      const Rates rq = derive_rates(Parameters(Q, 6.0, 1));
      const Headpoint v{0.42, -1.3};
      const Headpoint a = apply_flow(0.77, v, FlowSign::Plus, rq);
      const Headpoint b = apply_flow(0.77, -v, FlowSign::Minus, rq);
      CHECK(a == -b);
    }
  }

  SUBCASE("contraction onto the rest point") {
    for (double Q : {0.3, 0.5, 1.5}) {
      const Rates rq = derive_rates(Parameters(Q, 6.0, 1));
      const Headpoint v = apply_flow(40.0, {1.5, -2.0}, FlowSign::Plus, rq);
      CHECK(std::abs(v.x) < 1e-8);
      CHECK(std::abs(v.y - 1.0) < 1e-8);
    }
  }
}
