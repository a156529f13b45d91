#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "relay/atlas.hpp"
#include "relay/error.hpp"
#include "relay/torus.hpp"

using namespace relay;

namespace {

double closest_to_unit(const Spectrum& s, std::complex<double> target) {
  double best = 1e300;
  for (const auto& z : s.roots) best = std::min(best, std::abs(z - target));
  return best;
}

}  // namespace

TEST_CASE("NS coefficient identities") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uQ(0.2, 3.0), uO(1.0, 40.0);
  int n = 0;
  while (n < 100) {
    const Parameters p(uQ(rng), uO(rng), -1);
    const FixedPoint fp = fixed_point(static_cast<int>(rng() % 9), p);
    if (!fp.valid.ok()) continue;
    ++n;
    const Rates r = derive_rates(p);
    const double T = fp.Tstar;
    const NSCoefficients f = ns_coeffs(fp);
    CHECK(f.f2 + f.f3 == doctest::Approx(-2 * std::exp(-2 * r.mu * T)).scale(1.0).epsilon(1e-13));
    CHECK(f.f3 - f.f2 == doctest::Approx(2 * (gcos(T, r) - r.mu * gsinc(T, r)) * std::exp(-r.mu * T)).scale(1.0).epsilon(1e-12));
    const JacobianCoeffs jc = jacobian_coeffs(fp);
    CHECK(f.f1 + 1 == doctest::Approx((jc.a - 1) * jc.d - jc.b * jc.c).scale(1.0).epsilon(1e-10));
  }
}

TEST_CASE("Neimark-Sacker points of the frequency-two/three mode") {
  std::vector<BifurcationPoint> pts = ns_locus(2, 1.5, {2.0, 20.0});
  const auto p3 = ns_locus(3, 1.5, {2.0, 20.0});
  pts.insert(pts.end(), p3.begin(), p3.end());
  REQUIRE(pts.size() >= 2);

  auto near = [&](double Om) {
    return std::any_of(pts.begin(), pts.end(), [&](const auto& b) { return std::abs(b.Omega - Om) <= 0.01; });
  };
  CHECK(near(4.75));
  CHECK(near(14.78));

  for (const auto& b : pts) {
    CHECK(b.kind == BifKind::NS);
    CHECK(std::abs(b.residual) <= 1e-9);
    REQUIRE(b.phi);
    CHECK(*b.phi > 0.0);
    CHECK(*b.phi < M_PI);
    const FixedPoint fp = fixed_point_near(b.nu, Parameters(b.Q, b.Omega, b.sigma), b.Tstar);
    const auto [re, im] = ns_residuals(ns_coeffs(fp), b.nu, *b.phi);
    CHECK(std::abs(re) <= 1e-7);
    CHECK(std::abs(im) <= 1e-7);
    CHECK(closest_to_unit(spectrum_of(fp), std::polar(1.0, *b.phi)) <= 1e-6);
  }
}

TEST_CASE("overdamped modes stabilise and stay stable") {
  for (int nu = 2; nu <= 12; nu += 2) {
    const auto branch = follow_branch(nu, 0.45, -1, {1.0, 40.0}, {800, {}});
    int last_unstable = -1;
    for (int i = 0; i < static_cast<int>(branch.size()); ++i) {
      if (branch[i].fp && branch[i].spectrum.unstable_count > 0) last_unstable = i;
    }
    REQUIRE(last_unstable >= 0);
    REQUIRE(last_unstable + 1 < static_cast<int>(branch.size()));
    for (std::size_t i = last_unstable + 1; i < branch.size(); ++i) {
      REQUIRE(branch[i].fp);
      CHECK(branch[i].spectrum.unstable_count == 0);
    }
    // the last change of stability is a torus bifurcation
    const auto ns = ns_locus(nu, 0.45, {branch[last_unstable].Omega, branch[last_unstable + 1].Omega});
    CHECK(ns.size() == 1);
  }
}

TEST_CASE("pitchfork") {
  const auto pf = pitchfork_locus(3, 1.5, {1.0, 40.0});
  REQUIRE(pf.size() == 1);
  const BifurcationPoint& b = pf.front();
  CHECK(b.kind == BifKind::PF);
  CHECK(b.Omega > 14.78);
  CHECK(b.Omega < corner_omega(3, 1.5, CornerType::Terminal).value());
  const FixedPoint fp = fixed_point_near(3, Parameters(1.5, b.Omega, -1), b.Tstar);
  CHECK(closest_to_unit(spectrum_of(fp), -1.0) <= 1e-7);
  CHECK(std::abs(pitchfork_function(fp)) <= 1e-9);

  CHECK_THROWS_AS(pitchfork_locus(2, 1.5, {1.0, 40.0}), Error);
  CHECK_THROWS_AS(pitchfork_locus(0, 1.5, {1.0, 40.0}), Error);

  SUBCASE("none for positive feedback or even frequency") {
    for (double Q : {0.3, 0.8, 1.5, 2.5}) {
      for (int nu = 0; nu <= 6; ++nu) {
        CHECK(pitchfork_candidates(nu, Q, 1, {1.0, 40.0}, {400, {}}).empty());
        if (nu % 2 == 0) CHECK(pitchfork_candidates(nu, Q, -1, {1.0, 40.0}, {400, {}}).empty());
      }
    }
  }
}

TEST_CASE("corner collisions") {
  const double Q = 1.5;
  const double Oc1 = corner_omega(2, Q, CornerType::Relabel).value();
  const double Oc2 = corner_omega(3, Q, CornerType::Terminal).value();
  CHECK(omega_from_Omega(Oc1, Q) == doctest::Approx(3 * M_PI).epsilon(1e-14));
  CHECK(omega_from_Omega(Oc2, Q) == doctest::Approx(7 * M_PI).epsilon(1e-14));
  CHECK(Omega_from_omega(omega_from_Omega(12.3, Q), Q) == doctest::Approx(12.3).epsilon(1e-15));

  const FixedPoint a = fixed_point_near(2, Parameters(Q, Oc1 * (1 - 1e-9), -1), 1.0 / 3);
  CHECK(a.deltastar == doctest::Approx(1.0 / 3).epsilon(1e-7));
  CHECK(a.zstar == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  const FixedPoint t = fixed_point_near(3, Parameters(Q, Oc2 * (1 - 1e-9), -1), 2.0 / 7);
  CHECK(t.zstar == doctest::Approx(1.0 / 7).epsilon(1e-7));
  CHECK(t.deltastar == doctest::Approx(1.0 / 7).epsilon(1e-7));

  CHECK(corner_on_branch(2, Q, -1, CornerType::Relabel));
  CHECK(corner_on_branch(3, Q, -1, CornerType::Terminal));
  CHECK(mode_partner(2, Q, -1) == 3);

  CHECK_FALSE(corner_omega(2, 0.5, CornerType::Relabel));
  CHECK_FALSE(corner_omega(2, 0.3, CornerType::Terminal));
  CHECK(corner_omega(4, 1e6, CornerType::Terminal).value() == doctest::Approx(9 * M_PI).epsilon(1e-10));

  const std::vector<double> Qs{0.6, 1.0, 2.0};
  const auto [c1, c2] = corner_lines(3, Qs);
  CHECK(c1.type == CornerType::Relabel);
  CHECK(c2.type == CornerType::Terminal);
  REQUIRE(c1.points.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(c2.points[i].second > c1.points[i].second);
}

TEST_CASE("passband") {
  for (double Q : {0.3, 0.5, 1.5, 10.0}) {
    const auto [lo, hi] = passband(Q);
    CHECK(lo * hi == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(hi - lo == doctest::Approx(1.0 / Q).epsilon(1e-14));
    const std::complex<double> H = 1.0 / std::complex<double>(1.0, Q * (lo - 1.0 / lo));
    CHECK(std::norm(H) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("region scan") {
  const std::vector<int> nus{0, 2, 3, 4, 6, 8, 10, 12};
  const std::vector<double> Qs{0.45, 1.5};
  const std::vector<double> Oms{10.0, 40.0};
  const RegionGrid g = region_scan(nus, Qs, Oms, -1, 2);
  REQUIRE(g.cells.size() == nus.size() * 4);
  CHECK(g.at(1, 0, 2).exists);
  CHECK(g.at(1, 0, 2).stable);
  for (std::size_t k = 0; k < nus.size(); ++k) {
    if (nus[k] % 2) continue;
    CHECK(g.at(0, 1, k).exists);
    CHECK(g.at(0, 1, k).stable);
  }
  const RegionGrid g1 = region_scan(nus, Qs, Oms, -1, 1);
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    CHECK(g.cells[i].unstable_count == g1.cells[i].unstable_count);
    CHECK(g.cells[i].Tstar == g1.cells[i].Tstar);
  }
  CHECK(region_scan(std::span<const int>{}, Qs, Oms, -1).cells.empty());
}

TEST_CASE("stability flips are explained by located points") {
  const double Q = 1.5;
  const OmegaRange range{2.0, 30.0};
  for (int nu : {2, 3}) {
    const auto branch = follow_branch(nu, Q, -1, range, {600, {}});
    auto located = ns_locus(nu, Q, range);
    const auto pf = pitchfork_candidates(nu, Q, -1, range);
    located.insert(located.end(), pf.begin(), pf.end());
    for (std::size_t i = 1; i < branch.size(); ++i) {
      const auto &a = branch[i - 1], &b = branch[i];
      if (!a.fp || !b.fp) continue;
      if ((a.spectrum.unstable_count == 0) == (b.spectrum.unstable_count == 0)) continue;
      const bool found = std::any_of(located.begin(), located.end(), [&](const auto& p) {
        return p.Omega >= a.Omega && p.Omega <= b.Omega;
      });
      CHECK_MESSAGE(found, "unexplained flip between " << a.Omega << " and " << b.Omega);
    }
  }
}

TEST_CASE("period diagram") {
  const std::vector<int> nus{0, 2, 4, 6, 8, 10, 12};
  const PeriodDiagram pd = period_diagram(nus, 0.45, {1.0, 40.0}, -1, {300, {}}, 2);
  REQUIRE_FALSE(pd.rows.empty());
  for (const auto& row : pd.rows) {
    if (row.nu == 0) {
      CHECK(row.invP < 0.5);
    } else {
      CHECK(row.invP > row.nu / 2.0);
      CHECK(row.invP < (row.nu + 1) / 2.0);
    }
  }
  // curves stack by frequency at a common Omega
  std::vector<double> at40;
  for (int nu : nus) {
    double best = -1, invP = 0;
    for (const auto& row : pd.rows)
      if (row.nu == nu && row.Omega > best) best = row.Omega, invP = row.invP;
    at40.push_back(invP);
  }
  CHECK(std::is_sorted(at40.begin(), at40.end()));
  CHECK(pd.passband.first * pd.passband.second == doctest::Approx(1.0));

  const PeriodDiagram pd15 = period_diagram(std::vector<int>{2, 3}, 1.5, {2.0, 30.0}, -1, {300, {}});
  const auto has = [&](BifKind k, int nu) {
    return std::any_of(pd15.markers.begin(), pd15.markers.end(),
                       [&](const auto& m) { return m.kind == k && m.nu == nu; });
  };
  CHECK(has(BifKind::NS, 2));
  CHECK(has(BifKind::NS, 3));
  CHECK(has(BifKind::PF, 3));
  CHECK(has(BifKind::Corner1, 2));
  CHECK(has(BifKind::Corner2, 3));

  const PeriodDiagram a = period_diagram(nus, 0.45, {1.0, 40.0}, -1, {300, {}}, 1);
  REQUIRE(a.rows.size() == pd.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].invP == pd.rows[i].invP);
}

TEST_CASE("mode trace") {
  const double Q = 1.5;
  const ModeBranch fwd = mode_trace(2, Q, {5.0, 30.0}, -1, {1000, {}});
  REQUIRE(fwd.relabels.size() == 1);
  const double Oc1 = corner_omega(2, Q, CornerType::Relabel).value();
  const double Oc2 = corner_omega(3, Q, CornerType::Terminal).value();
  CHECK(fwd.relabels[0].Omega == doctest::Approx(Oc1).epsilon(1e-9));
  REQUIRE(fwd.termination);
  CHECK(fwd.termination->kind == BifKind::Corner2);
  CHECK(fwd.termination->Omega == doctest::Approx(Oc2).epsilon(1e-9));
  CHECK(fwd.samples.front().nu == 2);
  CHECK(fwd.samples.back().nu == 3);

  // 1/P has no jump at the relabel
  for (std::size_t i = 1; i < fwd.samples.size(); ++i) {
    const auto &a = fwd.samples[i - 1], &b = fwd.samples[i];
    CHECK(std::abs(b.invP - a.invP) < 0.05);
  }

  const ModeBranch bwd = mode_trace(3, Q, {5.0, Oc2 * (1 - 1e-6)}, -1, {1000, {}}, true);
  REQUIRE(bwd.relabels.size() == 1);
  CHECK(bwd.relabels[0].Omega == doctest::Approx(Oc1).epsilon(1e-9));
  CHECK(bwd.samples.back().nu == 2);
  // both directions land on the same fixed points
  for (const auto& s : bwd.samples) {
    const FixedPoint f = fixed_point_near(s.nu, Parameters(Q, s.Omega, -1), s.fp.Tstar);
    CHECK(f.Tstar == doctest::Approx(s.fp.Tstar).epsilon(1e-12));
  }
  for (const auto& s : fwd.samples) {
    if (s.Omega > 20.0 || s.Omega < 6.0) continue;
    const auto it = std::min_element(bwd.samples.begin(), bwd.samples.end(), [&](const auto& x, const auto& y) {
      return std::abs(x.Omega - s.Omega) < std::abs(y.Omega - s.Omega);
    });
    if (std::abs(it->Omega - s.Omega) > 1e-12) continue;
    CHECK(it->nu == s.nu);
    CHECK(it->fp.Tstar == doctest::Approx(s.fp.Tstar).epsilon(1e-12));
  }
}

TEST_CASE("bad arguments") {
  CHECK_THROWS_AS(linspace(0.0, 1.0, 0), Error);
  CHECK(linspace(1.0, 2.0, 3) == std::vector<double>{1.0, 1.5, 2.0});
  CHECK_THROWS_AS(ns_locus(3, 1.5, {20.0, 2.0}), Error);
  CHECK(to_string(BifKind::Corner2) == "Corner2");
}

TEST_CASE("NS criticality from short runs") {
  auto pts = ns_locus(2, 1.5, {2.0, 20.0});
  const auto p3 = ns_locus(3, 1.5, {2.0, 20.0});
  pts.insert(pts.end(), p3.begin(), p3.end());
  REQUIRE(pts.size() == 2);
  // the fixed point hands over to nu=1 below 4.75, a small torus grows above 14.78
  CHECK(ns_criticality(pts[0]) == Criticality::Subcritical);
  CHECK(ns_criticality(pts[1]) == Criticality::Supercritical);
  CHECK(to_string(Criticality::Supercritical) == "supercritical");

  BifurcationPoint pf = pts[0];
  pf.kind = BifKind::PF;
  CHECK_THROWS_AS(ns_criticality(pf), Error);
}
