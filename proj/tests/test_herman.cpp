#include <gtest/gtest.h>

#include "dianalytic/herman.hpp"

using namespace dianalytic;

namespace {

DianalyticCubic fig1() { return make_map(1.9, cplx(0.0, 1.5)); }
DianalyticCubic fig2() { return make_map(1.8, cplx(0.0, 2.0)); }

const SpherePoint kX(0.152142, 0.00815055);
const SpherePoint kX1(0.477204, 0.366227), kX2(0.820551, 0.991023);

struct Fixture {
  DianalyticCubic f;
  BasinCatalog cat;
  RingGeometry g;
};

const Fixture& fig2_fixture() {
  static const Fixture fx = [] {
    Fixture x{fig2(), {}, {}};
    x.cat = build_basin_catalog(x.f);
    x.g = boundary_curves(x.f, x.cat);
    return x;
  }();
  return fx;
}

const Fixture& fig1_fixture() {
  static const Fixture fx = [] {
    Fixture x{fig1(), {}, {}};
    x.cat = build_basin_catalog(x.f);
    x.g = boundary_curves(x.f, x.cat);
    return x;
  }();
  return fx;
}

void expect_sound(const HermanEvidenceReport& r) {
  if (r.verdict != Verdict::strong_evidence) return;
  EXPECT_TRUE(r.geometry_valid);
  EXPECT_TRUE(r.boundary_nonperiodic);
  EXPECT_TRUE(r.f_invariance_pass);
  EXPECT_TRUE(r.phi_invariance_pass);
  EXPECT_GT(r.interior_min_distance, r.delta);
  EXPECT_EQ(r.ring_candidates, 1);
}

}  // namespace

TEST(Herman, PolarCurveOfCircle) {
  std::vector<cplx> pts;
  for (int k = 0; k < 400; ++k) pts.push_back(std::polar(2.0, 2.0 * std::numbers::pi * k / 400.0));
  const PolarCurve c(pts);
  EXPECT_LT(c.max_gap(), 0.02);
  EXPECT_EQ(c.roughness(), 0.0);
  for (double th : {-3.0, -1.0, 0.0, 0.5, 3.1}) EXPECT_NEAR(c.radius_at(th), 2.0, 1e-3);
  EXPECT_NEAR(c.median_radius(), 2.0, 1e-12);
}

TEST(Herman, BoundaryCurvesFig1) {
  const auto& fx = fig1_fixture();
  ASSERT_EQ(fx.cat.free_pairs().size(), 1u);
  ASSERT_TRUE(fx.g.valid);
  EXPECT_EQ(fx.g.boundary_a.size(), 8000u);
  EXPECT_LE(fx.g.antipodal_defect, 1e-6);
  EXPECT_TRUE(boundary_nonperiodicity(fx.g));
}

TEST(Herman, BoundaryCurvesFig2UseExteriorPair) {
  const auto& fx = fig2_fixture();
  ASSERT_EQ(fx.cat.free_pairs().size(), 2u);
  ASSERT_TRUE(fx.g.valid);
  EXPECT_EQ(fx.g.boundary_pair, 0);
  EXPECT_EQ(fx.g.interior_pair, 1);
  EXPECT_LE(fx.g.antipodal_defect, 1e-6);
  ASSERT_EQ(fx.g.interior_curves.size(), 2u);
  std::size_t inside = 0;
  for (const auto& z : fx.g.interior_curves[0]) inside += fx.g.in_ring(z);
  EXPECT_GE(inside, static_cast<std::size_t>(0.99 * fx.g.interior_curves[0].size()));
}

TEST(Herman, AllAttractedHasNoRing) {
  const auto f = make_map(0.0, cplx(0.0, 0.5));
  const auto cat = build_basin_catalog(f);
  const RingGeometry g = boundary_curves(f, cat);
  EXPECT_FALSE(g.valid);
  EXPECT_NE(g.note.find("attracted"), std::string::npos);
}

TEST(Herman, BoundaryNonperiodicFig2AtPeriod500) {
  EXPECT_TRUE(boundary_nonperiodicity(fig2_fixture().g, 500, 1e-7));
}

TEST(Herman, AttractedOrbitIsPeriodic) {
  const auto f = fig1();
  const auto crit = critical_points(f);
  const auto tail = detail::orbit_tail(f, crit[1], 2000, 2000);
  EXPECT_FALSE(orbit_nonperiodic(tail, 500, 1e-7));
}

TEST(Herman, HigherPeriodExampleBoundaryIsNonperiodic) {
  const auto f = make_map(2.606, cplx(0.0, 1.507));
  const auto cat = build_basin_catalog(f);
  ASSERT_EQ(cat.cycles.size(), 2u);
  EXPECT_EQ(cat.cycles[0].period, 6);
  ASSERT_EQ(cat.free_pairs().size(), 1u);
  const RingGeometry g = boundary_curves(f, cat);
  ASSERT_TRUE(g.valid);
  EXPECT_TRUE(boundary_nonperiodicity(g));
}

TEST(Herman, InteriorSeedsStayAwayFromPostcriticalSet) {
  {
    const auto& fx = fig2_fixture();
    HermanSettings s;
    s.extra_seeds = {kX};
    const SphereCloud pc = postcritical_cloud(fx.f, fx.cat, 10000);
    const auto r = interior_distance_test(fx.f, fx.g, fx.cat, pc, 0, 10000, 1, s);
    ASSERT_EQ(r.log.size(), 1u);
    EXPECT_FALSE(r.log[0].discarded);
    EXPECT_GT(r.min_distance, 1e-3);
  }
  {
    const auto& fx = fig1_fixture();
    HermanSettings s;
    s.extra_seeds = {kX1, kX2};
    const SphereCloud pc = postcritical_cloud(fx.f, fx.cat, 10000);
    const auto r = interior_distance_test(fx.f, fx.g, fx.cat, pc, 4, 10000, 1, s);
    for (const auto& smp : r.log) EXPECT_FALSE(smp.discarded) << smp.reason;
    EXPECT_GT(r.min_distance, 1e-3);
  }
}

TEST(Herman, CapturedSampleIsDiscarded) {
  const auto& fx = fig1_fixture();
  HermanSettings s;
  // just off an attracting cycle point: outside the annulus
  s.extra_seeds = {SpherePoint(fx.cat.cycles[0].points[0].value() + cplx(1e-2, 0.0))};
  const SphereCloud pc = postcritical_cloud(fx.f, fx.cat, 2000);
  const auto r = interior_distance_test(fx.f, fx.g, fx.cat, pc, 0, 1000, 1, s);
  ASSERT_EQ(r.log.size(), 1u);
  EXPECT_TRUE(r.log[0].discarded);
  EXPECT_NE(r.log[0].reason.find("captured"), std::string::npos);
  EXPECT_TRUE(std::isinf(r.min_distance));
}

TEST(Herman, InvariancePassesOnWorkedExamples) {
  for (const Fixture* fx : {&fig1_fixture(), &fig2_fixture()}) {
    const auto r = invariance_checks(fx->f, fx->g, 1e-3);
    EXPECT_TRUE(r.f_pass);
    EXPECT_TRUE(r.phi_pass);
    EXPECT_EQ(r.samples, 64);
  }
}

TEST(Herman, InvarianceFailsOnCorruptedGeometry) {
  // "annulus" drawn around a point of an attracting 2-cycle: f carries it to
  // the other cycle point, so images leave the region
  const auto& fx = fig1_fixture();
  const SpherePoint p = fx.cat.cycles[0].points[0];
  const SphereRotation chart(p);
  RingGeometry g;
  for (int k = 0; k < 720; ++k) {
    const double th = 2.0 * std::numbers::pi * k / 720.0;
    g.boundary_a.push_back(chart.inverse(SpherePoint(std::polar(0.01, th))));
    g.boundary_b.push_back(chart.inverse(SpherePoint(std::polar(0.05, th))));
  }
  ASSERT_TRUE(detail::try_center(g, p, 0.5));
  g.valid = true;
  g.boundary_cloud.add_all(g.boundary_a);
  g.boundary_cloud.add_all(g.boundary_b);
  const auto r = invariance_checks(fx.f, g, 1e-4);
  EXPECT_FALSE(r.f_pass);
  EXPECT_GT(r.f_failures, 0);
}

TEST(Herman, SeparationFig1) {
  const auto& fx = fig1_fixture();
  const SeparationReport r = separation_report(fx.g, fx.cat);
  EXPECT_EQ(r.cycle_case, AntipodalCycleCase::disjoint_pair);
  EXPECT_TRUE(r.partner_cycles_separated);
  // one cycle inside the unit disk, its partner outside
  ASSERT_EQ(r.cycles.size(), 2u);
  EXPECT_EQ(r.cycles[0].inside_unit_disk + r.cycles[1].inside_unit_disk, 2);
}

TEST(Herman, SeparationFig4ContainsZeroAndInfinity) {
  const auto f = make_map(2.0, cplx(0.0, 2.3));
  const auto cat = build_basin_catalog(f);
  const RingGeometry g = boundary_curves(f, cat);
  ASSERT_TRUE(g.valid);
  const SeparationReport r = separation_report(g, cat);
  EXPECT_EQ(r.separation, Separation::contains_0_inf);
  // orbit of 0 stays in the ring
  SpherePoint z(0.0, 0.0);
  int inside = 0;
  for (int k = 0; k < 2000; ++k, z = f.eval(z)) inside += g.classify(z, 0.0) == RingSide::ring;
  EXPECT_GE(inside, 1990);
}

TEST(Herman, SeparationFig9CyclesStraddleUnitCircle) {
  const auto f = make_map(cplx(1.0, 0.4), 1.5);
  const auto cat = build_basin_catalog(f);
  ASSERT_EQ(cat.cycles.size(), 2u);
  const RingGeometry g = boundary_curves(f, cat);
  ASSERT_TRUE(g.valid);
  const SeparationReport r = separation_report(g, cat);
  std::vector<int> counts{r.cycles[0].inside_unit_disk, r.cycles[1].inside_unit_disk};
  std::sort(counts.begin(), counts.end());
  EXPECT_EQ(counts, (std::vector<int>{1, 2}));
  EXPECT_NE(r.mobius, MobiusReport::neither);
}

TEST(Herman, SelfAntipodalCycleHasEvenPeriod) {
  const auto f = make_map(0.0, cplx(0.0, 2.0));
  const auto cat = build_basin_catalog(f);
  ASSERT_EQ(cat.cycles.size(), 1u);
  EXPECT_TRUE(cat.self_antipodal(0));
  const SeparationReport r = separation_report(RingGeometry{}, cat);
  EXPECT_EQ(r.cycle_case, AntipodalCycleCase::self_antipodal);
  EXPECT_TRUE(r.self_antipodal_period_even);
}

TEST(Herman, RotationOfRigidRotation) {
  const double rho = (std::sqrt(5.0) - 1.0) / 2.0;
  const cplx step = std::polar(1.0, 2.0 * std::numbers::pi * rho);
  const auto est = estimate_rotation_number([&](const SpherePoint& z) { return SpherePoint(step * z.value()); },
                                            SphereRotation(SpherePoint(0.0, 0.0)), SpherePoint(0.5, 0.0), 100000,
                                            [](const SpherePoint&) { return true; });
  EXPECT_NEAR(est.rho, rho, 1e-6);
  EXPECT_LT(est.uncertainty, 1e-6);
  EXPECT_FALSE(near_small_rational(est.rho, 100, 1e-6));
}

TEST(Herman, RotationOfRationalRotationIsFlagged) {
  const cplx step = std::polar(1.0, 2.0 * std::numbers::pi * 0.375);
  const auto est = estimate_rotation_number([&](const SpherePoint& z) { return SpherePoint(step * z.value()); },
                                            SphereRotation(SpherePoint(0.0, 0.0)), SpherePoint(0.5, 0.0), 4000,
                                            [](const SpherePoint&) { return true; });
  EXPECT_NEAR(est.rho, 0.375, 1e-12);
  EXPECT_TRUE(near_small_rational(est.rho));
}

TEST(Herman, RotationEscapeThrows) {
  const auto f = fig1();
  const auto& fx = fig1_fixture();
  EXPECT_THROW(estimate_rotation_number(f, fx.g, fx.cat.cycles[0].points[0], 100), std::runtime_error);
}

TEST(Herman, RotationFig2IsIrrationalLookingAndEquivariant) {
  const auto& fx = fig2_fixture();
  const auto r0 = estimate_rotation_number(fx.f, fx.g, kX, 10000);
  const auto r1 = estimate_rotation_number(fx.f, fx.g, antipodal(kX), 10000);
  EXPECT_GT(r0.rho, 0.0);
  EXPECT_LT(r0.rho, 1.0);
  EXPECT_FALSE(near_small_rational(r0.rho, 100, 1e-6));
  double d = std::abs(r0.rho - r1.rho);
  d = std::min(d, 1.0 - d);
  EXPECT_LE(d, r0.uncertainty + r1.uncertainty + 1e-9);
}

TEST(Herman, RotationAgreesAcrossSeeds) {
  const auto& fx = fig1_fixture();
  const auto r0 = estimate_rotation_number(fx.f, fx.g, kX1, 10000);
  const auto r1 = estimate_rotation_number(fx.f, fx.g, kX2, 10000);
  double d = std::abs(r0.rho - r1.rho);
  d = std::min(d, 1.0 - d);
  EXPECT_LE(d, r0.uncertainty + r1.uncertainty + 1e-9);
}

TEST(Herman, EvidenceVerdicts) {
  HermanSettings s;
  s.extra_seeds = {kX};
  const auto r2 = gather_evidence(fig2(), s);
  expect_sound(r2);
  EXPECT_EQ(r2.verdict, Verdict::strong_evidence);
  EXPECT_TRUE(r2.catalog.cycles.empty());

  HermanSettings s1;
  s1.extra_seeds = {kX1, kX2};
  const auto r1 = gather_evidence(fig1(), s1);
  expect_sound(r1);
  EXPECT_EQ(r1.verdict, Verdict::strong_evidence);
  EXPECT_EQ(r1.catalog.cycles.size(), 2u);
  EXPECT_NE(r1.caveat().find("period <= 500"), std::string::npos);

  const auto r0 = gather_evidence(make_map(0.0, cplx(0.0, 0.5)));
  EXPECT_EQ(r0.verdict, Verdict::no_ring);
  EXPECT_EQ(r0.free_critical_pairs, 0);
}

TEST(Herman, ReportTextIsStable) {
  HermanSettings s;
  s.interior_samples = 2;
  s.interior_iterations = 2000;
  const auto a = to_key_value(gather_evidence(fig1(), s));
  const auto b = to_key_value(gather_evidence(fig1(), s));
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("verdict = "), std::string::npos);
  EXPECT_NE(a.find("conditional on no periodic orbit"), std::string::npos);
}
