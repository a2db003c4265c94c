// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "dianalytic/dianalytic.hpp"
#include "oracles.hpp"

using namespace dianalytic;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double t = seconds_since(t0);
  if (!o.pass) ++failures;
  std::printf("%s C%d %s (%.3f s)%s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), t, o.detail.str().c_str());
  std::fflush(stdout);
}

double dist(const SpherePoint& z, cplx w) { return std::abs(z.value() - w); }

double set_distance(const std::vector<SpherePoint>& pts, const std::vector<cplx>& want) {
  std::vector<cplx> got;
  for (const auto& p : pts) got.push_back(p.value());
  return oracle::match_sets(got, want);
}

std::vector<MapParams> random_params(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<MapParams> out;
  while (static_cast<int>(out.size()) < n) {
    const MapParams p{cplx(u(rng), u(rng)), cplx(u(rng), u(rng))};
    if (std::abs(p.a) < 0.05 || std::abs(p.b) < 0.05) continue;
    out.push_back(p);
  }
  return out;
}

int attracting_count(const BasinCatalog& cat, int period) {
  int n = 0;
  for (const auto& c : cat.cycles) n += (c.period == period && c.cls.attracting()) ? 1 : 0;
  return n;
}

// Smallest period among attracting catalog cycles, 0 when none.
int min_attracting_period(const BasinCatalog& cat) {
  int p = 0;
  for (const auto& c : cat.cycles) {
    if (c.cls.attracting() && (p == 0 || c.period < p)) p = c.period;
  }
  return p;
}

bool tail_in_ring(const RingGeometry& g, const std::vector<SpherePoint>& pts, double fraction) {
  std::size_t in = 0;
  for (const auto& z : pts) in += g.in_ring(z) ? 1 : 0;
  return static_cast<double>(in) >= fraction * static_cast<double>(pts.size());
}

}  // namespace

int main() {
  const cplx kC1(-0.690012, 1.97138), kC2(1.24652, -0.4363);
  const cplx kF2C1(-1.04445, 1.86507), kF2C2(1.3711, -0.767825);
  const std::vector<cplx> kCycle{{-0.0740296, -1.51629}, {1.18601, -0.262465}};
  const SpherePoint kX(0.152142, 0.00815055);

  criterion(1, "critical points of f_{1.9,1.5i}", [&](Outcome& o) {
    const auto f = make_map(1.9, cplx(0.0, 1.5));
    const auto t0 = Clock::now();
    const auto crit = critical_points(f);
    const double t = seconds_since(t0);
    const double err = std::max({dist(crit[0], kC1), dist(crit[1], kC2), dist(crit[2], oracle::phi(kC1)),
                                 dist(crit[3], oracle::phi(kC2))});
    o.detail << " max error " << err << ", call " << t * 1e3 << " ms";
    o.require(err <= 1e-4, "within 1e-4");
    o.require(t < 1e-3, "runtime < 1 ms");
  });

  criterion(2, "antipodal attracting 2-cycles of f_{1.9,1.5i}", [&](Outcome& o) {
    const auto t0 = Clock::now();
    const auto cat = build_basin_catalog(make_map(1.9, cplx(0.0, 1.5)));
    const double t = seconds_since(t0);
    o.require(cat.cycles.size() == 2 && attracting_count(cat, 2) == 2, "two attracting 2-cycles");
    if (cat.cycles.size() != 2) return;
    o.require(cat.partner[0] == 1 && cat.partner[1] == 0, "cycles are antipodal partners");
    std::vector<cplx> antipodes{oracle::phi(kCycle[0]), oracle::phi(kCycle[1])};
    const double e0 = std::min(set_distance(cat.cycles[0].points, kCycle), set_distance(cat.cycles[0].points, antipodes));
    const double e1 = std::min(set_distance(cat.cycles[1].points, kCycle), set_distance(cat.cycles[1].points, antipodes));
    const double m0 = std::abs(cat.cycles[0].multiplier), m1 = std::abs(cat.cycles[1].multiplier);
    o.detail << " point error " << std::max(e0, e1) << ", |lambda| " << m0 << " / " << m1 << ", catalog " << t * 1e3
             << " ms";
    o.require(std::max(e0, e1) <= 1e-4, "cycle points within 1e-4");
    o.require(std::abs(m0 - 0.5277) <= 5e-3, "|lambda| = 0.5277 +- 5e-3");
    o.require(std::abs(m0 - m1) <= 1e-10, "equal |lambda|");
    o.require(t < 0.1, "runtime < 0.1 s");
  });

  criterion(3, "ring-only example f_{1.8,2i}", [&](Outcome& o) {
    const auto f = make_map(1.8, cplx(0.0, 2.0));
    const auto crit = critical_points(f);
    const double err = std::max(dist(crit[0], kF2C1), dist(crit[1], kF2C2));
    o.require(err <= 1e-4, "critical points within 1e-4");
    DynamicsSettings s;
    s.max_period = 50;
    s.iteration_cap = 20000;
    int detected = 0;
    for (const auto& c : crit) detected += converge_to_cycle(f, c, s).has_value() ? 1 : 0;
    o.require(detected == 0, "no cycle of period <= 50 from critical seeds");
    HermanSettings hs;
    hs.extra_seeds = {kX};
    const auto rep = gather_evidence(f, hs);
    double seed_distance = -1.0;
    bool seed_kept = false;
    for (const auto& smp : rep.interior_log) {
      if (smp.seeded) {
        seed_distance = smp.min_distance;
        seed_kept = !smp.discarded;
      }
    }
    o.detail << " crit error " << err << ", verdict " << to_string(rep.verdict) << ", seed min distance "
             << seed_distance << " over " << hs.interior_iterations << " iterates";
    o.require(rep.verdict == Verdict::strong_evidence, "strong-evidence");
    o.require(seed_kept && seed_distance >= 1e-3, "seed stays >= 1e-3 from postcritical samples");
    o.require(hs.interior_iterations >= 10000, "10^4 iterations");
  });

  criterion(4, "higher-period examples (two 3-cycles, two 6-cycles)", [&](Outcome& o) {
    auto t0 = Clock::now();
    const auto c3 = build_basin_catalog(make_map(cplx(1.0, 0.4), 1.5));
    const double t3 = seconds_since(t0);
    t0 = Clock::now();
    const auto c6 = build_basin_catalog(make_map(2.606, cplx(0.0, 1.507)));
    const double t6 = seconds_since(t0);
    o.detail << " f_{1+0.4i,1.5}: " << attracting_count(c3, 3) << " attracting 3-cycles (" << t3
             << " s); f_{2.606,1.507i}: " << attracting_count(c6, 6) << " attracting 6-cycles (" << t6 << " s)";
    o.require(c3.cycles.size() == 2 && attracting_count(c3, 3) == 2, "two attracting 3-cycles");
    o.require(c6.cycles.size() == 2 && attracting_count(c6, 6) == 2, "two attracting 6-cycles");
    o.require(t3 < 10.0 && t6 < 10.0, "runtime < 10 s each");
  });

  criterion(5, "imaginary-axis bifurcations on a = 0", [&](Outcome& o) {
    const auto t0 = Clock::now();
    double last_p1 = -1.0, first_p2 = -1.0, last_disjoint = -1.0, first_self = -1.0;
    bool self_persists = true;
    for (int k = 1; k <= 300; ++k) {
      const double beta = 0.01 * k;
      const auto cat = build_basin_catalog(make_map(0.0, cplx(0.0, beta)));
      const int p = min_attracting_period(cat);
      if (p == 1 && first_p2 < 0.0) last_p1 = beta;
      if (p == 2 && first_p2 < 0.0) first_p2 = beta;
      bool self = false;
      for (std::size_t i = 0; i < cat.cycles.size(); ++i) self = self || cat.self_antipodal(static_cast<int>(i));
      if (self && first_self < 0.0) first_self = beta;
      if (!self && first_self < 0.0 && p == 2) last_disjoint = beta;
      if (!self && first_self > 0.0) self_persists = false;
    }
    const double t = seconds_since(t0);
    const double r2 = std::sqrt(0.5), s2 = std::sqrt(2.0);
    o.detail << " period 1 up to beta " << last_p1 << ", period 2 from " << first_p2 << "; disjoint pair up to "
             << last_disjoint << ", self-antipodal from " << first_self;
    o.require(last_p1 < r2 && first_p2 > r2 && first_p2 - last_p1 <= 0.01 + 1e-9, "1 -> 2 brackets 1/sqrt(2)");
    o.require(last_disjoint < s2 && first_self > s2 && first_self - last_disjoint <= 0.01 + 1e-9,
              "B = phi(B) onset brackets sqrt(2)");
    o.require(self_persists, "collapse regime persists to beta = 3");
    o.require(t < 60.0, "runtime < 1 min");
  });

  criterion(6, "four-quadrant parameter symmetry, 120x120 over [-3,3]^2", [&](Outcome& o) {
    const auto t0 = Clock::now();
    const ParamGrid g = scan(ParamRegion{-3.0, 3.0, -3.0, 3.0, 120, 120}, Algorithm::convergence);
    const auto rep = symmetry_check(g);
    const double t = seconds_since(t0);
    o.detail << " " << rep.mismatches.size() << " mismatches over " << rep.cells_compared
             << " compared cells; spot checks " << g.spot_checks() << " (failures " << g.spot_check_failures()
             << ")";
    o.require(rep.mismatches.empty(), "zero mismatches");
    o.require(t < 600.0, "runtime < 10 min");
  });

  criterion(7, "algorithm disagreement near (4.167, 4.06)", [&](Outcome& o) {
    const ParamRegion region{4.157, 4.177, 4.05, 4.07, 21, 21};
    auto count = [&](double tol, std::vector<Disagreement>* out) {
      ScanSettings s;
      s.dynamics.cycle_tol = tol;
      const ParamGrid g = scan(region, Algorithm::both, s);
      int hits = 0;
      for (const auto& d : disagreements(g)) {
        if (d.derivative.kind == CategoryKind::none_attracted && d.convergence_max_period == 13) {
          ++hits;
          if (out) out->push_back(d);
        }
      }
      return hits;
    };
    std::vector<Disagreement> found;
    const int coarse = count(1e-4, &found);
    const int strict = count(1e-7, nullptr);
    o.detail << " period-13 vs NoneAttracted cells: " << coarse << " at tol 1e-4, " << strict << " at tol 1e-7";
    if (!found.empty()) {
      o.detail << "; e.g. (a, beta) = (" << found.front().a << ", " << found.front().beta << ") convergence "
               << to_string(found.front().convergence) << " derivative " << to_string(found.front().derivative);
    }
    o.require(coarse >= 1, "at least one disagreement cell");
  });

  criterion(8, "property suites", [&](Outcome& o) {
    const auto maps = random_params(50, 2024);
    double comm = 0.0, closure = 0.0, mult = 0.0, fd = 0.0;
    int k = 0;
    for (const auto& p : maps) {
      const auto f = make_map(p);
      comm = std::max(comm, commutation_residual(f, 1000, static_cast<std::uint64_t>(++k)));
      const auto crit = critical_points(f);
      closure = std::max({closure, chordal(antipodal(crit[0]), crit[2]), chordal(antipodal(crit[1]), crit[3])});
      const auto fps = fixed_points(f);
      for (const auto& a : fps) {
        double best = HUGE_VAL;
        cplx m;
        for (const auto& b : fps) {
          if (chordal(b.point, antipodal(a.point)) < best) {
            best = chordal(b.point, antipodal(a.point));
            m = b.multiplier;
          }
        }
        closure = std::max(closure, best);
        mult = std::max(mult, std::abs(m - std::conj(a.multiplier)) / std::max(1.0, std::abs(m)));
      }
      std::mt19937_64 rng(static_cast<std::uint64_t>(k));
      std::uniform_real_distribution<double> u(-2.0, 2.0);
      const double h = 1e-6;
      for (int i = 0; i < 100; ++i) {
        const cplx z(u(rng), u(rng));
        const cplx ref = (oracle::f_direct(p.a, p.b, z + h) - oracle::f_direct(p.a, p.b, z - h)) / (2.0 * h);
        const cplx d = f.deriv(z);
        fd = std::max(fd, std::abs(d - ref) / std::max(std::abs(d), 1e-3));
      }
    }
    double iso = 0.0;
    {
      std::mt19937_64 rng(99);
      std::normal_distribution<double> n(0.0, 1.0);
      for (int i = 0; i < 10000; ++i) {
        const SpherePoint z(n(rng) * 3.0, n(rng) * 3.0), w(n(rng) * 3.0, n(rng) * 3.0);
        iso = std::max(iso, std::abs(chordal(antipodal(z), antipodal(w)) - chordal(z, w)));
      }
    }
    const double rho = (std::sqrt(5.0) - 1.0) / 2.0;
    const cplx step = std::polar(1.0, 2.0 * std::numbers::pi * rho);
    const auto est = estimate_rotation_number([&](const SpherePoint& z) { return SpherePoint(step * z.value()); },
                                              SphereRotation(SpherePoint(0.0, 0.0)), SpherePoint(0.7, 0.0), 100000,
                                              [](const SpherePoint&) { return true; });
    const auto f = make_map(1.9, cplx(0.0, 1.5));
    RenderSettings one, many;
    one.threads = 1;
    many.threads = 4;
    const Viewport vp({0.0, 0.0}, 4.0, 64, 64);
    const PlaneContext ctx = make_plane_context(f, one);
    const Image i1 = to_image(render_plane(f, vp, ctx, one));
    const Image i2 = to_image(render_plane(f, vp, ctx, many));
    o.detail << " commutation " << comm << ", closure " << closure << ", conj multipliers " << mult
             << ", finite differences " << fd << ", isometry " << iso << ", rho error " << std::abs(est.rho - rho)
             << ", render bytes " << (i1.data == i2.data ? "identical" : "differ");
    o.require(comm < 1e-10, "commutation < 1e-10");
    o.require(closure <= 1e-8 && mult <= 1e-8, "phi-closed sets, conjugate multipliers");
    o.require(fd <= 1e-5, "derivative vs finite differences");
    o.require(iso <= 1e-12, "chordal isometry");
    o.require(std::abs(est.rho - rho) <= 1e-6, "rigid rotation recovered");
    o.require(i1.data == i2.data, "render determinism across threads");
  });

  criterion(9, "figure structure (Figs 1, 2, 4, 9, 10)", [&](Outcome& o) {
    const Viewport vp({0.0, 0.0}, 4.0, 120, 120);
    const RenderSettings s;
    const double total = 120.0 * 120.0;
    auto render = [&](const DianalyticCubic& f) { return render_plane(f, vp, s); };

    {  // Fig 1
      const auto f = make_map(1.9, cplx(0.0, 1.5));
      const PlaneGrid g = render(f);
      const bool ok_basins = g.catalog.cycles.size() == 2 && g.count(PixelTag::basin, 0) > 0 &&
                             g.count(PixelTag::basin, 1) > 0;
      const bool ring = g.ring.has_value() && g.count(PixelTag::ring_like) > 0.05 * total;
      const auto sep = ring ? separation_report(*g.ring, g.catalog) : SeparationReport{};
      int free_curves = 0;
      const auto ov = postcritical_overlay(f, 10000);
      for (const auto& orbit : ov) {
        std::vector<SpherePoint> tail(orbit.end() - 3000, orbit.end());
        free_curves += orbit_nonperiodic(tail, 500, 1e-7) ? 1 : 0;
      }
      o.detail << " fig1: basins " << g.count(PixelTag::basin, 0) << "/" << g.count(PixelTag::basin, 1) << ", ring "
               << g.count(PixelTag::ring_like) << ", free overlay curves " << free_curves << ";";
      o.require(ok_basins, "fig1 two non-empty basins");
      o.require(ring && sep.partner_cycles_separated, "fig1 ring band separates the basins");
      o.require(free_curves == 2, "fig1 two boundary curves");
    }
    {  // Fig 2
      const auto f = make_map(1.8, cplx(0.0, 2.0));
      const PlaneGrid g = render(f);
      bool overlay_ok = false;
      if (g.ring) {
        const auto ov = postcritical_overlay(f, 10000);
        const int inner = g.ring->interior_pair;
        overlay_ok = g.ring->boundary_pair == 0 && inner == 1 &&
                     tail_in_ring(*g.ring, {ov[1].begin() + 2000, ov[1].end()}, 0.99) &&
                     tail_in_ring(*g.ring, {ov[3].begin() + 2000, ov[3].end()}, 0.99);
      }
      o.detail << " fig2: basins " << g.count(PixelTag::basin) << ", ring " << g.count(PixelTag::ring_like) << ";";
      o.require(g.count(PixelTag::basin) == 0, "fig2 no basin pixels");
      o.require(g.ring.has_value() && g.count(PixelTag::ring_like) > 0.5 * total, "fig2 ring majority");
      o.require(overlay_ok, "fig2 two overlay curves inside the ring, two on the boundary");
    }
    {  // Fig 4
      const auto f = make_map(2.0, cplx(0.0, 2.3));
      const PlaneGrid g = render(f);
      bool zero_inside = false, contains = false;
      if (g.ring) {
        const auto orbit = iterate(f, SpherePoint(0.0, 0.0), 5000).points;
        zero_inside = tail_in_ring(*g.ring, orbit, 0.99);
        contains = separation_report(*g.ring, g.catalog).separation == Separation::contains_0_inf;
      }
      o.detail << " fig4: ring " << g.count(PixelTag::ring_like) << ";";
      o.require(g.ring.has_value() && g.count(PixelTag::ring_like) > 0.5 * total, "fig4 ring band");
      o.require(zero_inside && contains, "fig4 orbit of 0 between the boundary curves");
    }
    for (const auto& [name, p, period] :
         std::vector<std::tuple<std::string, MapParams, int>>{{"fig9", {cplx(1.0, 0.4), 1.5}, 3},
                                                              {"fig10", {2.606, cplx(0.0, 1.507)}, 6}}) {
      const PlaneGrid g = render(make_map(p));
      const bool basins = attracting_count(g.catalog, period) == 2 && g.count(PixelTag::basin, 0) > 0 &&
                          g.count(PixelTag::basin, 1) > 0;
      o.detail << " " << name << ": basins " << g.count(PixelTag::basin, 0) << "/" << g.count(PixelTag::basin, 1)
               << ", ring " << g.count(PixelTag::ring_like) << ";";
      o.require(basins, name + " two period-" + std::to_string(period) + " basins");
      o.require(g.ring.has_value() && g.count(PixelTag::ring_like) > 0.05 * total, name + " ring band");
    }
  });

  std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
