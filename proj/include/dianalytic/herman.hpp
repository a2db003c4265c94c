#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dianalytic/catalog.hpp"
#include "dianalytic/cloud.hpp"
#include "dianalytic/dynamics.hpp"
#include "dianalytic/maps.hpp"
#include "dianalytic/sphere.hpp"

namespace dianalytic {

struct HermanSettings {
  DynamicsSettings dynamics;
  int boundary_transient = 2000;
  int boundary_samples = 8000;
  int nonperiodic_max_period = 500;
  double nonperiodic_tol = 1e-7;
  int interior_samples = 8;
  int interior_iterations = 10000;
  double delta = 1e-3;              // bounded-away threshold (chordal)
  double start_clearance = 1e-2;    // random interior starts keep this far from postcritical samples
  double membership_tol = 1e-3;     // closer than this to a boundary sample -> undetermined
  int invariance_samples = 64;
  int rotation_iterations = 10000;
  double max_angular_gap = 0.5;     // radians; larger gaps mean the curve does not surround the center
  std::vector<SpherePoint> extra_seeds;
  std::uint64_t seed = 1;
};

/// Star-shaped closed curve around the chart origin, from angle-sorted samples.
/// Radius along a ray is found by intersecting the ray with the polygon edge
/// spanning its angle.
class PolarCurve {
 public:
  PolarCurve() = default;
  explicit PolarCurve(const std::vector<cplx>& pts) {
    pts_.reserve(pts.size());
    for (const auto& w : pts) pts_.push_back({std::arg(w), w});
    std::sort(pts_.begin(), pts_.end(), [](const Vertex& a, const Vertex& b) { return a.theta < b.theta; });
    if (pts_.size() < 3) {
      max_gap_ = 2.0 * std::numbers::pi;
      return;
    }
    max_gap_ = pts_.front().theta + 2.0 * std::numbers::pi - pts_.back().theta;
    for (std::size_t i = 1; i < pts_.size(); ++i) max_gap_ = std::max(max_gap_, pts_[i].theta - pts_[i - 1].theta);
    std::size_t jumps = 0;
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      const double r0 = std::abs(pts_[i].w), r1 = std::abs(pts_[(i + 1) % pts_.size()].w);
      if (std::abs(r1 - r0) > 0.05 * std::min(r0, r1)) ++jumps;
    }
    roughness_ = static_cast<double>(jumps) / static_cast<double>(pts_.size());
  }

  double max_gap() const { return max_gap_; }
  /// Fraction of angular neighbours whose radii differ by more than 5%; large
  /// values mean the curve folds back and is not star-shaped about the origin.
  double roughness() const { return roughness_; }
  bool empty() const { return pts_.empty(); }

  double radius_at(double theta) const {
    if (pts_.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    auto it = std::upper_bound(pts_.begin(), pts_.end(), theta,
                               [](double t, const Vertex& v) { return t < v.theta; });
    const Vertex& hi = (it == pts_.end()) ? pts_.front() : *it;
    const Vertex& lo = (it == pts_.begin()) ? pts_.back() : *(it - 1);
    const cplx d = std::polar(1.0, theta);
    const cplx e = hi.w - lo.w;
    const double denom = d.real() * e.imag() - d.imag() * e.real();
    const double num = lo.w.real() * hi.w.imag() - lo.w.imag() * hi.w.real();
    if (denom == 0.0) return std::abs(lo.w);
    const double r = num / denom;
    return r > 0.0 ? r : std::min(std::abs(lo.w), std::abs(hi.w));
  }

  double median_radius() const {
    std::vector<double> r;
    r.reserve(pts_.size());
    for (const auto& v : pts_) r.push_back(std::abs(v.w));
    if (r.empty()) return 0.0;
    std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(r.size() / 2), r.end());
    return r[r.size() / 2];
  }

 private:
  struct Vertex {
    double theta;
    cplx w;
  };
  std::vector<Vertex> pts_;
  double max_gap_ = 0.0;
  double roughness_ = 1.0;
};

enum class RingSide { ring, inner_component, outer_component, undetermined };

inline const char* to_string(RingSide s) {
  switch (s) {
    case RingSide::ring: return "ring";
    case RingSide::inner_component: return "component-A";
    case RingSide::outer_component: return "component-B";
    case RingSide::undetermined: return "undetermined";
  }
  return "?";
}

/// Candidate annulus bounded by the orbit closures of one free critical pair.
/// Angles and radii are read in the rotated chart that sends `center` to 0
/// (and therefore phi(center) to infinity), where the inner boundary curve
/// surrounds 0 and the outer one surrounds the inner.
struct RingGeometry {
  bool valid = false;
  std::string note;
  int boundary_pair = -1;  // critical indices (boundary_pair, boundary_pair + 2)
  int interior_pair = -1;
  std::vector<SpherePoint> boundary_a, boundary_b;
  std::vector<std::vector<SpherePoint>> interior_curves;
  double antipodal_defect = 0.0;  // max_k chordal(boundary_b[k], phi(boundary_a[k]))
  SpherePoint center;
  std::string center_source;
  SphereRotation chart;
  PolarCurve inner, outer;
  bool a_is_inner = true;
  SphereCloud boundary_cloud{0.02};

  cplx chart_coord(const SpherePoint& z) const {
    const SpherePoint w = chart.apply(z);
    if (w.is_infinite()) return {HUGE_VAL, 0.0};
    return w.value();
  }

  /// Radial test only; no ambiguity band.
  bool in_ring(const SpherePoint& z) const {
    if (!valid) return false;
    const SpherePoint w = chart.apply(z);
    if (w.is_infinite()) return false;
    const cplx v = w.value();
    const double r = std::abs(v);
    if (r == 0.0) return false;
    const double th = std::arg(v);
    return r > inner.radius_at(th) && r < outer.radius_at(th);
  }

  RingSide classify(const SpherePoint& z, double tol) const {
    if (!valid) return RingSide::undetermined;
    if (tol > 0.0 && boundary_cloud.nearest(z) <= tol) return RingSide::undetermined;
    const SpherePoint w = chart.apply(z);
    if (w.is_infinite()) return RingSide::outer_component;
    const cplx v = w.value();
    const double r = std::abs(v);
    if (r == 0.0) return RingSide::inner_component;
    const double th = std::arg(v);
    if (r <= inner.radius_at(th)) return RingSide::inner_component;
    if (r >= outer.radius_at(th)) return RingSide::outer_component;
    return RingSide::ring;
  }

  /// Angle of z about the center, in [0, 2 pi).
  double angle(const SpherePoint& z) const {
    const SpherePoint w = chart.apply(z);
    if (w.is_infinite()) return 0.0;
    double a = std::arg(w.value());
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return a;
  }

  /// Radial position between the inner (0) and outer (1) curve.
  double radial_fraction(const SpherePoint& z) const {
    const SpherePoint w = chart.apply(z);
    if (w.is_infinite()) return 1.0;
    const double r = std::abs(w.value());
    const double th = std::arg(w.value());
    const double r0 = inner.radius_at(th), r1 = outer.radius_at(th);
    return std::clamp((r - r0) / (r1 - r0), 0.0, 1.0);
  }

  /// Point at angle theta, fraction t of the way from the inner to the outer curve.
  SpherePoint interior_point(double theta, double t) const {
    const double r0 = inner.radius_at(theta), r1 = outer.radius_at(theta);
    return chart.inverse(SpherePoint(std::polar(r0 + t * (r1 - r0), theta)));
  }
};

namespace detail {

template <class Map>
std::vector<SpherePoint> orbit_tail(const Map& f, const SpherePoint& c, int transient, int samples) {
  SpherePoint z = iterate_n(f, c, transient);
  std::vector<SpherePoint> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    z = f.eval(z);
    out.push_back(z);
  }
  return out;
}

inline std::optional<SpherePoint> mean_direction(const std::vector<SpherePoint>& pts) {
  std::array<double, 3> m{0.0, 0.0, 0.0};
  for (const auto& p : pts) {
    const auto v = to_unit_vector(p);
    for (int i = 0; i < 3; ++i) m[static_cast<std::size_t>(i)] += v[static_cast<std::size_t>(i)];
  }
  const double len = std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
  if (pts.empty() || len < 1e-3 * static_cast<double>(pts.size())) return std::nullopt;
  return from_unit_vector(m);
}

/// Tries `center` as the chart origin for the pair of curves (a, b).
inline bool try_center(RingGeometry& g, const SpherePoint& center, double max_gap) {
  const SphereRotation chart(center);
  std::vector<cplx> wa, wb;
  wa.reserve(g.boundary_a.size());
  wb.reserve(g.boundary_b.size());
  for (const auto& z : g.boundary_a) {
    const SpherePoint w = chart.apply(z);
    if (w.is_infinite() || w.value() == cplx(0.0, 0.0)) return false;
    wa.push_back(w.value());
  }
  for (const auto& z : g.boundary_b) {
    const SpherePoint w = chart.apply(z);
    if (w.is_infinite() || w.value() == cplx(0.0, 0.0)) return false;
    wb.push_back(w.value());
  }
  PolarCurve ca(wa), cb(wb);
  if (ca.max_gap() > max_gap || cb.max_gap() > max_gap) return false;
  if (ca.roughness() > 0.01 || cb.roughness() > 0.01) return false;
  const bool a_inner = ca.median_radius() < cb.median_radius();
  const PolarCurve& in = a_inner ? ca : cb;
  const PolarCurve& out = a_inner ? cb : ca;
  for (int k = 0; k < 720; ++k) {
    const double th = -std::numbers::pi + (k + 0.5) * std::numbers::pi / 360.0;
    if (!(in.radius_at(th) < out.radius_at(th))) return false;
  }
  g.center = center;
  g.chart = chart;
  g.a_is_inner = a_inner;
  g.inner = a_inner ? std::move(ca) : std::move(cb);
  g.outer = a_inner ? std::move(cb) : std::move(ca);
  return true;
}

inline std::vector<std::pair<SpherePoint, std::string>> center_candidates(const RingGeometry& g,
                                                                          const BasinCatalog& cat) {
  std::vector<std::pair<SpherePoint, std::string>> out;
  if (auto m = mean_direction(g.boundary_a)) {
    out.emplace_back(*m, "mean direction of boundary_a");
    out.emplace_back(antipodal(*m), "antipode of mean direction of boundary_a");
  }
  for (std::size_t i = 0; i < cat.cycles.size(); ++i) {
    for (std::size_t j = 0; j < cat.cycles[i].points.size(); ++j) {
      out.emplace_back(cat.cycles[i].points[j],
                       "catalog cycle " + std::to_string(i) + " point " + std::to_string(j));
    }
  }
  out.emplace_back(SpherePoint(0.0, 0.0), "zero");
  out.emplace_back(SpherePoint::infinity(), "infinity");
  // Fibonacci lattice as a last resort.
  const int n = 200;
  for (int k = 0; k < n; ++k) {
    const double zc = 1.0 - (2.0 * k + 1.0) / n;
    const double r = std::sqrt(1.0 - zc * zc);
    const double ph = k * std::numbers::pi * (3.0 - std::sqrt(5.0));
    out.emplace_back(from_unit_vector({r * std::cos(ph), r * std::sin(ph), zc}),
                     "lattice point " + std::to_string(k));
  }
  return out;
}

inline bool build_for_pair(RingGeometry& g, const BasinCatalog& cat, double max_gap) {
  for (const auto& [pt, name] : center_candidates(g, cat)) {
    if (try_center(g, pt, max_gap)) {
      g.center_source = name;
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Boundary extraction from the free critical orbits. With two free pairs the
/// pair whose curves enclose the other pair's orbits is the boundary.
template <class Map>
RingGeometry boundary_curves(const Map& f, const BasinCatalog& cat, const HermanSettings& s = {}) {
  RingGeometry best;
  const auto free = cat.free_pairs();
  if (free.empty()) {
    best.note = "all critical points attracted: no ring candidate";
    return best;
  }
  std::vector<RingGeometry> cands;
  for (int pair : free) {
    RingGeometry g;
    g.boundary_pair = pair;
    g.boundary_a = detail::orbit_tail(f, cat.critical[static_cast<std::size_t>(pair)], s.boundary_transient,
                                      s.boundary_samples);
    g.boundary_b = detail::orbit_tail(f, cat.critical[static_cast<std::size_t>(pair + 2)],
                                      s.boundary_transient, s.boundary_samples);
    for (std::size_t k = 0; k < g.boundary_a.size(); ++k) {
      g.antipodal_defect = std::max(g.antipodal_defect, chordal(g.boundary_b[k], antipodal(g.boundary_a[k])));
    }
    g.valid = detail::build_for_pair(g, cat, s.max_angular_gap);
    if (!g.valid) g.note = "free pair " + std::to_string(pair) + " does not bound an annulus";
    cands.push_back(std::move(g));
  }
  auto finalize = [](RingGeometry& g) {
    g.boundary_cloud.add_all(g.boundary_a);
    g.boundary_cloud.add_all(g.boundary_b);
  };
  if (cands.size() == 1) {
    best = std::move(cands.front());
    if (best.valid) finalize(best);
    return best;
  }
  // two free pairs: find the one whose annulus contains the other's orbits
  auto contains = [](const RingGeometry& outer, const RingGeometry& inner_pair) {
    if (!outer.valid) return false;
    std::size_t inside = 0, total = 0;
    for (const auto* curve : {&inner_pair.boundary_a, &inner_pair.boundary_b}) {
      for (std::size_t k = 0; k < curve->size(); k += 8) {
        ++total;
        if (outer.in_ring((*curve)[k])) ++inside;
      }
    }
    return total > 0 && inside >= static_cast<std::size_t>(0.99 * static_cast<double>(total));
  };
  for (int i = 0; i < 2; ++i) {
    RingGeometry& g = cands[static_cast<std::size_t>(i)];
    const RingGeometry& other = cands[static_cast<std::size_t>(1 - i)];
    if (contains(g, other)) {
      g.interior_pair = other.boundary_pair;
      g.interior_curves = {other.boundary_a, other.boundary_b};
      best = std::move(g);
      finalize(best);
      return best;
    }
  }
  const bool both_valid = cands[0].valid && cands[1].valid;
  for (auto& g : cands) {
    if (g.valid) {
      best = std::move(g);
      break;
    }
  }
  if (best.valid) {
    finalize(best);
    best.note = both_valid ? "two disjoint annulus candidates" : "second free pair unresolved";
  } else {
    best.note = "no free pair bounds an annulus";
  }
  return best;
}

/// True iff no recurrence of period <= max_period is found along `tail`
/// (checked over the final window of 3p iterates).
inline bool orbit_nonperiodic(std::span<const SpherePoint> tail, int max_period, double tol) {
  return find_period(tail, max_period, tol, [](int p) { return 3 * p; }) == 0;
}

/// Conditional on no periodic orbit of period <= max_period.
inline bool boundary_nonperiodicity(const RingGeometry& g, int max_period = 500, double tol = 1e-7) {
  if (g.boundary_a.empty() || g.boundary_b.empty()) return false;
  return orbit_nonperiodic(g.boundary_a, max_period, tol) && orbit_nonperiodic(g.boundary_b, max_period, tol);
}

/// Forward orbits (critical values onward) of the four critical points.
template <class Map>
SphereCloud postcritical_cloud(const Map& f, const BasinCatalog& cat, int length) {
  SphereCloud cloud(0.02);
  for (const auto& c : cat.critical) {
    SpherePoint z = c;
    for (int k = 0; k < length; ++k) {
      z = f.eval(z);
      cloud.add(z);
    }
  }
  return cloud;
}

struct InteriorSample {
  SpherePoint start;
  double min_distance = 0.0;
  bool seeded = false;  // supplied seed rather than random
  bool discarded = false;
  std::string reason;
};

struct InteriorDistanceResult {
  double min_distance = 0.0;  // over kept samples; +inf when none kept
  std::vector<InteriorSample> log;
};

template <class Map>
InteriorDistanceResult interior_distance_test(const Map& f, const RingGeometry& g, const BasinCatalog& cat,
                                              const SphereCloud& postcritical, int k_samples, int n_iter,
                                              std::uint64_t seed, const HermanSettings& s = {}) {
  InteriorDistanceResult res;
  res.min_distance = std::numeric_limits<double>::infinity();
  std::vector<InteriorSample> starts;
  for (const auto& z : s.extra_seeds) starts.push_back({z, 0.0, true, false, {}});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi), frac(0.15, 0.85);
  if (g.valid) {
    for (int i = 0; i < k_samples; ++i) {
      SpherePoint z;
      bool found = false;
      for (int attempt = 0; attempt < 200 && !found; ++attempt) {
        z = g.interior_point(angle(rng), frac(rng));
        found = postcritical.nearest(z) >= s.start_clearance;
      }
      if (!found) {
        res.log.push_back({z, 0.0, false, true, "no start clear of postcritical samples"});
        continue;
      }
      starts.push_back({z, 0.0, false, false, {}});
    }
  }
  std::vector<std::array<double, 3>> cycle_vecs;
  for (const auto& c : cat.cycles) {
    for (const auto& p : c.points) cycle_vecs.push_back(to_unit_vector(p));
  }
  for (auto& smp : starts) {
    if (!smp.seeded && g.valid && g.classify(smp.start, 0.0) != RingSide::ring) {
      smp.discarded = true;
      smp.reason = "start outside annulus";
      res.log.push_back(smp);
      continue;
    }
    SpherePoint z = smp.start;
    double md = postcritical.nearest(z);
    for (int k = 0; k < n_iter && !smp.discarded; ++k) {
      z = f.eval(z);
      const auto v = to_unit_vector(z);
      md = std::min(md, postcritical.nearest(v));
      for (const auto& c : cycle_vecs) {
        const double d = std::sqrt((c[0] - v[0]) * (c[0] - v[0]) + (c[1] - v[1]) * (c[1] - v[1]) +
                                   (c[2] - v[2]) * (c[2] - v[2]));
        if (d <= s.dynamics.capture_eps) {
          smp.discarded = true;
          smp.reason = "captured by catalog cycle after " + std::to_string(k + 1) + " iterates";
          break;
        }
      }
    }
    smp.min_distance = md;
    if (!smp.discarded) res.min_distance = std::min(res.min_distance, md);
    res.log.push_back(smp);
  }
  return res;
}

struct InvarianceResult {
  bool f_pass = false;
  bool phi_pass = false;
  int samples = 0;
  int f_failures = 0;
  int phi_failures = 0;
};

/// Images under f and under phi of interior samples must stay between the
/// boundary curves; points within `tol` of a boundary sample count as undetermined.
template <class Map>
InvarianceResult invariance_checks(const Map& f, const RingGeometry& g, double tol, int samples = 64,
                                   std::uint64_t seed = 7) {
  InvarianceResult r;
  if (!g.valid) return r;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi), frac(0.15, 0.85);
  for (int i = 0; i < samples; ++i) {
    const SpherePoint z = g.interior_point(angle(rng), frac(rng));
    ++r.samples;
    const RingSide fs = g.classify(f.eval(z), tol);
    const RingSide ps = g.classify(antipodal(z), tol);
    if (fs != RingSide::ring && fs != RingSide::undetermined) ++r.f_failures;
    if (ps != RingSide::ring && ps != RingSide::undetermined) ++r.phi_failures;
  }
  r.f_pass = r.samples > 0 && r.f_failures == 0;
  r.phi_pass = r.samples > 0 && r.phi_failures == 0;
  return r;
}

enum class Separation { separates_0_inf, contains_0_inf, undetermined };
enum class MobiusReport { crosses_unit_circle, contains_unit_circle, neither };
enum class AntipodalCycleCase { none, self_antipodal, disjoint_pair };

inline const char* to_string(Separation s) {
  switch (s) {
    case Separation::separates_0_inf: return "separates_0_inf";
    case Separation::contains_0_inf: return "contains_0_inf";
    case Separation::undetermined: return "undetermined";
  }
  return "?";
}
inline const char* to_string(MobiusReport m) {
  switch (m) {
    case MobiusReport::crosses_unit_circle: return "crosses_unit_circle";
    case MobiusReport::contains_unit_circle: return "contains_unit_circle";
    case MobiusReport::neither: return "neither";
  }
  return "?";
}
inline const char* to_string(AntipodalCycleCase c) {
  switch (c) {
    case AntipodalCycleCase::none: return "none";
    case AntipodalCycleCase::self_antipodal: return "self-antipodal";
    case AntipodalCycleCase::disjoint_pair: return "disjoint-pair";
  }
  return "?";
}

struct CyclePlacement {
  int cycle_id = -1;
  std::vector<RingSide> sides;
  int inside_unit_disk = 0;
};

struct SeparationReport {
  RingSide zero_side = RingSide::undetermined;
  RingSide infinity_side = RingSide::undetermined;
  Separation separation = Separation::undetermined;
  MobiusReport mobius = MobiusReport::neither;
  int unit_circle_samples = 0;
  int unit_circle_in_ring = 0;
  AntipodalCycleCase cycle_case = AntipodalCycleCase::none;
  bool self_antipodal_period_even = true;
  bool partner_cycles_separated = false;  // antipodal cycles lie in different complement components
  std::vector<CyclePlacement> cycles;
};

inline SeparationReport separation_report(const RingGeometry& g, const BasinCatalog& cat, double tol = 1e-3) {
  SeparationReport r;
  r.zero_side = g.classify(SpherePoint(0.0, 0.0), tol);
  r.infinity_side = g.classify(SpherePoint::infinity(), tol);
  const bool zero_comp = r.zero_side == RingSide::inner_component || r.zero_side == RingSide::outer_component;
  const bool inf_comp =
      r.infinity_side == RingSide::inner_component || r.infinity_side == RingSide::outer_component;
  if (zero_comp && inf_comp && r.zero_side != r.infinity_side) {
    r.separation = Separation::separates_0_inf;
  } else if (r.zero_side == RingSide::ring && r.infinity_side == RingSide::ring) {
    r.separation = Separation::contains_0_inf;
  }
  const int n = 720;
  for (int k = 0; k < n; ++k) {
    const SpherePoint z(std::polar(1.0, 2.0 * std::numbers::pi * k / n));
    ++r.unit_circle_samples;
    if (g.classify(z, 0.0) == RingSide::ring) ++r.unit_circle_in_ring;
  }
  if (g.valid) {
    if (r.unit_circle_in_ring == r.unit_circle_samples) {
      r.mobius = MobiusReport::contains_unit_circle;
    } else if (r.unit_circle_in_ring > 0) {
      r.mobius = MobiusReport::crosses_unit_circle;
    }
  }
  for (std::size_t i = 0; i < cat.cycles.size(); ++i) {
    CyclePlacement cp;
    cp.cycle_id = static_cast<int>(i);
    for (const auto& p : cat.cycles[i].points) {
      cp.sides.push_back(g.classify(p, tol));
      if (p.is_finite() && std::norm(p.value()) < 1.0) ++cp.inside_unit_disk;
    }
    r.cycles.push_back(std::move(cp));
  }
  if (!cat.cycles.empty()) {
    bool any_self = false;
    for (std::size_t i = 0; i < cat.cycles.size(); ++i) {
      if (cat.self_antipodal(static_cast<int>(i))) {
        any_self = true;
        if (cat.cycles[i].period % 2 != 0) r.self_antipodal_period_even = false;
      }
    }
    r.cycle_case = any_self ? AntipodalCycleCase::self_antipodal : AntipodalCycleCase::disjoint_pair;
    if (!any_self && cat.cycles.size() >= 2) {
      auto component_of = [](const CyclePlacement& cp) {
        RingSide s = cp.sides.empty() ? RingSide::undetermined : cp.sides.front();
        for (auto x : cp.sides) {
          if (x != s) return RingSide::undetermined;
        }
        return s;
      };
      const int j = cat.partner[0];
      if (j >= 0) {
        const RingSide s0 = component_of(r.cycles[0]);
        const RingSide s1 = component_of(r.cycles[static_cast<std::size_t>(j)]);
        r.partner_cycles_separated = (s0 == RingSide::inner_component || s0 == RingSide::outer_component) &&
                                     (s1 == RingSide::inner_component || s1 == RingSide::outer_component) &&
                                     s0 != s1;
      }
    }
  }
  return r;
}

struct RotationEstimate {
  double rho = 0.0;          // in [0, 1)
  double uncertainty = 0.0;
  long convergent_p = 0;     // closest-return approximation p/q
  long convergent_q = 0;
  int iterations = 0;
};

/// Rotation number from the unwrapped angle of an orbit about the chart
/// origin, cross-checked against the closest-return convergent. `step`
/// advances the orbit in the original coordinates; `inside` rejects escapes.
template <class Step, class Inside>
RotationEstimate estimate_rotation_number(Step step, const SphereRotation& chart, const SpherePoint& z0, int n,
                                          Inside inside) {
  if (n < 2) throw std::invalid_argument("estimate_rotation_number: need at least 2 iterates");
  std::vector<double> theta;
  std::vector<SpherePoint> orbit;
  theta.reserve(static_cast<std::size_t>(n) + 1);
  SpherePoint z = z0;
  for (int k = 0; k <= n; ++k) {
    if (!inside(z)) throw std::runtime_error("estimate_rotation_number: orbit left the ring");
    const SpherePoint w = chart.apply(z);
    if (w.is_infinite() || w.value() == cplx(0.0, 0.0)) {
      throw std::runtime_error("estimate_rotation_number: orbit hit the chart center");
    }
    theta.push_back(std::arg(w.value()));
    orbit.push_back(z);
    z = step(z);
  }
  const double two_pi = 2.0 * std::numbers::pi;
  cplx mean_dir(0.0, 0.0);
  for (std::size_t k = 1; k < theta.size(); ++k) mean_dir += std::polar(1.0, theta[k] - theta[k - 1]);
  const double center = std::arg(mean_dir);
  auto lift = [&](std::size_t upto) {
    double total = 0.0;
    for (std::size_t k = 1; k <= upto; ++k) {
      double d = theta[k] - theta[k - 1];
      d = center + std::remainder(d - center, two_pi);
      total += d;
    }
    return total / static_cast<double>(upto) / two_pi;
  };
  auto wrap01 = [](double x) {
    x -= std::floor(x);
    return x >= 1.0 ? 0.0 : x;
  };
  RotationEstimate est;
  est.iterations = n;
  est.rho = wrap01(lift(static_cast<std::size_t>(n)));
  const double half = wrap01(lift(static_cast<std::size_t>(n / 2)));
  double spread = std::abs(est.rho - half);
  spread = std::min(spread, 1.0 - spread);
  // closest returns of the angle to its start give convergent denominators
  double best = HUGE_VAL;
  for (std::size_t k = 1; k < theta.size(); ++k) {
    double d = std::abs(std::remainder(theta[k] - theta[0], two_pi));
    if (d < best) {
      best = d;
      est.convergent_q = static_cast<long>(k);
    }
  }
  if (est.convergent_q > 0) {
    est.convergent_p = std::lround(est.rho * static_cast<double>(est.convergent_q));
    const double conv = static_cast<double>(est.convergent_p) / static_cast<double>(est.convergent_q);
    spread = std::max(spread, std::abs(conv - est.rho));
  }
  est.uncertainty = std::max(spread, 1e-15);
  return est;
}

template <class Map>
RotationEstimate estimate_rotation_number(const Map& f, const RingGeometry& g, const SpherePoint& z0, int n) {
  if (!g.valid) throw std::runtime_error("estimate_rotation_number: no ring geometry");
  return estimate_rotation_number([&f](const SpherePoint& z) { return f.eval(z); }, g.chart, z0, n,
                                  [&g](const SpherePoint& z) { return g.classify(z, 0.0) == RingSide::ring; });
}

/// true when some p/q with q <= q_max lies within tol of rho.
inline bool near_small_rational(double rho, int q_max = 100, double tol = 1e-6) {
  for (int q = 1; q <= q_max; ++q) {
    const double p = std::round(rho * q);
    if (std::abs(rho - p / q) <= tol) return true;
  }
  return false;
}

enum class Verdict { strong_evidence, weak_evidence, no_ring };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::strong_evidence: return "strong-evidence";
    case Verdict::weak_evidence: return "weak-evidence";
    case Verdict::no_ring: return "no-ring";
  }
  return "?";
}

struct HermanEvidenceReport {
  MapParams params;
  int free_critical_pairs = 0;
  int boundary_pair = -1;
  int interior_pair = -1;
  bool geometry_valid = false;
  std::string geometry_note;
  std::string center_source;
  double boundary_antipodal_defect = 0.0;
  bool boundary_nonperiodic = false;
  int max_period_tested = 0;
  double interior_min_distance = 0.0;
  double delta = 0.0;
  std::vector<InteriorSample> interior_log;
  bool f_invariance_pass = false;
  bool phi_invariance_pass = false;
  SeparationReport separation;
  std::optional<RotationEstimate> rotation;
  bool rotation_near_small_rational = false;
  int ring_candidates = 0;
  Verdict verdict = Verdict::no_ring;
  std::vector<std::string> notes;
  BasinCatalog catalog;

  std::string caveat() const {
    return "ring evidence conditional on no periodic orbit of period <= " + std::to_string(max_period_tested) +
           " tested";
  }
};

/// Full evidence chain for one map. Every failure degrades the verdict.
inline HermanEvidenceReport gather_evidence(const DianalyticCubic& f, const HermanSettings& s = {}) {
  HermanEvidenceReport rep;
  rep.params = f.params();
  rep.delta = s.delta;
  rep.max_period_tested = s.nonperiodic_max_period;
  rep.catalog = build_basin_catalog(f, s.dynamics);
  rep.free_critical_pairs = static_cast<int>(rep.catalog.free_pairs().size());
  rep.notes.push_back(
      "degree 3 admits at most one forward-invariant Herman ring; at most one ring candidate is reported");
  rep.notes.push_back("attraction test: log-sum of spherical derivatives is a reconstruction, not a published "
                      "specification");
  if (rep.free_critical_pairs == 0) {
    rep.geometry_note = "all critical points attracted";
    rep.verdict = Verdict::no_ring;
    return rep;
  }
  const RingGeometry g = boundary_curves(f, rep.catalog, s);
  rep.geometry_valid = g.valid;
  rep.geometry_note = g.note;
  rep.boundary_pair = g.boundary_pair;
  rep.interior_pair = g.interior_pair;
  rep.center_source = g.center_source;
  rep.boundary_antipodal_defect = g.antipodal_defect;
  rep.ring_candidates = g.valid ? 1 : 0;
  if (!g.valid) {
    rep.verdict = Verdict::no_ring;
    return rep;
  }
  rep.boundary_nonperiodic = boundary_nonperiodicity(g, s.nonperiodic_max_period, s.nonperiodic_tol);
  const SphereCloud post = postcritical_cloud(f, rep.catalog, s.boundary_transient + s.boundary_samples);
  const auto idt =
      interior_distance_test(f, g, rep.catalog, post, s.interior_samples, s.interior_iterations, s.seed, s);
  rep.interior_min_distance = idt.min_distance;
  rep.interior_log = idt.log;
  const auto inv = invariance_checks(f, g, s.membership_tol, s.invariance_samples, s.seed + 1);
  rep.f_invariance_pass = inv.f_pass;
  rep.phi_invariance_pass = inv.phi_pass;
  rep.separation = separation_report(g, rep.catalog, s.membership_tol);
  for (const auto& smp : idt.log) {
    if (smp.discarded) continue;
    try {
      rep.rotation = estimate_rotation_number(f, g, smp.start, s.rotation_iterations);
      rep.rotation_near_small_rational = near_small_rational(rep.rotation->rho);
      break;
    } catch (const std::runtime_error&) {
    }
  }
  const bool two_annuli = g.note == "two disjoint annulus candidates";
  if (two_annuli) {
    rep.ring_candidates = 2;
    rep.notes.push_back("two disjoint free-pair annuli detected; degree 3 allows at most one Herman ring");
  }
  const bool interior_ok = std::isfinite(rep.interior_min_distance) && rep.interior_min_distance > s.delta;
  if (rep.boundary_nonperiodic && interior_ok && rep.f_invariance_pass && rep.phi_invariance_pass && !two_annuli) {
    rep.verdict = Verdict::strong_evidence;
  } else {
    rep.verdict = Verdict::weak_evidence;
  }
  return rep;
}

inline std::string format_point(const SpherePoint& z) {
  if (z.is_infinite()) return "inf";
  std::ostringstream os;
  os.precision(12);
  os << z.value().real() << (z.value().imag() < 0 ? "" : "+") << z.value().imag() << "i";
  return os.str();
}

/// Machine-readable key = value document.
inline std::string to_key_value(const HermanEvidenceReport& r) {
  std::ostringstream os;
  os.precision(12);
  os << "a = " << format_point(SpherePoint(r.params.a)) << "\n";
  os << "b = " << format_point(SpherePoint(r.params.b)) << "\n";
  os << "verdict = " << to_string(r.verdict) << "\n";
  os << "caveat = " << r.caveat() << "\n";
  os << "free_critical_pairs = " << r.free_critical_pairs << "\n";
  os << "catalog_cycles = " << r.catalog.cycles.size() << "\n";
  for (std::size_t i = 0; i < r.catalog.cycles.size(); ++i) {
    const auto& c = r.catalog.cycles[i];
    os << "cycle." << i << ".period = " << c.period << "\n";
    os << "cycle." << i << ".multiplier_abs = " << std::abs(c.multiplier) << "\n";
    os << "cycle." << i << ".class = " << to_string(c.cls) << "\n";
    os << "cycle." << i << ".partner = " << r.catalog.partner[i] << "\n";
  }
  os << "geometry_valid = " << (r.geometry_valid ? "true" : "false") << "\n";
  os << "geometry_note = " << r.geometry_note << "\n";
  os << "boundary_pair = " << r.boundary_pair << "\n";
  os << "interior_pair = " << r.interior_pair << "\n";
  os << "center_source = " << r.center_source << "\n";
  os << "boundary_antipodal_defect = " << r.boundary_antipodal_defect << "\n";
  os << "boundary_nonperiodic = " << (r.boundary_nonperiodic ? "true" : "false") << "\n";
  os << "max_period_tested = " << r.max_period_tested << "\n";
  os << "interior_min_distance = " << r.interior_min_distance << "\n";
  os << "delta = " << r.delta << "\n";
  for (std::size_t i = 0; i < r.interior_log.size(); ++i) {
    const auto& s = r.interior_log[i];
    os << "interior." << i << ".start = " << format_point(s.start) << "\n";
    os << "interior." << i << ".seeded = " << (s.seeded ? "true" : "false") << "\n";
    os << "interior." << i << ".min_distance = " << s.min_distance << "\n";
    os << "interior." << i << ".discarded = " << (s.discarded ? "true" : "false") << "\n";
    if (!s.reason.empty()) os << "interior." << i << ".reason = " << s.reason << "\n";
  }
  os << "f_invariance_pass = " << (r.f_invariance_pass ? "true" : "false") << "\n";
  os << "phi_invariance_pass = " << (r.phi_invariance_pass ? "true" : "false") << "\n";
  os << "zero_side = " << to_string(r.separation.zero_side) << "\n";
  os << "infinity_side = " << to_string(r.separation.infinity_side) << "\n";
  os << "separation = " << to_string(r.separation.separation) << "\n";
  os << "mobius = " << to_string(r.separation.mobius) << "\n";
  os << "unit_circle_in_ring = " << r.separation.unit_circle_in_ring << "/" << r.separation.unit_circle_samples
     << "\n";
  os << "antipodal_cycle_case = " << to_string(r.separation.cycle_case) << "\n";
  os << "partner_cycles_separated = " << (r.separation.partner_cycles_separated ? "true" : "false") << "\n";
  for (const auto& cp : r.separation.cycles) {
    os << "cycle." << cp.cycle_id << ".inside_unit_disk = " << cp.inside_unit_disk << "\n";
    os << "cycle." << cp.cycle_id << ".sides =";
    for (auto s : cp.sides) os << " " << to_string(s);
    os << "\n";
  }
  if (r.rotation) {
    os << "rotation_number = " << r.rotation->rho << "\n";
    os << "rotation_uncertainty = " << r.rotation->uncertainty << "\n";
    os << "rotation_convergent = " << r.rotation->convergent_p << "/" << r.rotation->convergent_q << "\n";
    os << "rotation_near_small_rational = " << (r.rotation_near_small_rational ? "true" : "false") << "\n";
  }
  os << "ring_candidates = " << r.ring_candidates << "\n";
  for (std::size_t i = 0; i < r.notes.size(); ++i) os << "note." << i << " = " << r.notes[i] << "\n";
  return os.str();
}

inline std::string summary(const HermanEvidenceReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "f_{" << format_point(SpherePoint(r.params.a)) << ", " << format_point(SpherePoint(r.params.b)) << "}: "
     << to_string(r.verdict) << "\n";
  os << "  attracting cycles: " << r.catalog.cycles.size() << ", free critical pairs: " << r.free_critical_pairs
     << "\n";
  if (r.geometry_valid) {
    os << "  annulus from critical pair " << r.boundary_pair << " (center: " << r.center_source << ")\n";
    os << "  boundary non-periodic up to period " << r.max_period_tested << ": "
       << (r.boundary_nonperiodic ? "yes" : "no") << "\n";
    os << "  interior orbits min distance to postcritical samples: " << r.interior_min_distance
       << " (threshold " << r.delta << ")\n";
    os << "  f(H) in H: " << (r.f_invariance_pass ? "yes" : "no")
       << ", phi(H) in H: " << (r.phi_invariance_pass ? "yes" : "no") << "\n";
    os << "  separation: " << to_string(r.separation.separation) << ", unit circle: "
       << to_string(r.separation.mobius) << "\n";
    if (r.rotation) os << "  rotation number ~ " << r.rotation->rho << " +/- " << r.rotation->uncertainty << "\n";
  } else {
    os << "  " << r.geometry_note << "\n";
  }
  os << "  " << r.caveat() << "\n";
  return os.str();
}

}  // namespace dianalytic
