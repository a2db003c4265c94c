#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dianalytic/polynomial.hpp"
#include "dianalytic/sphere.hpp"

namespace dianalytic {

/// Raised for parameters outside the family or degree-dropping (degenerate) maps.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rational map P/Q of the sphere, evaluated in two charts: z when |z| <= 1
/// and u = 1/z otherwise, where the map is rev(P)/rev(Q).
class RationalMap {
 public:
  RationalMap() = default;
  RationalMap(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
    const int dn = num_.degree(), dd = den_.degree();
    if (dn < 0 || dd < 0) throw ParameterError("RationalMap: zero numerator or denominator");
    degree_ = std::max(dn, dd);
    num_rev_ = num_.reversed(static_cast<std::size_t>(degree_));
    den_rev_ = den_.reversed(static_cast<std::size_t>(degree_));
    dnum_ = num_.derivative() * den_ - num_ * den_.derivative();
    dnum_rev_ = num_rev_.derivative() * den_rev_ - num_rev_ * den_rev_.derivative();
  }

  int degree() const { return degree_; }
  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }
  /// Numerator of f' = (P'Q - PQ')/Q^2, untrimmed.
  const Polynomial& dnum() const { return dnum_; }

  SpherePoint eval(const SpherePoint& z) const {
    const Local l = local(z);
    if (l.d == cplx(0.0, 0.0)) return SpherePoint::infinity();
    return SpherePoint(l.n / l.d);
  }
  SpherePoint operator()(const SpherePoint& z) const { return eval(z); }

  /// f'(z) = dnum(z)/Q(z)^2 for finite, non-polar z.
  cplx deriv(cplx z) const {
    const cplx q = den_(z);
    if (q == cplx(0.0, 0.0)) throw std::domain_error("deriv: pole; use spherical_deriv");
    return dnum_(z) / (q * q);
  }

  /// |f'| measured in the chordal metric. In chart coordinate u the expression
  /// |dnum(u)| (1+|u|^2) / (|N(u)|^2 + |D(u)|^2) needs no target chart.
  double spherical_deriv(const SpherePoint& z) const {
    const Local l = local(z);
    const Polynomial& dp = l.inverted ? dnum_rev_ : dnum_;
    const double denom = std::norm(l.n) + std::norm(l.d);
    return std::abs(dp(l.u)) * (1.0 + std::norm(l.u)) / denom;
  }

  /// Derivative of f read in charts: source chart chosen by |z|, target
  /// chart by |f(z)|. Products of these along a cycle give its multiplier.
  cplx chart_deriv(const SpherePoint& z) const {
    const Local l = local(z);
    const Polynomial& dp = l.inverted ? dnum_rev_ : dnum_;
    const cplx dn = dp(l.u);
    const bool target_inverted = std::norm(l.n) > std::norm(l.d);
    if (!target_inverted) return dn / (l.d * l.d);
    return -dn / (l.n * l.n);
  }

 private:
  struct Local {
    cplx u;
    cplx n;
    cplx d;
    bool inverted;
  };

  Local local(const SpherePoint& z) const {
    if (z.is_infinite()) {
      const cplx u(0.0, 0.0);
      return {u, num_rev_(u), den_rev_(u), true};
    }
    const cplx v = z.value();
    if (std::norm(v) <= 1.0) return {v, num_(v), den_(v), false};
    const cplx u = 1.0 / v;
    return {u, num_rev_(u), den_rev_(u), true};
  }

  Polynomial num_, den_, num_rev_, den_rev_, dnum_, dnum_rev_;
  int degree_ = 0;
};

struct MapParams {
  cplx a;
  cplx b;
};

/// f_{a,b}(z) = (z^3 + a z^2 + b) / (-conj(b) z^3 - conj(a) z + 1).
///
/// b = 0 is rejected (the map leaves the antipodal family's generic stratum
/// and 0 becomes a superattracting fixed point); a = 0 is admitted and gives
/// the bicritical slice (z^3 + b)/(-conj(b) z^3 + 1).
class DianalyticCubic {
 public:
  explicit DianalyticCubic(MapParams p) : params_(p) {
    if (!std::isfinite(p.a.real()) || !std::isfinite(p.a.imag()) || !std::isfinite(p.b.real()) ||
        !std::isfinite(p.b.imag())) {
      throw ParameterError("make_map: non-finite parameter");
    }
    if (p.b == cplx(0.0, 0.0)) throw ParameterError("make_map: b = 0 is outside the family");
    Polynomial num({p.b, cplx(0.0, 0.0), p.a, cplx(1.0, 0.0)});
    Polynomial den({cplx(1.0, 0.0), -std::conj(p.a), cplx(0.0, 0.0), -std::conj(p.b)});
    const cplx res = resultant(num, den);
    double scale = 1.0;
    for (const auto& c : num.coeffs()) scale = std::max(scale, std::abs(c));
    for (const auto& c : den.coeffs()) scale = std::max(scale, std::abs(c));
    if (std::abs(res) <= 1e-12 * std::pow(scale, 6)) {
      throw ParameterError("make_map: numerator and denominator share a root (degree drops)");
    }
    map_ = RationalMap(std::move(num), std::move(den));
  }

  const MapParams& params() const { return params_; }
  const RationalMap& rational() const { return map_; }
  const Polynomial& num() const { return map_.num(); }
  const Polynomial& den() const { return map_.den(); }
  const Polynomial& dnum() const { return map_.dnum(); }

  SpherePoint eval(const SpherePoint& z) const { return map_.eval(z); }
  SpherePoint operator()(const SpherePoint& z) const { return map_.eval(z); }
  cplx deriv(cplx z) const { return map_.deriv(z); }
  double spherical_deriv(const SpherePoint& z) const { return map_.spherical_deriv(z); }
  cplx chart_deriv(const SpherePoint& z) const { return map_.chart_deriv(z); }

 private:
  MapParams params_;
  RationalMap map_;
};

inline DianalyticCubic make_map(MapParams p) { return DianalyticCubic(p); }
inline DianalyticCubic make_map(cplx a, cplx b) { return DianalyticCubic({a, b}); }

/// Direct bicritical form (z^3 + alpha)/(-conj(alpha) z^3 + 1).
inline RationalMap bicritical_map(cplx alpha) {
  return RationalMap(Polynomial({alpha, 0.0, 0.0, 1.0}),
                     Polynomial({1.0, 0.0, 0.0, -std::conj(alpha)}));
}

/// Groups four points into two antipodal pairs (c1, c2, phi(c1), phi(c2)),
/// representatives outside the unit disk ordered by decreasing argument.
/// Returns the worst pairing defect (chordal distance between a partner and
/// the antipode of its representative).
inline double pair_antipodally(std::array<SpherePoint, 4>& pts) {
  const SpherePoint first = pts[0];
  std::size_t best = 1;
  double best_d = HUGE_VAL;
  for (std::size_t j = 1; j < 4; ++j) {
    const double d = chordal(antipodal(first), pts[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  std::vector<std::size_t> rest;
  for (std::size_t j = 1; j < 4; ++j) {
    if (j != best) rest.push_back(j);
  }
  std::array<std::pair<SpherePoint, SpherePoint>, 2> pairs{
      std::pair{pts[0], pts[best]}, std::pair{pts[rest[0]], pts[rest[1]]}};
  const double defect = std::max(best_d, chordal(antipodal(pairs[1].first), pairs[1].second));
  for (auto& pr : pairs) {
    if (pr.first.norm() < pr.second.norm()) std::swap(pr.first, pr.second);
  }
  auto arg_of = [](const SpherePoint& p) {
    return p.is_infinite() ? std::numbers::pi : std::arg(p.value());
  };
  if (arg_of(pairs[0].first) < arg_of(pairs[1].first)) std::swap(pairs[0], pairs[1]);
  pts = {pairs[0].first, pairs[1].first, pairs[0].second, pairs[1].second};
  return defect;
}

/// The four critical points with multiplicity. When a = 0 the derivative
/// numerator drops to degree 2 and the missing critical points sit at infinity.
inline std::array<SpherePoint, 4> critical_points(const DianalyticCubic& f) {
  const Polynomial& dn = f.dnum();
  const double lead5 = std::abs(dn[5]);
  double scale = 0.0;
  for (const auto& c : dn.coeffs()) scale = std::max(scale, std::abs(c));
  if (lead5 > 1e-14 * scale) {
    throw std::logic_error("critical_points: z^5 terms of P'Q - PQ' failed to cancel");
  }
  const Polynomial trimmed = Polynomial(std::vector<cplx>(dn.coeffs().begin(),
                                                          dn.coeffs().begin() + 5))
                                 .trimmed(1e-15);
  std::vector<SpherePoint> found;
  const int deg = trimmed.degree();
  if (deg >= 1) {
    const RootsResult rr = poly_roots(trimmed);
    if (!rr.converged) throw std::runtime_error("critical_points: root finder did not converge");
    for (const auto& r : rr.roots) found.emplace_back(r);
  }
  while (found.size() < 4) found.push_back(SpherePoint::infinity());
  std::array<SpherePoint, 4> pts{found[0], found[1], found[2], found[3]};
  const double defect = pair_antipodally(pts);
  if (defect > 1e-8) {
    throw std::runtime_error("critical_points: critical set is not antipodally paired (defect " +
                             std::to_string(defect) + ")");
  }
  return pts;
}

struct FixedPoint {
  SpherePoint point;
  cplx multiplier;
};

/// Roots of P - zQ = conj(b) z^4 + z^3 + (a + conj(a)) z^2 - z + b with multipliers.
inline std::vector<FixedPoint> fixed_points(const DianalyticCubic& f) {
  const auto& p = f.params();
  const Polynomial quartic({p.b, -1.0, p.a + std::conj(p.a), 1.0, std::conj(p.b)});
  const RootsResult rr = poly_roots(quartic);
  if (!rr.converged) throw std::runtime_error("fixed_points: root finder did not converge");
  std::vector<FixedPoint> out;
  for (const auto& r : rr.roots) out.push_back({SpherePoint(r), f.chart_deriv(SpherePoint(r))});
  return out;
}

/// Conformal (or anticonformal) symmetries relating f_{c,di} to f_{|c|,|d|i}.
enum class Conjugation { identity, conj, negate, negate_conj };

inline const char* to_string(Conjugation c) {
  switch (c) {
    case Conjugation::identity: return "identity";
    case Conjugation::conj: return "conj";
    case Conjugation::negate: return "negate";
    case Conjugation::negate_conj: return "negate-conj";
  }
  return "?";
}

/// g(z) for the given symmetry; each is an involution commuting with phi.
inline SpherePoint apply_conjugation(Conjugation g, const SpherePoint& z) {
  if (z.is_infinite()) return z;
  const cplx v = z.value();
  switch (g) {
    case Conjugation::identity: return z;
    case Conjugation::conj: return SpherePoint(std::conj(v));
    case Conjugation::negate: return SpherePoint(-v);
    case Conjugation::negate_conj: return SpherePoint(-std::conj(v));
  }
  return z;
}

struct NormalizedParams {
  double a;
  double b;
  Conjugation conjugation;  // g with g f_{c,di} g^{-1} = f_{a,bi}
};

/// For real (c, d): conjugating by -z flips both signs, by conj(z) flips d.
inline NormalizedParams normalize_params(double c, double d) {
  const bool neg_c = std::signbit(c), neg_d = std::signbit(d);
  Conjugation g = Conjugation::identity;
  if (!neg_c && neg_d) g = Conjugation::conj;
  if (neg_c && neg_d) g = Conjugation::negate;
  if (neg_c && !neg_d) g = Conjugation::negate_conj;
  return {std::fabs(c), std::fabs(d), g};
}

/// Uniform random point on the sphere.
template <class Rng>
SpherePoint random_sphere_point(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    std::array<double, 3> v{n(rng), n(rng), n(rng)};
    const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (len > 1e-12) return from_unit_vector(v);
  }
}

/// max chordal(f(phi(z)), phi(f(z))) over random sphere points.
template <class Map>
double commutation_residual(const Map& f, int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("commutation_residual: samples must be >= 1");
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const SpherePoint z = random_sphere_point(rng);
    worst = std::max(worst, chordal(f.eval(antipodal(z)), antipodal(f.eval(z))));
  }
  return worst;
}

}  // namespace dianalytic
