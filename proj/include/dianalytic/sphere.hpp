#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace dianalytic {

using cplx = std::complex<double>;

/// A point of the Riemann sphere: a finite complex value or the single
/// point at infinity.
class SpherePoint {
 public:
  constexpr SpherePoint() = default;

  /// Non-finite magnitudes (overflow) collapse onto infinity; NaN is rejected.
  SpherePoint(cplx z) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(z.real()) || std::isnan(z.imag())) {
      throw std::domain_error("SpherePoint: NaN component");
    }
    if (std::isinf(z.real()) || std::isinf(z.imag())) {
      infinite_ = true;
    } else {
      value_ = z;
    }
  }
  SpherePoint(double re, double im) : SpherePoint(cplx(re, im)) {}

  static SpherePoint infinity() {
    SpherePoint p;
    p.infinite_ = true;
    return p;
  }

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }

  /// Finite value. Calling this on infinity is a logic error.
  cplx value() const {
    if (infinite_) throw std::logic_error("SpherePoint::value() on infinity");
    return value_;
  }

  /// |z|^2, +inf for the point at infinity.
  double norm() const { return infinite_ ? HUGE_VAL : std::norm(value_); }

  friend bool operator==(const SpherePoint& a, const SpherePoint& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }

 private:
  cplx value_{0.0, 0.0};
  bool infinite_ = false;
};

/// phi(z) = -1/conj(z), the fixed-point-free antipodal involution.
inline SpherePoint antipodal(const SpherePoint& z) {
  if (z.is_infinite()) return SpherePoint(0.0, 0.0);
  const cplx v = z.value();
  if (v == cplx(0.0, 0.0)) return SpherePoint::infinity();
  return SpherePoint(-1.0 / std::conj(v));
}

/// Stereographic image on the unit sphere in R^3 (0 -> south pole, inf -> north pole).
inline std::array<double, 3> to_unit_vector(const SpherePoint& z) {
  if (z.is_infinite()) return {0.0, 0.0, 1.0};
  const cplx v = z.value();
  const double n = std::norm(v);
  if (n <= 1.0) {
    const double s = 1.0 + n;
    return {2.0 * v.real() / s, 2.0 * v.imag() / s, (n - 1.0) / s};
  }
  const cplx u = 1.0 / v;
  const double m = std::norm(u);
  const double s = 1.0 + m;
  return {2.0 * u.real() / s, -2.0 * u.imag() / s, (1.0 - m) / s};
}

inline SpherePoint from_unit_vector(const std::array<double, 3>& v) {
  const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (!(len > 0.0)) throw std::domain_error("from_unit_vector: zero vector");
  const double x = v[0] / len, y = v[1] / len, zc = v[2] / len;
  if (zc <= 0.0) return SpherePoint(cplx(x, y) / (1.0 - zc));
  // Upper hemisphere: invert through u = 1/z, which maps (x, y, z) to (x, -y, -z).
  const cplx u = cplx(x, -y) / (1.0 + zc);
  if (u == cplx(0.0, 0.0)) return SpherePoint::infinity();
  return SpherePoint(1.0 / u);
}

/// Chordal distance on the sphere of diameter 2.
inline double chordal(const SpherePoint& z, const SpherePoint& w) {
  if (z.is_infinite() && w.is_infinite()) return 0.0;
  if (z.is_infinite() || w.is_infinite()) {
    const cplx v = z.is_infinite() ? w.value() : z.value();
    const double r = std::abs(v);
    if (r <= 1.0) return 2.0 / std::sqrt(1.0 + r * r);
    return 2.0 / (r * std::sqrt(1.0 + 1.0 / (r * r)));
  }
  cplx a = z.value(), b = w.value();
  const double na = std::norm(a), nb = std::norm(b);
  if (na > 1.0 && nb > 1.0) {
    // z -> 1/z is an isometry; keeps both arguments in the unit disk.
    a = 1.0 / a;
    b = 1.0 / b;
    return 2.0 * std::abs(a - b) / std::sqrt((1.0 + std::norm(a)) * (1.0 + std::norm(b)));
  }
  if (na > 1e200 || nb > 1e200) {
    const auto u = to_unit_vector(z), v = to_unit_vector(w);
    return std::sqrt((u[0] - v[0]) * (u[0] - v[0]) + (u[1] - v[1]) * (u[1] - v[1]) +
                     (u[2] - v[2]) * (u[2] - v[2]));
  }
  return 2.0 * std::abs(a - b) / std::sqrt((1.0 + na) * (1.0 + nb));
}

/// True iff z and w represent the same point of RP^2 = sphere / phi.
inline bool rp2_equal(const SpherePoint& z, const SpherePoint& w, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("rp2_equal: tol must be positive");
  return chordal(z, w) <= tol || chordal(antipodal(z), w) <= tol;
}

/// Rigid rotation of the sphere z -> (z - p) / (1 + conj(p) z) sending p to 0
/// and phi(p) to infinity. Rotations commute with phi.
class SphereRotation {
 public:
  SphereRotation() = default;
  explicit SphereRotation(const SpherePoint& center) : center_(center) {}

  const SpherePoint& center() const { return center_; }

  SpherePoint apply(const SpherePoint& z) const {
    if (center_.is_infinite()) return invert(z);
    const cplx p = center_.value();
    if (z.is_infinite()) {
      if (p == cplx(0.0, 0.0)) return SpherePoint::infinity();
      return SpherePoint(1.0 / std::conj(p));
    }
    const cplx v = z.value();
    const cplx den = 1.0 + std::conj(p) * v;
    if (den == cplx(0.0, 0.0)) return SpherePoint::infinity();
    return SpherePoint((v - p) / den);
  }

  SpherePoint inverse(const SpherePoint& w) const {
    if (center_.is_infinite()) return invert(w);
    const cplx p = center_.value();
    if (w.is_infinite()) {
      if (p == cplx(0.0, 0.0)) return SpherePoint::infinity();
      return SpherePoint(-1.0 / std::conj(p));
    }
    const cplx v = w.value();
    const cplx den = 1.0 - std::conj(p) * v;
    if (den == cplx(0.0, 0.0)) return SpherePoint::infinity();
    return SpherePoint((v + p) / den);
  }

 private:
  static SpherePoint invert(const SpherePoint& z) {
    if (z.is_infinite()) return SpherePoint(0.0, 0.0);
    if (z.value() == cplx(0.0, 0.0)) return SpherePoint::infinity();
    return SpherePoint(1.0 / z.value());
  }

  SpherePoint center_{0.0, 0.0};
};

}  // namespace dianalytic
