#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dianalytic {

using cplx = std::complex<double>;

/// Dense complex polynomial, lowest degree coefficient first.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {}
  Polynomial(std::initializer_list<cplx> coeffs) : c_(coeffs) {}

  const std::vector<cplx>& coeffs() const { return c_; }
  std::size_t size() const { return c_.size(); }
  cplx operator[](std::size_t i) const { return i < c_.size() ? c_[i] : cplx(0.0, 0.0); }

  /// Degree after ignoring exactly-zero leading coefficients; -1 for the zero polynomial.
  int degree() const {
    for (int i = static_cast<int>(c_.size()) - 1; i >= 0; --i) {
      if (c_[static_cast<std::size_t>(i)] != cplx(0.0, 0.0)) return i;
    }
    return -1;
  }

  /// Horner evaluation from the top coefficient down.
  cplx operator()(cplx z) const {
    cplx r(0.0, 0.0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * z + *it;
    return r;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return Polynomial({cplx(0.0, 0.0)});
    std::vector<cplx> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
    return Polynomial(std::move(d));
  }

  /// Coefficients reversed after padding to `degree_bound`: z^n p(1/z).
  Polynomial reversed(std::size_t degree_bound) const {
    std::vector<cplx> r(degree_bound + 1, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < c_.size() && i <= degree_bound; ++i) r[degree_bound - i] = c_[i];
    return Polynomial(std::move(r));
  }

  /// Drops leading coefficients with |c| <= tol * max|c|.
  Polynomial trimmed(double tol = 0.0) const {
    double scale = 0.0;
    for (const auto& x : c_) scale = std::max(scale, std::abs(x));
    std::vector<cplx> r = c_;
    while (r.size() > 1 && std::abs(r.back()) <= tol * scale) r.pop_back();
    return Polynomial(std::move(r));
  }

  /// sum |c_i| |z|^i, the natural scale for a residual at z.
  double magnitude_at(cplx z) const {
    const double r = std::abs(z);
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * r + std::abs(*it);
    return acc;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.c_.empty() || b.c_.empty()) return Polynomial();
    std::vector<cplx> r(a.c_.size() + b.c_.size() - 1, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    }
    return Polynomial(std::move(r));
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    std::vector<cplx> r(std::max(a.c_.size(), b.c_.size()), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] - b[i];
    return Polynomial(std::move(r));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<cplx> r(std::max(a.c_.size(), b.c_.size()), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] + b[i];
    return Polynomial(std::move(r));
  }

 private:
  std::vector<cplx> c_;
};

struct RootsResult {
  std::vector<cplx> roots;      // with multiplicity
  std::vector<double> residuals;  // |p(root)| / magnitude_at(root)
  bool converged = false;
  int sweeps = 0;
};

/// All roots of p by Aberth-Ehrlich simultaneous iteration followed by two
/// Newton polishing steps per root. Exact zero roots are deflated first.
inline RootsResult poly_roots(const Polynomial& p, double tol = 1e-12, int max_iter = 200) {
  const int deg = p.degree();
  if (deg < 1) throw std::invalid_argument("poly_roots: degree must be at least 1");

  RootsResult out;
  std::size_t low = 0;
  while (p[low] == cplx(0.0, 0.0)) ++low;
  for (std::size_t i = 0; i < low; ++i) out.roots.emplace_back(0.0, 0.0);

  std::vector<cplx> c(p.coeffs().begin() + static_cast<std::ptrdiff_t>(low),
                      p.coeffs().begin() + deg + 1);
  const Polynomial q(c);
  const Polynomial dq = q.derivative();
  const int n = deg - static_cast<int>(low);

  if (n > 0) {
    const double radius = std::pow(std::abs(c.front()) / std::abs(c.back()), 1.0 / n);
    std::vector<cplx> z(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double t = 2.0 * std::numbers::pi * k / n + 0.4;
      z[static_cast<std::size_t>(k)] = std::polar(radius, t);
    }
    bool converged = false;
    int sweep = 0;
    for (; sweep < max_iter && !converged; ++sweep) {
      converged = true;
      for (int k = 0; k < n; ++k) {
        auto& zk = z[static_cast<std::size_t>(k)];
        const cplx pv = q(zk);
        if (pv == cplx(0.0, 0.0)) continue;
        const cplx ratio = pv / dq(zk);
        cplx s(0.0, 0.0);
        for (int j = 0; j < n; ++j) {
          if (j != k) s += 1.0 / (zk - z[static_cast<std::size_t>(j)]);
        }
        const cplx w = ratio / (1.0 - ratio * s);
        if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) continue;
        zk -= w;
        if (std::abs(w) > tol * std::max(1.0, std::abs(zk))) converged = false;
      }
    }
    out.sweeps = sweep;
    out.converged = converged;
    for (auto& zk : z) {
      for (int it = 0; it < 2; ++it) {
        const cplx d = dq(zk);
        if (d == cplx(0.0, 0.0)) break;
        const cplx cand = zk - q(zk) / d;
        if (std::abs(q(cand)) <= std::abs(q(zk))) zk = cand;
      }
      out.roots.push_back(zk);
    }
  } else {
    out.converged = true;
  }
  for (const auto& r : out.roots) {
    const double m = p.magnitude_at(r);
    out.residuals.push_back(m > 0.0 ? std::abs(p(r)) / m : 0.0);
  }
  return out;
}

/// Resultant of two polynomials via the Sylvester determinant.
inline cplx resultant(const Polynomial& p, const Polynomial& q) {
  const int m = p.degree(), n = q.degree();
  if (m < 0 || n < 0) return cplx(0.0, 0.0);
  const int size = m + n;
  if (size == 0) return cplx(1.0, 0.0);
  std::vector<cplx> s(static_cast<std::size_t>(size * size), cplx(0.0, 0.0));
  auto at = [&](int r, int col) -> cplx& { return s[static_cast<std::size_t>(r * size + col)]; };
  for (int r = 0; r < n; ++r) {
    for (int i = 0; i <= m; ++i) at(r, r + i) = p[static_cast<std::size_t>(m - i)];
  }
  for (int r = 0; r < m; ++r) {
    for (int i = 0; i <= n; ++i) at(n + r, r + i) = q[static_cast<std::size_t>(n - i)];
  }
  cplx det(1.0, 0.0);
  for (int col = 0; col < size; ++col) {
    int pivot = col;
    for (int r = col + 1; r < size; ++r) {
      if (std::abs(at(r, col)) > std::abs(at(pivot, col))) pivot = r;
    }
    if (at(pivot, col) == cplx(0.0, 0.0)) return cplx(0.0, 0.0);
    if (pivot != col) {
      for (int k = 0; k < size; ++k) std::swap(at(pivot, k), at(col, k));
      det = -det;
    }
    det *= at(col, col);
    for (int r = col + 1; r < size; ++r) {
      const cplx factor = at(r, col) / at(col, col);
      for (int k = col; k < size; ++k) at(r, k) -= factor * at(col, k);
    }
  }
  return det;
}

}  // namespace dianalytic
