#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dianalytic/maps.hpp"
#include "dianalytic/sphere.hpp"

namespace dianalytic {

/// Iteration budgets and tolerances shared by orbit-based classifiers.
struct DynamicsSettings {
  int transient = 2000;
  int iteration_cap = 20000;
  int max_period = 64;
  int window_factor = 3;  // window = window_factor * period
  double cycle_tol = 1e-7;
  int check_interval = 16;
  double capture_eps = 1e-3;
  int derivative_n = 20000;
  double derivative_floor = -200.0;
  double indifferent_tol = 1e-6;
  int q_max = 64;
  double dedupe_tol = 1e-6;
};

struct Orbit {
  SpherePoint start;
  std::vector<SpherePoint> points;  // points[0] == start
  bool truncated = false;
};

template <class Map>
Orbit iterate(const Map& f, const SpherePoint& z0, int n) {
  if (n < 0) throw std::invalid_argument("iterate: n must be non-negative");
  Orbit o{z0, {}, false};
  o.points.reserve(static_cast<std::size_t>(n) + 1);
  o.points.push_back(z0);
  SpherePoint z = z0;
  for (int k = 0; k < n; ++k) {
    z = f.eval(z);
    o.points.push_back(z);
  }
  return o;
}

template <class Map>
SpherePoint iterate_n(const Map& f, SpherePoint z, int n) {
  for (int k = 0; k < n; ++k) z = f.eval(z);
  return z;
}

struct CycleDetection {
  int period = 0;
  SpherePoint representative;
  int iterations = 0;  // iterates consumed before the detection was confirmed
};

/// Smallest p <= max_period with chordal(z[k+p], z[k]) <= tol for the last
/// window(p) indices k of `tail`. Returns 0 when no p qualifies.
template <class WindowFn>
int find_period(std::span<const SpherePoint> tail, int max_period, double tol, WindowFn window) {
  const auto n = static_cast<long>(tail.size());
  for (int p = 1; p <= max_period; ++p) {
    const long w = window(p);
    if (w < 1 || w + p > n) break;
    bool ok = true;
    for (long k = n - 1 - p; k >= n - p - w; --k) {
      if (chordal(tail[static_cast<std::size_t>(k + p)], tail[static_cast<std::size_t>(k)]) > tol) {
        ok = false;
        break;
      }
    }
    if (ok) return p;
  }
  return 0;
}

/// Discards `transient` iterates, then looks for the smallest period whose
/// recurrence holds over a window of `window` consecutive iterates.
template <class Map>
std::optional<CycleDetection> detect_cycle(const Map& f, const SpherePoint& z0, int transient,
                                           int window, int max_period, double tol) {
  if (transient < 1 || window < 1 || max_period < 1) {
    throw std::invalid_argument("detect_cycle: transient, window and max_period must be >= 1");
  }
  SpherePoint z = iterate_n(f, z0, transient);
  std::vector<SpherePoint> buf;
  buf.reserve(static_cast<std::size_t>(max_period + window) + 1);
  buf.push_back(z);
  for (int k = 0; k < max_period + window; ++k) {
    z = f.eval(z);
    buf.push_back(z);
  }
  const int p = find_period(buf, max_period, tol, [window](int) { return window; });
  if (p == 0) return std::nullopt;
  return CycleDetection{p, buf.back(), transient + max_period + window};
}

/// The convergence algorithm: iterate up to the cap, checking every
/// `check_interval` iterates past the transient for a recurrence with window
/// window_factor * p.
template <class Map>
std::optional<CycleDetection> converge_to_cycle(const Map& f, const SpherePoint& z0,
                                                const DynamicsSettings& s) {
  const int keep = (s.window_factor + 1) * s.max_period + 1;
  std::vector<SpherePoint> ring(static_cast<std::size_t>(keep));
  std::vector<SpherePoint> tail(static_cast<std::size_t>(keep));
  SpherePoint z = z0;
  int stored = 0;
  for (int k = 1; k <= s.iteration_cap; ++k) {
    z = f.eval(z);
    ring[static_cast<std::size_t>(k % keep)] = z;
    stored = std::min(stored + 1, keep);
    if (k >= s.transient && stored == keep && (k - s.transient) % s.check_interval == 0) {
      for (int i = 0; i < keep; ++i) {
        tail[static_cast<std::size_t>(i)] = ring[static_cast<std::size_t>((k - keep + 1 + i) % keep)];
      }
      const int p = find_period(tail, s.max_period, s.cycle_tol,
                                [&s](int q) { return s.window_factor * q; });
      if (p > 0) return CycleDetection{p, z, k};
    }
  }
  return std::nullopt;
}

enum class CycleKind { superattracting, attracting, repelling, indifferent, rationally_indifferent };

struct CycleClass {
  CycleKind kind = CycleKind::repelling;
  int q = 0;  // root-of-unity order for rationally_indifferent

  bool attracting() const { return kind == CycleKind::superattracting || kind == CycleKind::attracting; }
  friend bool operator==(const CycleClass&, const CycleClass&) = default;
};

inline std::string to_string(const CycleClass& c) {
  switch (c.kind) {
    case CycleKind::superattracting: return "superattracting";
    case CycleKind::attracting: return "attracting";
    case CycleKind::repelling: return "repelling";
    case CycleKind::indifferent: return "indifferent";
    case CycleKind::rationally_indifferent: return "rationally-indifferent(" + std::to_string(c.q) + ")";
  }
  return "?";
}

/// Root-of-unity proximity is a heuristic tag: rational and irrational
/// indifference cannot be told apart in floating point.
inline CycleClass classify_multiplier(cplx lambda, double tol = 1e-6, int q_max = 64) {
  const double m = std::abs(lambda);
  if (m <= tol) return {CycleKind::superattracting, 0};
  if (m < 1.0 - tol) return {CycleKind::attracting, 0};
  if (m > 1.0 + tol) return {CycleKind::repelling, 0};
  cplx power(1.0, 0.0);
  for (int q = 1; q <= q_max; ++q) {
    power *= lambda;
    if (std::abs(power - 1.0) <= tol) return {CycleKind::rationally_indifferent, q};
  }
  return {CycleKind::indifferent, 0};
}

/// Product of chart derivatives along the cycle.
template <class Map>
cplx multiplier(const Map& f, std::span<const SpherePoint> cycle) {
  if (cycle.empty()) throw std::invalid_argument("multiplier: empty cycle");
  cplx lambda(1.0, 0.0);
  const std::size_t n = cycle.size();
  for (std::size_t j = 0; j < n; ++j) {
    const SpherePoint next = f.eval(cycle[j]);
    if (chordal(next, cycle[(j + 1) % n]) > 1e-8) {
      throw std::invalid_argument("multiplier: points do not form a cycle");
    }
    lambda *= f.chart_deriv(cycle[j]);
  }
  return lambda;
}

struct CycleRecord {
  std::vector<SpherePoint> points;
  int period = 0;
  cplx multiplier;
  CycleClass cls;
};

class RefineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Newton iteration on f^p(z) - z in the chart of the seed, with (f^p)' by
/// the chain rule, followed by reduction to the minimal period.
template <class Map>
CycleRecord refine_cycle(const Map& f, const SpherePoint& z_approx, int period, double tol = 1e-12,
                         const DynamicsSettings& s = {}) {
  if (period < 1) throw std::invalid_argument("refine_cycle: period must be >= 1");
  const bool inverted = z_approx.norm() > 1.0;
  auto to_chart = [inverted](const SpherePoint& z) -> cplx {
    if (!inverted) return z.value();
    if (z.is_infinite()) return {0.0, 0.0};
    return 1.0 / z.value();
  };
  auto from_chart = [inverted](cplx u) -> SpherePoint {
    if (!inverted) return SpherePoint(u);
    if (u == cplx(0.0, 0.0)) return SpherePoint::infinity();
    return SpherePoint(1.0 / u);
  };
  // Chart-to-chart derivative of f^p: chart_deriv products telescope, then
  // correct both ends to the fixed chart used for Newton.
  auto end_correction = [inverted](const SpherePoint& z) -> cplx {
    const bool natural_inverted = z.norm() > 1.0;
    if (natural_inverted == inverted || z.is_infinite()) return {1.0, 0.0};
    const cplx v = z.value();
    // d(1/z)/dz = -1/z^2 and dz/d(1/z) = -z^2
    return inverted ? -1.0 / (v * v) : -(v * v);
  };

  cplx u = to_chart(z_approx);
  SpherePoint z = z_approx;
  double residual = HUGE_VAL;
  for (int step = 0; step < 50; ++step) {
    if (!inverted && z.is_infinite()) throw RefineError("refine_cycle: Newton reached a pole");
    SpherePoint w = z;
    cplx d(1.0, 0.0);
    for (int j = 0; j < period; ++j) {
      d *= f.chart_deriv(w);
      w = f.eval(w);
    }
    // source end: natural chart of z -> Newton chart; target end likewise for w
    cplx src = end_correction(z);
    if (src != cplx(1.0, 0.0)) src = 1.0 / src;
    d = d * src * end_correction(w);
    residual = chordal(w, z);
    if (residual <= tol) break;
    if (!inverted && w.is_infinite()) throw RefineError("refine_cycle: orbit reached a pole");
    if (inverted && w.norm() < 1e-300) throw RefineError("refine_cycle: image left the chart");
    const cplx g = to_chart(w) - u;
    const cplx dg = d - 1.0;
    if (dg == cplx(0.0, 0.0)) throw RefineError("refine_cycle: singular Newton step");
    const cplx next = u - g / dg;
    if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) {
      throw RefineError("refine_cycle: Newton diverged");
    }
    u = next;
    z = from_chart(u);
  }
  if (!(residual <= tol)) {
    // one more residual evaluation at the final iterate
    residual = chordal(iterate_n(f, z, period), z);
    if (!(residual <= std::max(tol, 1e-12))) {
      throw RefineError("refine_cycle: Newton did not converge (residual " + std::to_string(residual) + ")");
    }
  }
  int p = period;
  for (int d = 1; d < period; ++d) {
    if (period % d == 0 && chordal(iterate_n(f, z, d), z) <= 1e-9) {
      p = d;
      break;
    }
  }
  CycleRecord rec;
  rec.period = p;
  rec.points.reserve(static_cast<std::size_t>(p));
  SpherePoint w = z;
  for (int j = 0; j < p; ++j) {
    rec.points.push_back(w);
    w = f.eval(w);
  }
  cplx lambda(1.0, 0.0);
  for (const auto& pt : rec.points) lambda *= f.chart_deriv(pt);
  rec.multiplier = lambda;
  rec.cls = classify_multiplier(lambda, s.indifferent_tol, s.q_max);
  return rec;
}

struct DerivativeSum {
  double value = 0.0;  // -inf when the orbit lands exactly on a critical point
  bool hit_floor = false;
  int iterations = 0;  // terms accumulated
  SpherePoint last;    // orbit point after the last accumulated term
};

/// Sum of log spherical derivatives along the orbit of the critical value
/// f(c), f^2(c), ..., stopping early once the sum drops below `floor`.
template <class Map>
DerivativeSum derivative_sum(const Map& f, const SpherePoint& c, int n, double floor) {
  if (n < 1) throw std::invalid_argument("derivative_sum: n must be >= 1");
  DerivativeSum out;
  SpherePoint z = f.eval(c);
  for (int k = 0; k < n; ++k) {
    const double sd = f.spherical_deriv(z);
    z = f.eval(z);
    out.iterations = k + 1;
    if (sd == 0.0) {
      out.value = -std::numeric_limits<double>::infinity();
      out.hit_floor = true;
      break;
    }
    out.value += std::log(sd);
    if (out.value < floor) {
      out.hit_floor = true;
      break;
    }
  }
  out.last = z;
  return out;
}

}  // namespace dianalytic
