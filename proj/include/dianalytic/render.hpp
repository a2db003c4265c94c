#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dianalytic/catalog.hpp"
#include "dianalytic/dynamics.hpp"
#include "dianalytic/herman.hpp"
#include "dianalytic/image.hpp"
#include "dianalytic/maps.hpp"
#include "dianalytic/parallel.hpp"
#include "dianalytic/sphere.hpp"

namespace dianalytic {

struct Viewport {
  cplx center{0.0, 0.0};
  double width = 4.0;
  int pixels_x = 400;
  int pixels_y = 400;

  Viewport() = default;
  Viewport(cplx c, double w, int px, int py) : center(c), width(w), pixels_x(px), pixels_y(py) { validate(); }

  void validate() const {
    if (!(width > 0.0) || !std::isfinite(width)) throw std::invalid_argument("Viewport: width must be positive");
    if (pixels_x < 1 || pixels_y < 1) throw std::invalid_argument("Viewport: pixel counts must be >= 1");
    if (!std::isfinite(center.real()) || !std::isfinite(center.imag())) {
      throw std::invalid_argument("Viewport: center must be finite");
    }
  }
  double height() const { return width * pixels_y / pixels_x; }
  double pixel_size() const { return width / pixels_x; }

  /// Midpoint of pixel (x, y); row 0 is the top edge. (sx, sy) in [0,1)
  /// select a sub-pixel position, 0.5 being the midpoint.
  cplx point(int x, int y, double sx = 0.5, double sy = 0.5) const {
    const double h = pixel_size();
    return {center.real() - 0.5 * width + (x + sx) * h, center.imag() + 0.5 * height() - (y + sy) * h};
  }

  /// Pixel containing z, if inside the viewport.
  std::optional<std::array<int, 2>> pixel_of(const SpherePoint& z) const {
    if (z.is_infinite()) return std::nullopt;
    const double h = pixel_size();
    const double fx = (z.value().real() - (center.real() - 0.5 * width)) / h;
    const double fy = ((center.imag() + 0.5 * height()) - z.value().imag()) / h;
    if (!(fx >= 0.0 && fy >= 0.0 && fx < pixels_x && fy < pixels_y)) return std::nullopt;
    return std::array<int, 2>{static_cast<int>(fx), static_cast<int>(fy)};
  }
};

enum class PixelTag { basin, ring_like, non_convergent };

inline const char* to_string(PixelTag t) {
  switch (t) {
    case PixelTag::basin: return "basin";
    case PixelTag::ring_like: return "ring_like";
    case PixelTag::non_convergent: return "non_convergent";
  }
  return "?";
}

struct PixelClass {
  PixelTag tag = PixelTag::non_convergent;
  int cycle_id = -1;   // basin only
  int iterations = 0;  // iterates to capture (basin) or consumed
  double angle = 0.0;   // ring_like only, in [0, 2 pi)
  double radial = 0.0;  // ring_like only, 0 at the inner curve and 1 at the outer

  static PixelClass basin(int id, int k) { return {PixelTag::basin, id, k, 0.0, 0.0}; }
  static PixelClass ring(double a, double r, int k) { return {PixelTag::ring_like, -1, k, a, r}; }
  static PixelClass non_convergent(int k) { return {PixelTag::non_convergent, -1, k, 0.0, 0.0}; }

  bool same_kind(const PixelClass& o) const { return tag == o.tag && cycle_id == o.cycle_id; }
  friend bool operator==(const PixelClass&, const PixelClass&) = default;
};

struct RenderSettings {
  DynamicsSettings dynamics;
  HermanSettings herman;
  bool ring_coloring = true;     // otherwise ring orbits are reported non_convergent
  int ring_check_interval = 8;
  int ring_streak = 1024;        // consecutive iterates inside the annulus before calling ring_like
  int supersample = 1;           // n x n sub-pixel samples with majority vote
  int threads = 0;               // 0: DIANALYTIC_THREADS or hardware
};

/// Everything classify_point needs besides the map, built once per render.
struct PlaneContext {
  BasinCatalog catalog;
  std::optional<RingGeometry> ring;  // only when the free critical orbits bound an annulus
  std::vector<std::array<double, 3>> cycle_vectors;
  std::vector<int> cycle_owner;

  void index_cycles() {
    cycle_vectors.clear();
    cycle_owner.clear();
    for (std::size_t i = 0; i < catalog.cycles.size(); ++i) {
      for (const auto& p : catalog.cycles[i].points) {
        cycle_vectors.push_back(to_unit_vector(p));
        cycle_owner.push_back(static_cast<int>(i));
      }
    }
  }
};

template <class Map>
PlaneContext make_plane_context(const Map& f, const BasinCatalog& cat, const RenderSettings& s) {
  PlaneContext ctx;
  ctx.catalog = cat;
  ctx.index_cycles();
  if (s.ring_coloring && !cat.free_pairs().empty()) {
    RingGeometry g = boundary_curves(f, cat, s.herman);
    if (g.valid) ctx.ring = std::move(g);
  }
  return ctx;
}

inline PlaneContext make_plane_context(const DianalyticCubic& f, const RenderSettings& s) {
  return make_plane_context(f, build_basin_catalog(f, s.dynamics), s);
}

/// Capture by a catalog cycle first; otherwise ring_like once the orbit has
/// stayed inside the annulus for ring_streak iterates; otherwise non_convergent
/// at the iteration cap.
template <class Map>
PixelClass classify_point(const Map& f, const SpherePoint& z0, const PlaneContext& ctx, const RenderSettings& s) {
  const double eps2 = s.dynamics.capture_eps * s.dynamics.capture_eps;
  const int cap = s.dynamics.iteration_cap;
  const RingGeometry* ring = ctx.ring ? &*ctx.ring : nullptr;
  const int interval = std::max(1, s.ring_check_interval);
  int streak_start = -1;
  SpherePoint z = z0;
  for (int k = 0; k <= cap; ++k) {
    const auto v = to_unit_vector(z);
    for (std::size_t j = 0; j < ctx.cycle_vectors.size(); ++j) {
      const auto& c = ctx.cycle_vectors[j];
      const double d2 = (c[0] - v[0]) * (c[0] - v[0]) + (c[1] - v[1]) * (c[1] - v[1]) + (c[2] - v[2]) * (c[2] - v[2]);
      if (d2 <= eps2) return PixelClass::basin(ctx.cycle_owner[j], k);
    }
    if (ring && k % interval == 0) {
      if (ring->in_ring(z)) {
        if (streak_start < 0) streak_start = k;
        if (k - streak_start >= s.ring_streak) return PixelClass::ring(ring->angle(z), ring->radial_fraction(z), k);
      } else {
        streak_start = -1;
      }
    }
    if (k < cap) z = f.eval(z);
  }
  if (ring && streak_start >= 0 && ring->in_ring(z)) return PixelClass::ring(ring->angle(z), ring->radial_fraction(z), cap);
  return PixelClass::non_convergent(cap);
}

struct PlaneGrid {
  Viewport viewport;
  std::vector<PixelClass> classes;  // row-major, row 0 at the top
  BasinCatalog catalog;
  std::optional<RingGeometry> ring;
  RenderSettings settings;

  const PixelClass& at(int x, int y) const {
    return classes[static_cast<std::size_t>(y) * viewport.pixels_x + x];
  }
  std::size_t count(PixelTag t, int cycle_id = -2) const {
    return static_cast<std::size_t>(std::count_if(classes.begin(), classes.end(), [&](const PixelClass& c) {
      return c.tag == t && (cycle_id == -2 || c.cycle_id == cycle_id);
    }));
  }
};

namespace detail {

inline PixelClass majority(const std::vector<PixelClass>& v) {
  std::size_t best = 0, best_count = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t c = 0;
    for (const auto& w : v) c += w.same_kind(v[i]) ? 1 : 0;
    if (c > best_count) {
      best = i;
      best_count = c;
    }
  }
  return v[best];
}

}  // namespace detail

template <class Map>
PlaneGrid render_plane(const Map& f, const Viewport& vp, const PlaneContext& ctx, const RenderSettings& s) {
  vp.validate();
  PlaneGrid grid;
  grid.viewport = vp;
  grid.catalog = ctx.catalog;
  grid.ring = ctx.ring;
  grid.settings = s;
  grid.classes.resize(static_cast<std::size_t>(vp.pixels_x) * vp.pixels_y);
  const int ss = std::max(1, s.supersample);
  parallel_for(vp.pixels_y, s.threads, [&](long y) {
    std::vector<PixelClass> sub(static_cast<std::size_t>(ss * ss));
    for (int x = 0; x < vp.pixels_x; ++x) {
      PixelClass pc;
      if (ss == 1) {
        pc = classify_point(f, SpherePoint(vp.point(x, static_cast<int>(y))), ctx, s);
      } else {
        for (int i = 0; i < ss; ++i) {
          for (int j = 0; j < ss; ++j) {
            const cplx z = vp.point(x, static_cast<int>(y), (i + 0.5) / ss, (j + 0.5) / ss);
            sub[static_cast<std::size_t>(j * ss + i)] = classify_point(f, SpherePoint(z), ctx, s);
          }
        }
        pc = detail::majority(sub);
      }
      grid.classes[static_cast<std::size_t>(y) * vp.pixels_x + x] = pc;
    }
  });
  return grid;
}

inline PlaneGrid render_plane(const DianalyticCubic& f, const Viewport& vp, const RenderSettings& s = {}) {
  return render_plane(f, vp, make_plane_context(f, s), s);
}

/// First k iterates (f(c), ..., f^k(c)) of each critical point, indexed like
/// critical_points.
template <class Map>
std::array<std::vector<SpherePoint>, 4> postcritical_overlay(const Map& f, const std::array<SpherePoint, 4>& crit,
                                                             int k) {
  if (k < 1) throw std::invalid_argument("postcritical_overlay: k must be >= 1");
  std::array<std::vector<SpherePoint>, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    SpherePoint z = crit[i];
    out[i].reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      z = f.eval(z);
      out[i].push_back(z);
    }
  }
  return out;
}

inline std::array<std::vector<SpherePoint>, 4> postcritical_overlay(const DianalyticCubic& f, int k) {
  return postcritical_overlay(f, critical_points(f), k);
}

struct Palette {
  enum class NonConvergent { red, white };
  NonConvergent non_convergent = NonConvergent::red;
  // hue of ring_like pixels: angle about the ring center, or radial position
  // (rotation invariant, so whole preimage components share one color)
  enum class RingHue { angle, radial };
  RingHue ring_hue = RingHue::angle;
  // overlay colors for c1..c4; the boundary pair is drawn black/gray
  std::array<Rgb, 4> overlay{Rgb{0, 0, 0}, Rgb{60, 60, 60}, Rgb{128, 128, 128}, Rgb{180, 180, 180}};
};

/// Base color of a basin: cycles inside the unit disk get the green family,
/// the rest blue; further cycles cycle through other hues.
inline Rgb basin_base_color(const BasinCatalog& cat, int id) {
  const auto& c = cat.cycles[static_cast<std::size_t>(id)];
  int inside = 0;
  for (const auto& p : c.points) inside += (p.is_finite() && std::norm(p.value()) < 1.0) ? 1 : 0;
  const bool green = 2 * inside > static_cast<int>(c.points.size());
  if (id < 2 || cat.cycles.size() <= 2) return green ? Rgb{40, 170, 60} : Rgb{40, 110, 220};
  return hsv(0.1 + 0.13 * id, 0.7, 0.8);
}

inline Rgb pixel_color(const PlaneGrid& g, const PixelClass& c, const Palette& pal) {
  switch (c.tag) {
    case PixelTag::basin: {
      const Rgb base = basin_base_color(g.catalog, c.cycle_id);
      // slower capture reads lighter
      const double t = std::log1p(c.iterations) / std::log1p(std::max(2, g.settings.dynamics.iteration_cap));
      return mix(base, Rgb{235, 245, 255}, 0.9 * t);
    }
    case PixelTag::ring_like:
      if (pal.ring_hue == Palette::RingHue::radial) return hsv(0.55 + 0.3 * c.radial, 0.6, 0.45 + 0.45 * c.radial);
      return hsv(c.angle / (2.0 * std::numbers::pi), 0.55, 0.75);
    case PixelTag::non_convergent:
      return pal.non_convergent == Palette::NonConvergent::red ? Rgb{220, 30, 30} : Rgb{255, 255, 255};
  }
  return {0, 0, 0};
}

inline Image to_image(const PlaneGrid& g, const Palette& pal = {},
                      const std::array<std::vector<SpherePoint>, 4>* overlay = nullptr) {
  Image img(g.viewport.pixels_x, g.viewport.pixels_y);
  for (int y = 0; y < g.viewport.pixels_y; ++y) {
    for (int x = 0; x < g.viewport.pixels_x; ++x) img.set(x, y, pixel_color(g, g.at(x, y), pal));
  }
  if (overlay) {
    for (std::size_t i = 0; i < 4; ++i) {
      for (const auto& z : (*overlay)[i]) {
        if (auto px = g.viewport.pixel_of(z)) img.set((*px)[0], (*px)[1], pal.overlay[i]);
      }
    }
  }
  return img;
}

inline void emit_image(const PlaneGrid& g, const Palette& pal, const std::string& path,
                       const std::array<std::vector<SpherePoint>, 4>* overlay = nullptr) {
  write_png(to_image(g, pal, overlay), path);
}

inline void write_plane_csv(const PlaneGrid& g, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_plane_csv: cannot open " + path);
  os.precision(17);
  os << "x_index,y_index,re,im,tag,cycle_id,iterations,angle,radial\n";
  for (int y = 0; y < g.viewport.pixels_y; ++y) {
    for (int x = 0; x < g.viewport.pixels_x; ++x) {
      const cplx z = g.viewport.point(x, y);
      const PixelClass& c = g.at(x, y);
      os << x << ',' << y << ',' << z.real() << ',' << z.imag() << ',' << to_string(c.tag) << ',' << c.cycle_id << ','
         << c.iterations << ',' << c.angle << ',' << c.radial << '\n';
    }
  }
  if (!os) throw std::runtime_error("write_plane_csv: write failed for " + path);
}

}  // namespace dianalytic
