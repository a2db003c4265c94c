#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dianalytic/dynamics.hpp"
#include "dianalytic/image.hpp"
#include "dianalytic/maps.hpp"
#include "dianalytic/parallel.hpp"

namespace dianalytic {

/// Rectangle in the (a, beta) plane, b = beta i, split into cells_x * cells_y cells.
struct ParamRegion {
  double a_min = -3.0, a_max = 3.0;
  double b_min = -3.0, b_max = 3.0;
  int cells_x = 120, cells_y = 120;

  void validate() const {
    if (!(a_max > a_min) || !(b_max > b_min)) throw std::invalid_argument("ParamRegion: max must exceed min");
    if (cells_x < 1 || cells_y < 1) throw std::invalid_argument("ParamRegion: cells must be >= 1");
  }
  // mid + (2i + 1 - n) * half / n: mirror cells of a symmetric region get
  // exactly negated coordinates
  double a_at(int i) const {
    const double mid = 0.5 * (a_min + a_max), h = 0.5 * (a_max - a_min) / cells_x;
    return mid + (2 * i + 1 - cells_x) * h;
  }
  double b_at(int j) const {
    const double mid = 0.5 * (b_min + b_max), h = 0.5 * (b_max - b_min) / cells_y;
    return mid + (2 * j + 1 - cells_y) * h;
  }
  bool symmetric() const { return a_min == -a_max && b_min == -b_max; }
};

enum class Algorithm { derivative, convergence, both };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::derivative: return "derivative";
    case Algorithm::convergence: return "convergence";
    case Algorithm::both: return "both";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "derivative") return Algorithm::derivative;
  if (s == "convergence") return Algorithm::convergence;
  if (s == "both") return Algorithm::both;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected derivative, convergence or both)");
}

/// Outcome for one antipodal critical pair under one algorithm.
struct PairOutcome {
  bool attracted = false;
  int period = 0;               // 0 when not attracted or not determined
  double multiplier_abs = -1.0; // product of |chart derivatives| over the detected points; -1 if unknown
  friend bool operator==(const PairOutcome&, const PairOutcome&) = default;
};

enum class CategoryKind { all_attracted, none_attracted, mixed, invalid };

struct Category {
  CategoryKind kind = CategoryKind::invalid;
  int min_period = 0;  // smallest period among attracted pairs (0: none or unknown)
  friend bool operator==(const Category&, const Category&) = default;
};

inline std::string to_string(const Category& c) {
  switch (c.kind) {
    case CategoryKind::all_attracted: return "AllAttracted(" + std::to_string(c.min_period) + ")";
    case CategoryKind::none_attracted: return "NoneAttracted";
    case CategoryKind::mixed: return "Mixed(" + std::to_string(c.min_period) + ")";
    case CategoryKind::invalid: return "Invalid";
  }
  return "?";
}

inline Category classify_cell(const std::array<PairOutcome, 2>& pairs) {
  Category c;
  int attracted = 0;
  for (const auto& p : pairs) {
    if (!p.attracted) continue;
    ++attracted;
    if (p.period > 0 && (c.min_period == 0 || p.period < c.min_period)) c.min_period = p.period;
  }
  c.kind = attracted == 2   ? CategoryKind::all_attracted
           : attracted == 0 ? CategoryKind::none_attracted
                            : CategoryKind::mixed;
  return c;
}

struct ParamCellResult {
  double a = 0.0, beta = 0.0;
  bool valid = true;
  std::array<PairOutcome, 2> convergence{};
  std::array<PairOutcome, 2> derivative{};
  Category convergence_category, derivative_category;
  Category category;           // of the primary algorithm (convergence when both ran)
  bool disagreement = false;   // both ran and categories differ
  bool spot_checked = false;
  bool spot_check_pass = true; // partner critical points gave the same outcomes
};

struct ScanSettings {
  DynamicsSettings dynamics;
  int threads = 0;
  double spot_check_fraction = 0.01;
};

struct ParamGrid {
  ParamRegion region;
  Algorithm algorithm = Algorithm::convergence;
  ScanSettings settings;
  std::vector<ParamCellResult> cells;  // index j * cells_x + i, j along beta

  const ParamCellResult& at(int i, int j) const {
    return cells[static_cast<std::size_t>(j) * region.cells_x + i];
  }
  std::size_t spot_checks() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](auto& c) { return c.spot_checked; }));
  }
  std::size_t spot_check_failures() const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](auto& c) { return c.spot_checked && !c.spot_check_pass; }));
  }
};

namespace detail {

template <class Map>
double detected_multiplier_abs(const Map& f, SpherePoint z, int period) {
  double m = 1.0;
  for (int j = 0; j < period; ++j) {
    m *= std::abs(f.chart_deriv(z));
    z = f.eval(z);
  }
  return m;
}

template <class Map>
PairOutcome convergence_outcome(const Map& f, const SpherePoint& c, const DynamicsSettings& s) {
  PairOutcome o;
  if (auto d = converge_to_cycle(f, c, s)) {
    o.attracted = true;
    o.period = d->period;
    o.multiplier_abs = detected_multiplier_abs(f, d->representative, d->period);
  }
  return o;
}

template <class Map>
PairOutcome derivative_outcome(const Map& f, const SpherePoint& c, const DynamicsSettings& s) {
  PairOutcome o;
  const DerivativeSum ds = derivative_sum(f, c, s.derivative_n, s.derivative_floor);
  if (!ds.hit_floor) return o;
  o.attracted = true;
  // the orbit has contracted by e^floor, so the cycle shows up without a transient
  DynamicsSettings quick = s;
  quick.transient = 0;
  if (auto d = converge_to_cycle(f, ds.last, quick)) {
    o.period = d->period;
    o.multiplier_abs = detected_multiplier_abs(f, d->representative, d->period);
  }
  return o;
}

/// Deterministic hash selecting ~fraction of the cells for the pair spot check.
inline bool spot_check_selected(long index, double fraction) {
  if (fraction <= 0.0) return false;
  std::uint64_t x = static_cast<std::uint64_t>(index) + 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return static_cast<double>(x >> 11) * 0x1.0p-53 < fraction;
}

}  // namespace detail

/// Critical points of f_{a, beta i} obtained from the representative with
/// a, beta >= 0 through the sign/conjugation symmetry, so that mirror cells
/// iterate exactly mirrored orbits.
inline std::array<SpherePoint, 4> symmetric_critical_points(double a, double beta) {
  const NormalizedParams n = normalize_params(a, beta);
  const auto base = critical_points(make_map(cplx(n.a, 0.0), cplx(0.0, n.b)));
  std::array<SpherePoint, 4> out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = apply_conjugation(n.conjugation, base[i]);
  return out;
}

inline ParamCellResult scan_cell(double a, double beta, Algorithm algo, const ScanSettings& s, bool spot_check) {
  ParamCellResult r;
  r.a = a;
  r.beta = beta;
  std::optional<DianalyticCubic> f;
  std::array<SpherePoint, 4> crit;
  try {
    f.emplace(make_map(cplx(a, 0.0), cplx(0.0, beta)));
    crit = symmetric_critical_points(a, beta);
  } catch (const std::exception&) {
    r.valid = false;
    r.category = r.convergence_category = r.derivative_category = Category{};
    return r;
  }
  const bool conv = algo != Algorithm::derivative;
  const bool deriv = algo != Algorithm::convergence;
  for (std::size_t p = 0; p < 2; ++p) {
    if (conv) r.convergence[p] = detail::convergence_outcome(*f, crit[p], s.dynamics);
    if (deriv) r.derivative[p] = detail::derivative_outcome(*f, crit[p], s.dynamics);
  }
  if (spot_check) {
    r.spot_checked = true;
    for (std::size_t p = 0; p < 2; ++p) {
      if (conv) {
        const PairOutcome o = detail::convergence_outcome(*f, crit[p + 2], s.dynamics);
        r.spot_check_pass = r.spot_check_pass && o.attracted == r.convergence[p].attracted && o.period == r.convergence[p].period;
      }
      if (deriv) {
        const PairOutcome o = detail::derivative_outcome(*f, crit[p + 2], s.dynamics);
        r.spot_check_pass = r.spot_check_pass && o.attracted == r.derivative[p].attracted;
      }
    }
  }
  if (conv) r.convergence_category = classify_cell(r.convergence);
  if (deriv) r.derivative_category = classify_cell(r.derivative);
  r.category = conv ? r.convergence_category : r.derivative_category;
  r.disagreement = conv && deriv && !(r.convergence_category == r.derivative_category);
  return r;
}

/// Only the representatives c1, c2 of the antipodal critical pairs are
/// iterated; commutation with phi forces the partners' outcomes.
inline ParamGrid scan(const ParamRegion& region, Algorithm algo, const ScanSettings& s = {}) {
  region.validate();
  ParamGrid grid;
  grid.region = region;
  grid.algorithm = algo;
  grid.settings = s;
  const long n = static_cast<long>(region.cells_x) * region.cells_y;
  grid.cells.resize(static_cast<std::size_t>(n));
  parallel_for(n, s.threads, [&](long idx) {
    const int i = static_cast<int>(idx % region.cells_x);
    const int j = static_cast<int>(idx / region.cells_x);
    grid.cells[static_cast<std::size_t>(idx)] =
        scan_cell(region.a_at(i), region.b_at(j), algo, s, detail::spot_check_selected(idx, s.spot_check_fraction));
  });
  return grid;
}

struct SymmetryMismatch {
  int i = 0, j = 0;
  double a = 0.0, beta = 0.0;
  std::string which;     // "-a", "-beta" or "-a,-beta"
  std::string category;  // of cell (i, j), then of the mirror
};

struct SymmetryReport {
  std::size_t cells_compared = 0;
  std::vector<SymmetryMismatch> mismatches;
};

/// Compares every cell with its three mirrors, on every algorithm that ran.
inline SymmetryReport symmetry_check(const ParamGrid& g) {
  if (!g.region.symmetric()) {
    throw std::invalid_argument("symmetry_check: region must be symmetric about both axes");
  }
  SymmetryReport rep;
  const int nx = g.region.cells_x, ny = g.region.cells_y;
  auto cats = [&](const ParamCellResult& c) {
    std::vector<Category> v;
    if (!c.valid) return std::vector<Category>{Category{}};
    if (g.algorithm != Algorithm::derivative) v.push_back(c.convergence_category);
    if (g.algorithm != Algorithm::convergence) v.push_back(c.derivative_category);
    return v;
  };
  auto describe = [](const std::vector<Category>& v) {
    std::string s;
    for (const auto& c : v) s += (s.empty() ? "" : "/") + to_string(c);
    return s;
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const auto& c = g.at(i, j);
      const auto base = cats(c);
      const std::array<std::pair<std::array<int, 2>, const char*>, 3> mirrors{
          {{{nx - 1 - i, j}, "-a"}, {{i, ny - 1 - j}, "-beta"}, {{nx - 1 - i, ny - 1 - j}, "-a,-beta"}}};
      for (const auto& [m, name] : mirrors) {
        ++rep.cells_compared;
        const auto other = cats(g.at(m[0], m[1]));
        if (other != base) {
          rep.mismatches.push_back({i, j, c.a, c.beta, name, describe(base) + " vs " + describe(other)});
        }
      }
    }
  }
  return rep;
}

struct Disagreement {
  int i = 0, j = 0;
  double a = 0.0, beta = 0.0;
  Category convergence, derivative;
  int convergence_max_period = 0;
  double convergence_multiplier_abs = -1.0;  // largest over attracted pairs
};

inline std::vector<Disagreement> disagreements(const ParamGrid& g) {
  std::vector<Disagreement> out;
  for (int j = 0; j < g.region.cells_y; ++j) {
    for (int i = 0; i < g.region.cells_x; ++i) {
      const auto& c = g.at(i, j);
      if (!c.disagreement) continue;
      Disagreement d{i, j, c.a, c.beta, c.convergence_category, c.derivative_category, 0, -1.0};
      for (const auto& p : c.convergence) {
        if (!p.attracted) continue;
        d.convergence_max_period = std::max(d.convergence_max_period, p.period);
        d.convergence_multiplier_abs = std::max(d.convergence_multiplier_abs, p.multiplier_abs);
      }
      out.push_back(d);
    }
  }
  return out;
}

/// Whether a disagreement falls under the known failure modes: a period of 13
/// or more (or beyond max_period), or a cycle too weakly attracting for the
/// derivative sum to reach the floor within its budget,
/// |lambda| >= exp(2 * floor * p / n).
inline bool disagreement_explained(const Disagreement& d, const ScanSettings& s) {
  if (d.convergence_max_period >= 13) return true;
  if (d.convergence_max_period == 0) return true;  // derivative attracted, period not resolved
  const double budget = std::exp(2.0 * s.dynamics.derivative_floor * d.convergence_max_period /
                                 static_cast<double>(s.dynamics.derivative_n));
  return d.convergence_multiplier_abs >= budget;
}

inline Rgb category_color(const Category& c) {
  switch (c.kind) {
    case CategoryKind::invalid: return {0, 0, 0};
    case CategoryKind::all_attracted: return {210, 30, 30};
    case CategoryKind::none_attracted: return {10, 20, 110};
    case CategoryKind::mixed: break;
  }
  const int p = c.min_period;
  if (p <= 0) return {120, 120, 120};
  if (p == 1) return {40, 90, 200};
  if (p >= 13) return {200, 40, 200};
  // 2 -> light blue, 7 -> white, 12 -> bright yellow
  const Rgb light_blue{150, 200, 255}, white{255, 255, 255}, yellow{255, 230, 0};
  if (p <= 7) return mix(light_blue, white, (p - 2) / 5.0);
  return mix(white, yellow, (p - 7) / 5.0);
}

/// Row 0 at the top is the largest beta; column 0 is the smallest a.
inline Image param_image(const ParamGrid& g, bool derivative_view = false) {
  const int nx = g.region.cells_x, ny = g.region.cells_y;
  Image img(nx, ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const auto& c = g.at(i, j);
      const Category& cat = !c.valid ? c.category : derivative_view ? c.derivative_category : c.category;
      img.set(i, ny - 1 - j, category_color(cat));
    }
  }
  return img;
}

inline void emit_param_image(const ParamGrid& g, const std::string& path, bool derivative_view = false) {
  write_png(param_image(g, derivative_view), path);
}

inline void write_param_csv(const ParamGrid& g, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_param_csv: cannot open " + path);
  os.precision(17);
  os << "i,j,a,beta,algorithm,category,min_period,pair0_attracted,pair0_period,pair0_multiplier_abs,"
        "pair1_attracted,pair1_period,pair1_multiplier_abs,disagreement\n";
  auto row = [&](const ParamCellResult& c, int i, int j, const char* algo, const Category& cat,
                 const std::array<PairOutcome, 2>& p) {
    os << i << ',' << j << ',' << c.a << ',' << c.beta << ',' << algo << ',' << to_string(cat) << ','
       << cat.min_period;
    for (const auto& o : p) os << ',' << (o.attracted ? 1 : 0) << ',' << o.period << ',' << o.multiplier_abs;
    os << ',' << (c.disagreement ? 1 : 0) << '\n';
  };
  for (int j = 0; j < g.region.cells_y; ++j) {
    for (int i = 0; i < g.region.cells_x; ++i) {
      const auto& c = g.at(i, j);
      if (g.algorithm != Algorithm::derivative) row(c, i, j, "convergence", c.convergence_category, c.convergence);
      if (g.algorithm != Algorithm::convergence) row(c, i, j, "derivative", c.derivative_category, c.derivative);
    }
  }
  if (!os) throw std::runtime_error("write_param_csv: write failed for " + path);
}

}  // namespace dianalytic
