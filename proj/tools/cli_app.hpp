#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dianalytic/dianalytic.hpp"

namespace dianalytic::cli {

struct RunConfig {
  std::string command;
  // map parameters: a = a + a_im i, b = b_re + b i
  double a = 0.0, a_im = 0.0, b = 0.0, b_re = 0.0;
  // render viewport
  std::vector<double> center{0.0, 0.0};
  double width = 4.0;
  int px = 400, py = 0;  // py = 0: square pixels over a square view
  // scan region
  std::vector<double> region{-3.0, 3.0, -3.0, 3.0};
  int cells = 120, cells_y = 0;
  std::string algo = "convergence";
  // budgets
  int max_period = -1;  // -1: 64 for detection, 500 for the evidence non-periodicity test
  int transient = 2000;
  int cap = 20000;
  double tol = 1e-7;
  int derivative_n = 20000;
  double derivative_floor = -200.0;
  std::uint64_t seed = 1;
  int threads = 0;
  // outputs
  std::string out;
  std::string csv;
  std::string palette = "red";
  std::string ring_hue = "angle";
  int overlay = 0;
  int supersample = 1;
  // orbit / evidence points
  std::string z0 = "0,0";
  int n = 100;
  std::vector<std::string> seed_points;
};

/// Parses "x,y" (or "inf") into a sphere point.
inline SpherePoint parse_point(const std::string& s) {
  if (s == "inf" || s == "infinity") return SpherePoint::infinity();
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("expected x,y but got '" + s + "'");
  std::size_t used = 0;
  const std::string xs = s.substr(0, comma), ys = s.substr(comma + 1);
  const double x = std::stod(xs, &used);
  if (used != xs.size()) throw std::invalid_argument("bad number in '" + s + "'");
  const double y = std::stod(ys, &used);
  if (used != ys.size()) throw std::invalid_argument("bad number in '" + s + "'");
  return SpherePoint(cplx(x, y));
}

inline MapParams params_of(const RunConfig& c) { return {cplx(c.a, c.a_im), cplx(c.b_re, c.b)}; }

inline DynamicsSettings dynamics_of(const RunConfig& c) {
  DynamicsSettings d;
  d.transient = c.transient;
  d.iteration_cap = c.cap;
  d.max_period = c.max_period > 0 ? c.max_period : 64;
  d.cycle_tol = c.tol;
  d.derivative_n = c.derivative_n;
  d.derivative_floor = c.derivative_floor;
  return d;
}

inline std::string fmt(const SpherePoint& z) { return format_point(z); }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path);
}

inline int cmd_render(const RunConfig& c, std::ostream& out) {
  if (c.center.size() != 2) throw std::invalid_argument("--center expects x,y");
  const DianalyticCubic f = make_map(params_of(c));
  const Viewport vp({c.center[0], c.center[1]}, c.width, c.px, c.py > 0 ? c.py : c.px);
  RenderSettings s;
  s.dynamics = dynamics_of(c);
  s.herman.seed = c.seed;
  s.supersample = c.supersample;
  s.threads = c.threads;
  Palette pal;
  if (c.palette == "white") {
    pal.non_convergent = Palette::NonConvergent::white;
  } else if (c.palette != "red") {
    throw std::invalid_argument("--palette must be red or white");
  }
  if (c.ring_hue == "radial") {
    pal.ring_hue = Palette::RingHue::radial;
  } else if (c.ring_hue != "angle") {
    throw std::invalid_argument("--ring-hue must be angle or radial");
  }
  const PlaneGrid g = render_plane(f, vp, s);
  std::array<std::vector<SpherePoint>, 4> ov;
  if (c.overlay > 0) ov = postcritical_overlay(f, c.overlay);
  emit_image(g, pal, c.out, c.overlay > 0 ? &ov : nullptr);
  if (!c.csv.empty()) write_plane_csv(g, c.csv);
  out << "wrote " << c.out << " (" << vp.pixels_x << "x" << vp.pixels_y << ")\n";
  out << "basin cycles: " << g.catalog.cycles.size() << ", ring geometry: " << (g.ring ? "yes" : "no") << "\n";
  for (std::size_t i = 0; i < g.catalog.cycles.size(); ++i) {
    out << "  basin " << i << " (period " << g.catalog.cycles[i].period << "): " << g.count(PixelTag::basin, static_cast<int>(i))
        << " pixels\n";
  }
  out << "  ring_like: " << g.count(PixelTag::ring_like) << " pixels\n";
  out << "  non_convergent: " << g.count(PixelTag::non_convergent) << " pixels\n";
  return 0;
}

inline std::string stem_of(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
  return path.substr(0, dot);
}

inline int cmd_scan(const RunConfig& c, std::ostream& out) {
  if (c.region.size() != 4) throw std::invalid_argument("--region expects a_min,a_max,beta_min,beta_max");
  ParamRegion r{c.region[0], c.region[1], c.region[2], c.region[3], c.cells, c.cells_y > 0 ? c.cells_y : c.cells};
  const Algorithm algo = parse_algorithm(c.algo);
  ScanSettings s;
  s.dynamics = dynamics_of(c);
  s.threads = c.threads;
  const ParamGrid g = scan(r, algo, s);
  emit_param_image(g, c.out, algo == Algorithm::derivative);
  const std::string stem = stem_of(c.out);
  if (algo == Algorithm::both) emit_param_image(g, stem + "_derivative.png", true);
  write_param_csv(g, c.csv.empty() ? stem + ".csv" : c.csv);
  std::size_t invalid = 0;
  for (const auto& cell : g.cells) invalid += cell.valid ? 0 : 1;
  const auto dis = disagreements(g);
  std::ostringstream dl;
  dl.precision(12);
  dl << "i,j,a,beta,convergence,derivative,convergence_max_period,convergence_multiplier_abs,explained\n";
  for (const auto& d : dis) {
    dl << d.i << ',' << d.j << ',' << d.a << ',' << d.beta << ',' << to_string(d.convergence) << ','
       << to_string(d.derivative) << ',' << d.convergence_max_period << ',' << d.convergence_multiplier_abs << ','
       << (disagreement_explained(d, s) ? 1 : 0) << '\n';
  }
  if (algo == Algorithm::both) write_text(stem + "_disagreements.csv", dl.str());
  out << "wrote " << c.out << " (" << r.cells_x << "x" << r.cells_y << " cells, algorithm " << to_string(algo) << ")\n";
  out << "invalid cells: " << invalid << "\n";
  out << "pair spot checks: " << g.spot_checks() << ", failures: " << g.spot_check_failures() << "\n";
  if (r.symmetric()) {
    const auto sym = symmetry_check(g);
    out << "symmetry mismatches: " << sym.mismatches.size() << " of " << sym.cells_compared << "\n";
  }
  if (algo == Algorithm::both) {
    out << "disagreements: " << dis.size() << "\n";
    for (const auto& d : dis) {
      out << "  a=" << d.a << " beta=" << d.beta << " convergence " << to_string(d.convergence) << " derivative "
          << to_string(d.derivative) << "\n";
    }
  }
  return 0;
}

inline std::string cycles_report(const DianalyticCubic& f, const DynamicsSettings& s) {
  std::ostringstream os;
  os.precision(10);
  const auto crit = critical_points(f);
  os << "critical points:\n";
  for (std::size_t i = 0; i < 4; ++i) os << "  c" << i + 1 << " = " << fmt(crit[i]) << "\n";
  os << "fixed points:\n";
  for (const auto& fp : fixed_points(f)) {
    os << "  " << fmt(fp.point) << "  multiplier " << fmt(SpherePoint(fp.multiplier)) << "  |m| = " << std::abs(fp.multiplier)
       << "  " << to_string(classify_multiplier(fp.multiplier, s.indifferent_tol, s.q_max)) << "\n";
  }
  const BasinCatalog cat = build_basin_catalog(f, crit, s);
  os << "cycles found from critical orbits: " << cat.cycles.size() << "\n";
  for (std::size_t i = 0; i < cat.cycles.size(); ++i) {
    const auto& c = cat.cycles[i];
    os << "  cycle " << i << ": period " << c.period << ", |lambda| = " << std::abs(c.multiplier) << ", "
       << to_string(c.cls);
    if (cat.self_antipodal(static_cast<int>(i))) {
      os << ", self-antipodal (B = phi(B))";
    } else if (cat.partner[i] >= 0) {
      os << ", antipodal partner " << cat.partner[i];
    }
    os << "\n";
    for (const auto& p : c.points) os << "    " << fmt(p) << "\n";
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& o = cat.outcomes[i];
    os << "  c" << i + 1 << ": " << (o.cycle_id >= 0 ? "attracted to cycle " + std::to_string(o.cycle_id) : "free") << "\n";
  }
  return os.str();
}

inline int cmd_cycles(const RunConfig& c, std::ostream& out) {
  const DianalyticCubic f = make_map(params_of(c));
  const std::string rep = cycles_report(f, dynamics_of(c));
  out << rep;
  if (!c.out.empty()) write_text(c.out, rep);
  return 0;
}

inline int cmd_evidence(const RunConfig& c, std::ostream& out) {
  const DianalyticCubic f = make_map(params_of(c));
  HermanSettings s;
  s.dynamics = dynamics_of(c);
  s.dynamics.max_period = 64;
  if (c.max_period > 0) s.nonperiodic_max_period = c.max_period;
  s.seed = c.seed;
  for (const auto& p : c.seed_points) s.extra_seeds.push_back(parse_point(p));
  const HermanEvidenceReport rep = gather_evidence(f, s);
  out << summary(rep);
  write_text(c.out, to_key_value(rep));
  out << "wrote " << c.out << "\n";
  return 0;
}

inline int cmd_orbit(const RunConfig& c, std::ostream& out) {
  if (c.n < 0) throw std::invalid_argument("--n must be non-negative");
  const DianalyticCubic f = make_map(params_of(c));
  const Orbit o = iterate(f, parse_point(c.z0), c.n);
  std::ostringstream os;
  os.precision(17);
  os << "k,re,im,chordal_step\n";
  for (std::size_t k = 0; k < o.points.size(); ++k) {
    const auto& z = o.points[k];
    const double step = k == 0 ? 0.0 : chordal(o.points[k - 1], z);
    if (z.is_infinite()) {
      os << k << ",inf,inf," << step << "\n";
    } else {
      os << k << ',' << z.value().real() << ',' << z.value().imag() << ',' << step << "\n";
    }
  }
  write_text(c.out, os.str());
  out << "wrote " << c.out << " (" << o.points.size() << " points)\n";
  return 0;
}

/// Adds every subcommand and its flags, bound to `c`.
inline void build_app(CLI::App& app, RunConfig& c) {
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "key=value config file; command-line flags take precedence");
  app.fallthrough();
  auto map_flags = [&c](CLI::App* sub) {
    sub->add_option("--a", c.a, "real part of a");
    sub->add_option("--b", c.b, "imaginary part of b (b = beta i)");
    sub->add_option("--a-im", c.a_im, "imaginary part of a");
    sub->add_option("--b-re", c.b_re, "real part of b");
  };
  auto budget_flags = [&c](CLI::App* sub) {
    sub->add_option("--max-period", c.max_period, "largest period searched");
    sub->add_option("--transient", c.transient, "iterates discarded before cycle checks");
    sub->add_option("--cap", c.cap, "iteration cap");
    sub->add_option("--tol", c.tol, "chordal recurrence tolerance");
    sub->add_option("--derivative-n", c.derivative_n, "terms of the derivative sum");
    sub->add_option("--derivative-floor", c.derivative_floor, "attraction threshold of the derivative sum");
  };
  auto common = [&c](CLI::App* sub, const std::string& default_out) {
    c.out = default_out;
    sub->add_option("--out", c.out, "output path");
    sub->add_option("--seed", c.seed, "seed for randomized sampling");
    sub->add_option("--threads", c.threads, "worker threads (0: DIANALYTIC_THREADS or hardware)")
        ->envname("DIANALYTIC_THREADS");
  };

  auto* render = app.add_subcommand("render", "render a dynamical plane");
  map_flags(render);
  budget_flags(render);
  render->add_option("--center", c.center, "view center x,y")->delimiter(',')->expected(2);
  render->add_option("--width", c.width, "view width");
  render->add_option("--px", c.px, "pixels across");
  render->add_option("--py", c.py, "pixels down (default: px)");
  render->add_option("--csv", c.csv, "per-pixel CSV dump");
  render->add_option("--palette", c.palette, "non-convergent color: red or white");
  render->add_option("--ring-hue", c.ring_hue, "ring coloring: angle or radial");
  render->add_option("--overlay", c.overlay, "draw this many postcritical iterates (0: none)");
  render->add_option("--supersample", c.supersample, "n x n samples per pixel");

  auto* scan_cmd = app.add_subcommand("scan", "scan the (a, beta) parameter plane");
  budget_flags(scan_cmd);
  scan_cmd->add_option("--region", c.region, "a_min,a_max,beta_min,beta_max")->delimiter(',')->expected(4);
  scan_cmd->add_option("--cells", c.cells, "cells along a (and beta unless --cells-y)");
  scan_cmd->add_option("--cells-y", c.cells_y, "cells along beta");
  scan_cmd->add_option("--algo", c.algo, "derivative, convergence or both");
  scan_cmd->add_option("--csv", c.csv, "grid CSV path (default: next to --out)");

  auto* cycles = app.add_subcommand("cycles", "critical points, fixed points and attracting cycles");
  map_flags(cycles);
  budget_flags(cycles);

  auto* evidence = app.add_subcommand("evidence", "Herman ring evidence report");
  map_flags(evidence);
  budget_flags(evidence);
  evidence->add_option("--seed-point", c.seed_points, "extra interior seed x,y (repeatable)");

  auto* orbit = app.add_subcommand("orbit", "dump an orbit as CSV");
  map_flags(orbit);
  orbit->add_option("--z0", c.z0, "start point x,y or inf");
  orbit->add_option("--n", c.n, "number of iterates");

  common(render, "render.png");
  common(scan_cmd, "scan.png");
  common(cycles, "cycles.txt");
  common(evidence, "evidence.txt");
  common(orbit, "orbit.csv");
  // each subcommand has its own default output; reset once the chosen one is known
  for (auto* sub : {render, scan_cmd, cycles, evidence, orbit}) {
    sub->preparse_callback([&c, sub](std::size_t) {
      c.command = sub->get_name();
      if (c.command == "render") c.out = "render.png";
      if (c.command == "scan") c.out = "scan.png";
      if (c.command == "cycles") c.out = "cycles.txt";
      if (c.command == "evidence") c.out = "evidence.txt";
      if (c.command == "orbit") c.out = "orbit.csv";
    });
  }
}

/// Defaulted settings of one subcommand as key=value lines.
inline std::string effective_config(const CLI::App& app, const std::string& command) {
  std::istringstream all(app.config_to_str(true, false));
  std::ostringstream out;
  const std::string prefix = command + ".";
  for (std::string line; std::getline(all, line);) {
    if (line.rfind(prefix, 0) == 0) out << line << "\n";
  }
  return out.str();
}

/// Parses argv, runs the command and writes the effective config to
/// <out>.ini. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"numerical laboratory for antipode-preserving cubic rational maps"};
  RunConfig c;
  build_app(app, c);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  try {
    int rc = 1;
    if (c.command == "render") rc = cmd_render(c, out);
    if (c.command == "scan") rc = cmd_scan(c, out);
    if (c.command == "cycles") rc = cmd_cycles(c, out);
    if (c.command == "evidence") rc = cmd_evidence(c, out);
    if (c.command == "orbit") rc = cmd_orbit(c, out);
    if (rc == 0 && !c.out.empty()) write_text(c.out + ".ini", effective_config(app, c.command));
    return rc;
  } catch (const ParameterError& e) {
    err << c.command << ": invalid parameters: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << c.command << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dianalytic::cli
