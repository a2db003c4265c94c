#pragma once

#include <array>
#include <optional>
#include <vector>

#include "dianalytic/dynamics.hpp"
#include "dianalytic/maps.hpp"

namespace dianalytic {

struct CriticalOutcome {
  SpherePoint point;
  std::optional<CycleDetection> detection;
  int cycle_id = -1;  // index into BasinCatalog::cycles, -1 when free
};

/// Non-repelling cycles found through critical orbits. cycles[i] and
/// cycles[partner[i]] are antipodal; partner[i] == i when the cycle is its
/// own antipodal image.
struct BasinCatalog {
  std::array<SpherePoint, 4> critical;
  std::array<CriticalOutcome, 4> outcomes;
  std::vector<CycleRecord> cycles;
  std::vector<int> partner;

  /// Critical pairs (c_i, c_{i+2}) neither of which is attracted.
  std::vector<int> free_pairs() const {
    std::vector<int> out;
    for (int i = 0; i < 2; ++i) {
      if (outcomes[static_cast<std::size_t>(i)].cycle_id < 0 &&
          outcomes[static_cast<std::size_t>(i + 2)].cycle_id < 0) {
        out.push_back(i);
      }
    }
    return out;
  }
  bool self_antipodal(int id) const { return partner[static_cast<std::size_t>(id)] == id; }
};

inline int find_cycle(const std::vector<CycleRecord>& cycles, const SpherePoint& z, double tol) {
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    for (const auto& p : cycles[i].points) {
      if (chordal(p, z) <= tol) return static_cast<int>(i);
    }
  }
  return -1;
}

/// Runs the convergence algorithm and Newton refinement from each critical
/// point; keeps the non-repelling cycles, deduplicated and antipodally paired.
template <class Map>
BasinCatalog build_basin_catalog(const Map& f, const std::array<SpherePoint, 4>& critical,
                                 const DynamicsSettings& s = {}) {
  BasinCatalog cat;
  cat.critical = critical;
  for (std::size_t i = 0; i < 4; ++i) {
    CriticalOutcome& out = cat.outcomes[i];
    out.point = critical[i];
    out.detection = converge_to_cycle(f, critical[i], s);
    if (!out.detection) continue;
    CycleRecord rec;
    try {
      rec = refine_cycle(f, out.detection->representative, out.detection->period, 1e-12, s);
    } catch (const RefineError&) {
      continue;
    }
    if (rec.cls.kind == CycleKind::repelling) continue;
    int id = find_cycle(cat.cycles, rec.points.front(), s.dedupe_tol);
    if (id < 0 || cat.cycles[static_cast<std::size_t>(id)].period != rec.period) {
      cat.cycles.push_back(std::move(rec));
      id = static_cast<int>(cat.cycles.size()) - 1;
    }
    out.cycle_id = id;
  }
  cat.partner.assign(cat.cycles.size(), -1);
  for (std::size_t i = 0; i < cat.cycles.size(); ++i) {
    cat.partner[i] = find_cycle(cat.cycles, antipodal(cat.cycles[i].points.front()), s.dedupe_tol);
  }
  return cat;
}

inline BasinCatalog build_basin_catalog(const DianalyticCubic& f, const DynamicsSettings& s = {}) {
  return build_basin_catalog(f, critical_points(f), s);
}

}  // namespace dianalytic
