#pragma once

// CSV trajectories and JSON summaries. Floats use the shortest decimal form
// that round-trips, so identical runs produce identical bytes.

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "chaosctl/error.hpp"
#include "chaosctl/orbits.hpp"
#include "chaosctl/sim.hpp"
#include "chaosctl/stability.hpp"

namespace chaosctl {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf, res.ptr);
}

/// Header `k,x,u,phase,dist`; one row per state, phase 1-based. The last
/// row (k = steps) carries no control, so u and phase are blank.
inline void write_csv(std::ostream& os, const SimulationResult& res,
                      const PeriodicOrbit& orbit) {
  os << "k,x,u,phase,dist\n";
  for (std::size_t k = 0; k < res.states.size(); ++k) {
    os << k << ',' << format_double(res.states[k]) << ',';
    if (k < res.controls.size()) {
      os << format_double(res.controls[k]) << ',';
      if (res.phases[k]) os << (*res.phases[k] + 1);
    } else {
      os << ',';
    }
    os << ',' << format_double(orbit_distance(res, orbit, k)) << '\n';
  }
}

inline void write_csv_file(const std::string& path, const SimulationResult& res,
                           const PeriodicOrbit& orbit) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write_csv(os, res, orbit);
  if (!os) throw Error("failed writing " + path);
}

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

/// Infinite values have no JSON literal; they are emitted as null.
inline Json number_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const PeriodicOrbit& orbit) {
  return Json{{"r", orbit.r0},
              {"period", orbit.period},
              {"points", orbit.points},
              {"multiplier", orbit.multiplier},
              {"min_pair_distance", number_json(orbit.min_pair_distance)}};
}

inline Json to_json(const GainRange& g) {
  return Json{{"lower", number_json(g.lower)},
              {"upper", number_json(g.upper)},
              {"feasible", g.feasible}};
}

inline Json run_metrics(const SimulationResult& res) {
  return Json{{"k0", optional_json(res.k0)},
              {"converged_at", optional_json(res.converged_at)},
              {"converged", res.converged_at.has_value()},
              {"peak_u", res.peak_u},
              {"clamp_count", res.clamp_count},
              {"saturation_count", res.saturation_count},
              {"final_state", res.states.back()}};
}

}  // namespace chaosctl
