#pragma once

// Closed-loop simulation x_{k+1} = f(x_k, r0 + u_k) + noise under any
// ControlLaw, with effort handling, convergence detection and run metrics.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "chaosctl/control.hpp"
#include "chaosctl/dynamics.hpp"
#include "chaosctl/error.hpp"
#include "chaosctl/orbits.hpp"

namespace chaosctl {

enum class SaturationMode { Strict, Clamp };

struct SimulationConfig {
  SimulationConfig() = default;
  SimulationConfig(ParamMap m, ControlLaw l) : map(std::move(m)), law(std::move(l)) {}

  ParamMap map;
  ControlLaw law;
  double x0 = 0.5;
  long steps = 1000;
  NoiseSpec noise;
  double convergence_tol = 1e-6;
  /// 0 selects 4m.
  int convergence_window = 0;
  SaturationMode saturation = SaturationMode::Strict;
  /// Optional states x_{-1}, x_{-2}, ... preceding x0.
  std::vector<double> initial_history;
};

struct SimulationResult {
  std::vector<double> states;
  std::vector<double> controls;
  std::vector<std::optional<std::size_t>> phases;
  std::optional<long> k0;
  std::optional<long> converged_at;
  double peak_u = 0.0;
  std::size_t clamp_count = 0;
  std::size_t saturation_count = 0;
};

/// Default effort bound for the logistic map: min(0.2, 4 - r0).
inline double default_delta(const ParamMap& map, double r0) {
  return std::min(0.2, map.max_parameter - r0);
}

inline double nearest_orbit_distance(const PeriodicOrbit& orbit, double x) {
  double best = std::numeric_limits<double>::infinity();
  for (double p : orbit.points) best = std::min(best, std::abs(x - p));
  return best;
}

/// Distance of x_k to the phase-matched component when a phase is recorded
/// for step k, to the nearest component otherwise.
inline double orbit_distance(const SimulationResult& res, const PeriodicOrbit& orbit,
                             std::size_t k) {
  const double x = res.states[k];
  if (k < res.phases.size() && res.phases[k]) {
    return std::abs(x - orbit.points[*res.phases[k]]);
  }
  return nearest_orbit_distance(orbit, x);
}

inline std::optional<long> detect_convergence(const SimulationResult& res,
                                              const PeriodicOrbit& orbit, double tol,
                                              int window) {
  if (!res.k0 || window < 1) return std::nullopt;
  long run = 0;
  for (std::size_t k = static_cast<std::size_t>(*res.k0); k < res.states.size(); ++k) {
    if (orbit_distance(res, orbit, k) < tol) {
      if (++run >= window) return static_cast<long>(k) - window + 1;
    } else {
      run = 0;
    }
  }
  return std::nullopt;
}

inline SimulationResult run(const SimulationConfig& cfg) {
  if (cfg.steps < 1) throw PreconditionError("steps must be >= 1");
  if (!(cfg.convergence_tol > 0.0)) throw PreconditionError("convergence_tol must be positive");
  if (!cfg.map.state_domain.contains(cfg.x0)) throw DomainError("x0 outside the state domain");
  const PeriodicOrbit& orbit = cfg.law.orbit;
  const double r0 = orbit.r0;
  if (std::abs(cfg.map.nominal_r0 - r0) > 1e-12) {
    throw PreconditionError("orbit parameter differs from the map's nominal r0");
  }
  const int window =
      cfg.convergence_window > 0 ? cfg.convergence_window : 4 * orbit.period;

  Controller ctrl(cfg.law);
  ctrl.seed_history(cfg.initial_history);
  AdditiveNoise noise(cfg.noise);
  const double delta = cfg.law.delta;
  const bool strict = cfg.saturation == SaturationMode::Strict;

  SimulationResult res;
  const auto n = static_cast<std::size_t>(cfg.steps);
  res.states.reserve(n + 1);
  res.controls.reserve(n);
  res.phases.reserve(n);
  res.states.push_back(cfg.x0);
  double x = cfg.x0;
  for (long k = 0; k < cfg.steps; ++k) {
    const auto prop = ctrl.propose(k, x);
    double u = prop.u;
    if (std::abs(u) > delta) {
      if (strict) {
        throw EffortViolation("|u_" + std::to_string(k) + "| = " +
                              std::to_string(std::abs(u)) + " exceeds delta = " +
                              std::to_string(delta));
      }
      u = std::copysign(delta, u);
      ++res.saturation_count;
    }
    if (r0 + u > cfg.map.max_parameter) {
      if (strict) {
        throw ParameterRangeError("r0 + u_" + std::to_string(k) + " = " +
                                  std::to_string(r0 + u) + " exceeds " +
                                  std::to_string(cfg.map.max_parameter));
      }
      u = cfg.map.max_parameter - r0;
      ++res.saturation_count;
    }
    ctrl.commit(u);
    const double r = r0 + u;
    x = settle_state(cfg.map, cfg.map.eval(x, r), r, noise, res.clamp_count);
    res.controls.push_back(u);
    res.phases.push_back(prop.phase);
    res.states.push_back(x);
    res.peak_u = std::max(res.peak_u, std::abs(u));
  }
  res.k0 = ctrl.first_activation();
  res.converged_at = detect_convergence(res, orbit, cfg.convergence_tol, window);
  return res;
}

inline std::optional<long> waiting_time(const SimulationResult& res) { return res.k0; }

/// Fraction of steps from k0 on (from 0 if never activated) whose state is
/// within `tube` of the nearest orbit component.
inline double lock_fraction(const SimulationResult& res, const PeriodicOrbit& orbit,
                            double tube) {
  if (!(tube > 0.0)) throw PreconditionError("tube must be positive");
  const std::size_t start = res.k0 ? static_cast<std::size_t>(*res.k0) : 0;
  if (start >= res.states.size()) return 0.0;
  std::size_t inside = 0;
  for (std::size_t k = start; k < res.states.size(); ++k) {
    if (nearest_orbit_distance(orbit, res.states[k]) < tube) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(res.states.size() - start);
}

/// Activated, and every state from k0 on is within `tube` of the orbit.
[[nodiscard]] inline bool stays_locked(const SimulationResult& res, const PeriodicOrbit& orbit,
                                       double tube) {
  return res.k0 && lock_fraction(res, orbit, tube) == 1.0;
}

/// d_l = |x_{k0 + l m} - p|, with p the component matched at k0.
inline std::vector<double> cycle_distances(const SimulationResult& res,
                                           const PeriodicOrbit& orbit) {
  std::vector<double> d;
  if (!res.k0) return d;
  const auto k0 = static_cast<std::size_t>(*res.k0);
  const auto phase = res.phases[k0];
  const double p = phase ? orbit.points[*phase] : orbit.points[0];
  for (std::size_t k = k0; k < res.states.size(); k += orbit.size()) {
    d.push_back(phase ? std::abs(res.states[k] - p)
                      : nearest_orbit_distance(orbit, res.states[k]));
  }
  return d;
}

struct BatchOutcome {
  std::optional<SimulationResult> result;
  std::string error;

  [[nodiscard]] bool ok() const { return result.has_value(); }
};

/// Runs every configuration; outcomes are index-aligned with the input and
/// failures become error records.
inline std::vector<BatchOutcome> batch(const std::vector<SimulationConfig>& configs,
                                       unsigned threads = 0) {
  std::vector<BatchOutcome> out(configs.size());
  if (configs.empty()) return out;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(configs.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        out[i].result = run(configs[i]);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace chaosctl
