#pragma once

// Periodic orbits of the free map: roots of f^m(x) - x, sub-period
// rejection, and selection of the cycle embedded in the attractor.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chaosctl/dynamics.hpp"
#include "chaosctl/error.hpp"

namespace chaosctl {

struct PeriodicOrbit {
  int period = 0;
  /// Forward-iteration order, starting from the smallest point.
  std::vector<double> points;
  double r0 = 0.0;
  double multiplier = 0.0;
  /// Smallest |p_i - p_j| over i != j; infinity for a fixed point.
  double min_pair_distance = std::numeric_limits<double>::infinity();

  [[nodiscard]] std::size_t size() const { return points.size(); }
  [[nodiscard]] double point(std::size_t i) const {
    return points[i % points.size()];
  }
};

struct OrbitFinderOptions {
  std::size_t seeds = 4096;
  double dedup_tol = 1e-8;
  std::size_t attractor_steps = 10000;
  std::size_t attractor_transient = 1000;
  double attractor_radius = 1e-3;
  int newton_iterations = 100;
};

/// f^m(x) and its derivative by the chain rule.
inline std::pair<double, double> composite(const ParamMap& map, double r,
                                           int m, double x) {
  double value = x;
  double slope = 1.0;
  for (int j = 0; j < m; ++j) {
    slope *= map.deriv_x(value, r);
    value = map.eval(value, r);
  }
  return {value, slope};
}

namespace detail {

inline double residual(const ParamMap& map, double r, int m, double x) {
  return composite(map, r, m, x).first - x;
}

// Newton on g(x) = f^m(x) - x, falling back to bisection whenever the step
// leaves the bracket [lo, hi] where g changes sign.
inline double bracketed_newton(const ParamMap& map, double r, int m, double lo,
                               double hi, double tol, int max_iter) {
  double glo = residual(map, r, m, lo);
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    auto [fx, dfx] = composite(map, r, m, x);
    const double g = fx - x;
    if (g == 0.0) return x;
    if ((g < 0.0) == (glo < 0.0)) {
      lo = x;
      glo = g;
    } else {
      hi = x;
    }
    const double dg = dfx - 1.0;
    double next = (dg != 0.0) ? x - g / dg : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= tol * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

inline std::optional<double> free_newton(const ParamMap& map, double r, int m,
                                         double x, double tol, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    auto [fx, dfx] = composite(map, r, m, x);
    const double dg = dfx - 1.0;
    if (dg == 0.0 || !std::isfinite(dg)) return std::nullopt;
    const double step = (fx - x) / dg;
    x -= step;
    if (!std::isfinite(x) || !map.state_domain.contains(x, 1e-12)) {
      return std::nullopt;
    }
    if (std::abs(step) <= tol * std::max(1.0, std::abs(x))) return x;
  }
  return std::nullopt;
}

inline void insert_unique(std::vector<double>& roots, double x, double tol) {
  for (double y : roots) {
    if (std::abs(x - y) < tol) return;
  }
  roots.push_back(x);
}

}  // namespace detail

/// Every root of f^m(x) - x in the state domain, sub-periods included,
/// sorted ascending.
inline std::vector<double> composite_roots(const ParamMap& map, double r, int m,
                                           double tol = 1e-12,
                                           const OrbitFinderOptions& opt = {}) {
  if (m < 1) throw PreconditionError("period must be >= 1");
  const Interval dom = map.state_domain;
  const std::size_t seeds =
      std::max<std::size_t>(opt.seeds, std::size_t{8} << m);
  const double h = dom.width() / static_cast<double>(seeds);
  std::vector<double> roots;
  const double accept = 1e-10;

  double x_prev = dom.lo;
  double g_prev = detail::residual(map, r, m, x_prev);
  if (g_prev == 0.0) roots.push_back(x_prev);
  for (std::size_t j = 1; j <= seeds; ++j) {
    const double x = (j == seeds) ? dom.hi : dom.lo + h * static_cast<double>(j);
    const double g = detail::residual(map, r, m, x);
    if (g == 0.0) {
      detail::insert_unique(roots, x, opt.dedup_tol);
    } else if (g_prev != 0.0 && (g < 0.0) != (g_prev < 0.0)) {
      const double root = detail::bracketed_newton(map, r, m, x_prev, x, tol,
                                                   opt.newton_iterations);
      detail::insert_unique(roots, root, opt.dedup_tol);
    }
    x_prev = x;
    g_prev = g;
  }
  // Tangential roots produce no sign change; plain Newton from each seed
  // picks them up.
  for (std::size_t j = 0; j <= seeds; ++j) {
    const double x = dom.lo + h * static_cast<double>(j);
    if (auto root = detail::free_newton(map, r, m, x, tol, opt.newton_iterations)) {
      if (std::abs(detail::residual(map, r, m, *root)) <= accept) {
        detail::insert_unique(roots, dom.clamp(*root), opt.dedup_tol);
      }
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

inline double orbit_multiplier(const ParamMap& map, const PeriodicOrbit& orbit) {
  double product = 1.0;
  for (double p : orbit.points) product *= map.deriv_x(p, orbit.r0);
  return product;
}

inline double min_pair_distance(const std::vector<double>& points) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      best = std::min(best, std::abs(points[i] - points[j]));
    }
  }
  return best;
}

/// Sorted samples of a free trajectory after a transient, used as a proxy
/// for the attractor.
inline std::vector<double> attractor_sample(const ParamMap& map, double r,
                                            const OrbitFinderOptions& opt = {}) {
  const double start = map.state_domain.lo + 0.1234567 * map.state_domain.width();
  auto traj = iterate_free(map, start, r,
                           static_cast<long>(opt.attractor_transient + opt.attractor_steps),
                           NoiseSpec{});
  std::vector<double> sample(traj.states.end() - static_cast<long>(opt.attractor_steps),
                             traj.states.end());
  std::sort(sample.begin(), sample.end());
  return sample;
}

inline double nearest_distance(const std::vector<double>& sorted, double x) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  double best = std::numeric_limits<double>::infinity();
  if (it != sorted.end()) best = std::abs(*it - x);
  if (it != sorted.begin()) best = std::min(best, std::abs(*std::prev(it) - x));
  return best;
}

inline PeriodicOrbit make_orbit(const ParamMap& map, double r,
                                std::vector<double> points) {
  PeriodicOrbit orbit;
  orbit.period = static_cast<int>(points.size());
  orbit.points = std::move(points);
  orbit.r0 = r;
  orbit.multiplier = orbit_multiplier(map, orbit);
  orbit.min_pair_distance = min_pair_distance(orbit.points);
  return orbit;
}

namespace detail {

inline bool in_attractor(const std::vector<double>& sample,
                         const std::vector<double>& points, double radius) {
  return std::all_of(points.begin(), points.end(), [&](double p) {
    return nearest_distance(sample, p) < radius;
  });
}

// A lone cycle is returned as is, even inside a periodic window. Among
// coexisting cycles keep those inside the attractor; tie-break on the
// smallest first point (cycles are stored smallest-first).
inline PeriodicOrbit select_cycle(const ParamMap& map, double r, int m,
                                  std::vector<std::vector<double>> cycles,
                                  const OrbitFinderOptions& opt) {
  if (cycles.empty()) {
    throw NoOrbitError("no period-" + std::to_string(m) + " cycle at r = " +
                       std::to_string(r));
  }
  std::sort(cycles.begin(), cycles.end());
  if (cycles.size() == 1) return make_orbit(map, r, cycles.front());
  auto sample = attractor_sample(map, r, opt);
  for (auto& c : cycles) {
    if (in_attractor(sample, c, opt.attractor_radius)) {
      return make_orbit(map, r, std::move(c));
    }
  }
  throw NoOrbitError("no attractor-embedded period-" + std::to_string(m) +
                     " cycle at r = " + std::to_string(r));
}

}  // namespace detail

/// Interior fixed point of the map (the trivial state x = 0 is excluded).
inline PeriodicOrbit find_fixed_point(const ParamMap& map, double r,
                                      double tol = 1e-12,
                                      const OrbitFinderOptions& opt = {}) {
  std::vector<std::vector<double>> cycles;
  for (double x : composite_roots(map, r, 1, tol, opt)) {
    if (std::abs(x) > 1e-12) cycles.push_back({x});
  }
  if (cycles.empty()) {
    throw NoRootError("no interior fixed point at r = " + std::to_string(r));
  }
  if (cycles.size() == 1) return make_orbit(map, r, cycles.front());
  return detail::select_cycle(map, r, 1, std::move(cycles), opt);
}

/// A period-m cycle of the free map at parameter r, with minimal period m.
inline PeriodicOrbit find_upo(const ParamMap& map, double r, int m,
                              double tol = 1e-12,
                              const OrbitFinderOptions& opt = {}) {
  if (m < 1) throw PreconditionError("period must be >= 1");
  if (!(tol > 0.0)) throw PreconditionError("tolerance must be positive");
  if (m == 1) return find_fixed_point(map, r, tol, opt);

  std::vector<double> genuine;
  for (double x : composite_roots(map, r, m, tol, opt)) {
    bool sub_period = false;
    for (int d = 1; d < m && !sub_period; ++d) {
      if (m % d == 0 &&
          std::abs(composite(map, r, d, x).first - x) <= opt.dedup_tol) {
        sub_period = true;
      }
    }
    if (!sub_period) genuine.push_back(x);
  }

  auto nearest_root = [&](double y) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < genuine.size(); ++j) {
      if (std::abs(genuine[j] - y) < std::abs(genuine[best] - y)) best = j;
    }
    return best;
  };

  std::vector<bool> used(genuine.size(), false);
  std::vector<std::vector<double>> cycles;
  for (std::size_t s = 0; s < genuine.size(); ++s) {
    if (used[s]) continue;
    std::vector<double> cycle{genuine[s]};
    std::vector<std::size_t> members{s};
    bool closed = true;
    for (int step = 1; step < m; ++step) {
      const double image = map.eval(cycle.back(), r);
      const std::size_t j = nearest_root(image);
      if (std::abs(genuine[j] - image) > 1e-8) {
        closed = false;
        break;
      }
      cycle.push_back(genuine[j]);
      members.push_back(j);
    }
    if (!closed ||
        std::abs(map.eval(cycle.back(), r) - cycle.front()) > 1e-8 ||
        min_pair_distance(cycle) <= opt.dedup_tol) {
      used[s] = true;
      continue;
    }
    for (std::size_t j : members) used[j] = true;
    auto smallest = std::min_element(cycle.begin(), cycle.end());
    std::rotate(cycle.begin(), smallest, cycle.end());
    cycles.push_back(std::move(cycle));
  }
  return detail::select_cycle(map, r, m, std::move(cycles), opt);
}

/// Delay-embedded orbit vector (p_i, p_{i-1}, ..., p_{i-m}) of length m+1,
/// 0-based phase i.
inline std::vector<double> delay_vector(const PeriodicOrbit& orbit, std::size_t i) {
  const std::size_t m = orbit.size();
  std::vector<double> v(m + 1);
  for (std::size_t j = 0; j <= m; ++j) v[j] = orbit.point(i + m - j % m);
  return v;
}

/// min_{i != j} ||P_i - P_j|| over the delay-embedded orbit vectors.
inline double min_delay_distance(const PeriodicOrbit& orbit) {
  const std::size_t m = orbit.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const auto pi = delay_vector(orbit, i);
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto pj = delay_vector(orbit, j);
      double s = 0.0;
      for (std::size_t t = 0; t <= m; ++t) s += (pi[t] - pj[t]) * (pi[t] - pj[t]);
      best = std::min(best, std::sqrt(s));
    }
  }
  return best;
}

/// Index of the orbit point nearest to value.
inline std::size_t anchor_index(const PeriodicOrbit& orbit, double value) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < orbit.size(); ++j) {
    if (std::abs(orbit.points[j] - value) < std::abs(orbit.points[best] - value)) {
      best = j;
    }
  }
  return best;
}

/// Maps gains labelled g_1..g_m, with g_1 belonging to the orbit point nearest
/// `anchor` and later labels following forward iteration, onto the orbit's
/// storage order.
inline std::vector<double> align_gains(const PeriodicOrbit& orbit,
                                       const std::vector<double>& labelled,
                                       double anchor) {
  if (labelled.size() != orbit.size()) {
    throw DimensionMismatch("expected " + std::to_string(orbit.size()) +
                            " gains, got " + std::to_string(labelled.size()));
  }
  const std::size_t a = anchor_index(orbit, anchor);
  std::vector<double> out(orbit.size());
  for (std::size_t j = 0; j < orbit.size(); ++j) {
    out[(a + j) % orbit.size()] = labelled[j];
  }
  return out;
}

/// Storage index of the orbit point carrying label `label` (1-based).
inline std::size_t labelled_index(const PeriodicOrbit& orbit, std::size_t label,
                                  double anchor) {
  if (label < 1 || label > orbit.size()) {
    throw PreconditionError("orbit label out of range");
  }
  return (anchor_index(orbit, anchor) + label - 1) % orbit.size();
}

}  // namespace chaosctl
