#pragma once

// Derivative-free search for phase-locked delayed-feedback gain tuples whose
// closed-loop monodromy is spectrally stable.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "chaosctl/dynamics.hpp"
#include "chaosctl/error.hpp"
#include "chaosctl/orbits.hpp"
#include "chaosctl/stability.hpp"

namespace chaosctl {

enum class DelayLaw { Dfc, Edfc };

struct SearchConfig {
  double r = 3.62;
  int m = 4;
  DelayLaw law = DelayLaw::Dfc;
  double R = 0.0;
  /// Per-gain bounds in orbit storage order; empty means [-10, 10] for all.
  std::vector<Interval> bounds;
  std::size_t budget = 20000;
  std::uint64_t seed = 0;
  double target_radius = 0.999;
  /// Gains held fixed during the search (storage order); empty means none.
  std::vector<std::optional<double>> frozen;
  /// Golden-section evaluations per coordinate line search.
  int line_evaluations = 12;
  int sweeps = 8;
};

struct SearchResult {
  std::vector<double> gains;
  double radius = 0.0;
  /// Same spectrum recomputed from the explicit Jacobian product.
  double matrix_radius = 0.0;
  std::size_t evaluations = 0;
};

namespace detail {

class BudgetExhausted {};

class GainObjective {
 public:
  GainObjective(const ParamMap& map, const PeriodicOrbit& orbit, double R,
                std::size_t budget)
      : map_(map), orbit_(orbit), R_(R), budget_(budget) {}

  double operator()(const std::vector<double>& gains) {
    if (count_ >= budget_) throw BudgetExhausted{};
    ++count_;
    try {
      return closed_loop_radius(map_, orbit_, gains, R_);
    } catch (const ConvergenceFailure&) {
      return std::numeric_limits<double>::infinity();
    }
  }

  [[nodiscard]] std::size_t count() const { return count_; }

 private:
  const ParamMap& map_;
  const PeriodicOrbit& orbit_;
  double R_;
  std::size_t budget_;
  std::size_t count_ = 0;
};

}  // namespace detail

/// Random multi-start with coordinate-wise golden-section refinement of the
/// closed-loop spectral radius. Stops at the first tuple below
/// target_radius that the explicit matrix route confirms, so a larger budget
/// with the same seed replays the same evaluations and finds the same tuple.
inline std::optional<SearchResult> search_gains(const SearchConfig& cfg,
                                                const ParamMap& map,
                                                const PeriodicOrbit& orbit) {
  const std::size_t m = orbit.size();
  if (static_cast<int>(m) != cfg.m) throw PreconditionError("orbit period differs from cfg.m");
  if (std::abs(orbit.r0 - cfg.r) > 1e-9) throw PreconditionError("orbit parameter differs from cfg.r");
  if (!(cfg.target_radius > 0.0 && cfg.target_radius < 1.0)) {
    throw PreconditionError("target_radius must lie in (0, 1)");
  }
  const double R = cfg.law == DelayLaw::Edfc ? cfg.R : 0.0;
  if (!(R >= 0.0 && R < 1.0)) throw PreconditionError("R must lie in [0, 1)");

  std::vector<Interval> bounds = cfg.bounds;
  if (bounds.empty()) bounds.assign(m, Interval{-10.0, 10.0});
  if (bounds.size() != m) throw DimensionMismatch("one bound per gain required");
  for (const auto& b : bounds) {
    if (!(b.lo <= b.hi)) throw PreconditionError("empty gain bound");
  }
  std::vector<std::optional<double>> frozen = cfg.frozen;
  frozen.resize(m);
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < m; ++i) {
    if (!frozen[i]) free.push_back(i);
  }

  detail::GainObjective objective(map, orbit, R, cfg.budget);
  NoiseStream rng(cfg.seed);

  std::optional<SearchResult> found;
  auto accept = [&](const std::vector<double>& g, double radius) {
    if (!(radius < cfg.target_radius)) return false;
    const double check = closed_loop_radius_matrix(map, orbit, g, R);
    if (!(check < cfg.target_radius)) return false;
    found = SearchResult{g, radius, check, objective.count()};
    return true;
  };

  constexpr double kInvPhi = 0.6180339887498949;
  try {
    while (true) {
      std::vector<double> x(m);
      for (std::size_t i = 0; i < m; ++i) {
        x[i] = frozen[i] ? *frozen[i] : bounds[i].lo + bounds[i].width() * rng.uniform();
      }
      double fx = objective(x);
      if (accept(x, fx)) return found;

      std::vector<double> half(m);
      for (std::size_t i = 0; i < m; ++i) half[i] = 0.25 * bounds[i].width();
      for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
        for (std::size_t i : free) {
          double a = std::max(bounds[i].lo, x[i] - half[i]);
          double b = std::min(bounds[i].hi, x[i] + half[i]);
          std::vector<double> trial = x;
          auto probe = [&](double v) {
            trial[i] = v;
            const double f = objective(trial);
            if (f < fx) {
              fx = f;
              x[i] = v;
            }
            return f;
          };
          double c = b - kInvPhi * (b - a);
          double d = a + kInvPhi * (b - a);
          double fc = probe(c);
          if (accept(x, fx)) return found;
          double fd = probe(d);
          if (accept(x, fx)) return found;
          for (int it = 2; it < cfg.line_evaluations; ++it) {
            if (fc < fd) {
              b = d;
              d = c;
              fd = fc;
              c = b - kInvPhi * (b - a);
              fc = probe(c);
            } else {
              a = c;
              c = d;
              fc = fd;
              d = a + kInvPhi * (b - a);
              fd = probe(d);
            }
            if (accept(x, fx)) return found;
          }
        }
        for (double& h : half) h *= 0.5;
      }
    }
  } catch (const detail::BudgetExhausted&) {
  }
  return std::nullopt;
}

inline std::optional<SearchResult> search_gains(const SearchConfig& cfg,
                                                const PeriodicOrbit& orbit) {
  return search_gains(cfg, logistic(cfg.r), orbit);
}

struct ScanRow {
  double r = 0.0;
  bool orbit_found = false;
  bool found = false;
  double radius = std::numeric_limits<double>::infinity();
  std::vector<double> gains;
  PeriodicOrbit orbit;
  std::string error;
};

/// Grid r_lo, r_lo + step, ... <= r_hi; one search per grid point.
inline std::vector<double> scan_grid(double r_lo, double r_hi, double step) {
  std::vector<double> grid;
  if (!(step > 0.0)) throw PreconditionError("scan step must be positive");
  if (!(r_lo <= r_hi)) return grid;
  const auto n = static_cast<long>(std::floor((r_hi - r_lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) grid.push_back(r_lo + static_cast<double>(i) * step);
  return grid;
}

inline std::vector<ScanRow> stabilizable_range_scan(double r_lo, double r_hi, double step,
                                                    const SearchConfig& tmpl,
                                                    const ParamMap& base = logistic()) {
  std::vector<ScanRow> rows;
  for (double r : scan_grid(r_lo, r_hi, step)) {
    ScanRow row;
    row.r = r;
    const ParamMap map = base.at(r);
    try {
      row.orbit = find_upo(map, r, tmpl.m);
      row.orbit_found = true;
    } catch (const Error& e) {
      row.error = e.what();
      rows.push_back(std::move(row));
      continue;
    }
    SearchConfig cfg = tmpl;
    cfg.r = r;
    if (auto res = search_gains(cfg, map, row.orbit)) {
      row.found = true;
      row.radius = res->radius;
      row.gains = res->gains;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace chaosctl
