#pragma once

// Canned figure scenarios fig1..fig8: configurations, ensembles and the
// checks each reproduction must pass.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chaosctl/control.hpp"
#include "chaosctl/dynamics.hpp"
#include "chaosctl/error.hpp"
#include "chaosctl/orbits.hpp"
#include "chaosctl/report.hpp"
#include "chaosctl/sim.hpp"
#include "chaosctl/stability.hpp"

namespace chaosctl {
namespace scenario {

// Published gain tuples, in label order.
inline constexpr std::array<double, 4> kFig4Gains{0.0, 0.0, 0.0, 4.7997};
inline constexpr std::array<double, 4> kFig5Gains{0.4, 4.97156, -0.598, 2.09};
inline constexpr std::array<double, 4> kFig7Gains{1.333, 6.79, -0.6999, 3.601};
inline constexpr std::array<double, 4> kFig8Gains{3.50293, 1.38, 7.49498, -1.181};
inline constexpr std::array<double, 4> kFig4Points{0.5522, 0.8951, 0.3398, 0.8121};
inline constexpr double kEdfcR = 0.3;
inline constexpr double kDelayEpsilon = 0.05;
/// Label 1 sits nearest this value at r = 3.8 for the last EDFC tuple.
inline constexpr double kFig8Anchor = 0.8037;
/// Label 1 at r = 3.8 for the proportional ensemble (p1 ~ 0.3).
inline constexpr double kFig1Anchor = 0.3;
inline constexpr double kFixedEpsilon = 0.005;
inline constexpr std::array<double, 3> kFig2Betas{5.0, 9.283, 14.0};
inline constexpr int kEnsembleSeeds = 100;

struct DelayScenario {
  double r;
  std::array<double, 4> gains;
  double anchor;
  double R;  // 0 selects DFC_PHASE
};

inline DelayScenario fig4() { return {3.62, kFig4Gains, 0.5, 0.0}; }
inline DelayScenario fig5() { return {3.67, kFig5Gains, 0.5, 0.0}; }
inline DelayScenario fig7() { return {3.76, kFig7Gains, 0.5, kEdfcR}; }
inline DelayScenario fig8() { return {3.8, kFig8Gains, kFig8Anchor, kEdfcR}; }

inline std::vector<double> stored_gains(const DelayScenario& s, const PeriodicOrbit& orbit) {
  return align_gains(orbit, std::vector<double>(s.gains.begin(), s.gains.end()), s.anchor);
}

/// Delay-feedback figures run from x0 = 0.5 with the whole admissible
/// parameter band r0 + u <= 4 available and the control clipped to it.
inline SimulationConfig delay_config(const DelayScenario& s, long steps = 5000) {
  const ParamMap map = logistic(s.r);
  const PeriodicOrbit orbit = find_upo(map, s.r, 4);
  const auto gains = stored_gains(s, orbit);
  LawVariant v = s.R == 0.0 ? LawVariant{DfcPhase{gains}} : LawVariant{EdfcPhase{gains, s.R}};
  SimulationConfig cfg{map, ControlLaw{std::move(v), kDelayEpsilon,
                                       map.max_parameter - s.r, orbit}};
  cfg.x0 = 0.5;
  cfg.steps = steps;
  cfg.saturation = SaturationMode::Clamp;
  return cfg;
}

/// Fixed point of r = 3.8 under a single-gain law, x0 = 0.94, strict effort 0.2.
inline SimulationConfig fixed_point_config(LawVariant v, long steps = 2000,
                                           double epsilon = kFixedEpsilon, double x0 = 0.94) {
  const ParamMap map = logistic(3.8);
  SimulationConfig cfg{map, ControlLaw{std::move(v), epsilon, 0.2, find_fixed_point(map, 3.8)}};
  cfg.x0 = x0;
  cfg.steps = steps;
  return cfg;
}

/// fig1 ensemble member: index 0 is the switching law, 1..4 the
/// single-point OGY law on label i.
inline SimulationConfig fig1_config(int which, std::uint64_t seed, long steps = 2000) {
  const ParamMap map = logistic(3.8);
  const PeriodicOrbit orbit = find_upo(map, 3.8, 4);
  std::vector<double> alphas;
  for (double p : orbit.points) alphas.push_back(alpha_gain(map, p));
  LawVariant v;
  if (which == 0) {
    v = SpfSwitch{alphas};
  } else {
    const std::size_t i = labelled_index(orbit, static_cast<std::size_t>(which), kFig1Anchor);
    v = SpfOgy{i, alphas[i]};
  }
  SimulationConfig cfg{map, ControlLaw{std::move(v), kFixedEpsilon, 0.2, orbit}};
  cfg.x0 = 0.5;
  cfg.steps = steps;
  cfg.noise = NoiseSpec{5e-4, seed};
  return cfg;
}

inline SimulationConfig fig6_config(std::uint64_t seed, long steps = 2000) {
  SimulationConfig cfg = delay_config(fig5(), steps);
  cfg.noise = NoiseSpec{2e-5, seed};
  return cfg;
}

/// max over l >= 1 of (d_l / eps)^(1/l) until d_l reaches `floor`: the
/// smallest sigma with d_l <= sigma^l eps along the run.
inline double envelope_rate(const std::vector<double>& d, double epsilon, double floor = 1e-10) {
  double sigma = 0.0;
  for (std::size_t l = 1; l < d.size(); ++l) {
    if (d[l] < floor) break;
    sigma = std::max(sigma, std::pow(d[l] / epsilon, 1.0 / static_cast<double>(l)));
  }
  return sigma;
}

/// Largest one-cycle ratio d_{l+1} / d_l until the floor.
inline double stepwise_rate(const std::vector<double>& d, double floor = 1e-10) {
  double sigma = 0.0;
  for (std::size_t l = 0; l + 1 < d.size(); ++l) {
    if (d[l] < floor || d[l + 1] < floor) break;
    sigma = std::max(sigma, d[l + 1] / d[l]);
  }
  return sigma;
}

struct Check {
  std::string name;
  std::string expected;
  std::string actual;
  bool passed = false;
};

struct NamedRun {
  std::string name;
  PeriodicOrbit orbit;
  std::optional<SimulationResult> result;
  std::string error;
};

struct FigureReport {
  FigureReport() = default;
  FigureReport(std::string i, std::string t) : id(std::move(i)), title(std::move(t)) {}

  std::string id;
  std::string title;
  std::vector<NamedRun> runs;
  std::vector<Check> checks;
  Json metrics = Json::object();

  [[nodiscard]] bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
};

namespace detail {

inline std::string fmt(double v) { return format_double(v); }

inline NamedRun execute(std::string name, const SimulationConfig& cfg) {
  NamedRun run_out{std::move(name), cfg.law.orbit, std::nullopt, {}};
  try {
    run_out.result = run(cfg);
  } catch (const std::exception& e) {
    run_out.error = e.what();
  }
  return run_out;
}

inline void add(FigureReport& rep, std::string name, std::string expected, std::string actual,
                bool ok) {
  rep.checks.push_back({std::move(name), std::move(expected), std::move(actual), ok});
}

inline void check_converged(FigureReport& rep, const NamedRun& r, long within) {
  const bool ok = r.result && r.result->converged_at && *r.result->converged_at <= within;
  std::string actual = r.error.empty() ? "not converged" : "error: " + r.error;
  if (r.result && r.result->converged_at) {
    actual = "converged_at=" + std::to_string(*r.result->converged_at);
  }
  add(rep, r.name + " converges", "converged_at <= " + std::to_string(within), actual, ok);
}

inline void check_radius(FigureReport& rep, const std::string& name, const ParamMap& map,
                         const PeriodicOrbit& orbit, const std::vector<double>& gains, double R) {
  const double poly = closed_loop_radius(map, orbit, gains, R);
  const double mat = closed_loop_radius_matrix(map, orbit, gains, R);
  add(rep, name + " spectral radius", "< 1 (both routes)",
      fmt(poly) + " / " + fmt(mat), is_stable(poly) && is_stable(mat));
}

inline Json runs_json(const FigureReport& rep) {
  Json arr = Json::array();
  for (const auto& r : rep.runs) {
    Json j{{"name", r.name}};
    if (r.result) {
      j.update(run_metrics(*r.result));
    } else {
      j["error"] = r.error;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace detail

inline FigureReport reproduce_fig1() {
  FigureReport rep{"fig1", "switching proportional control vs per-point OGY under noise"};
  const double tube = 3.0 * kFixedEpsilon;
  std::vector<SimulationConfig> configs;
  for (int s = 0; s < kEnsembleSeeds; ++s) {
    for (int w = 0; w <= 4; ++w) configs.push_back(fig1_config(w, static_cast<std::uint64_t>(s)));
  }
  const auto out = batch(configs);
  std::array<double, 5> mean{};
  std::array<int, 5> failures{};
  int earlier_or_equal = 0;
  for (int s = 0; s < kEnsembleSeeds; ++s) {
    bool no_later = true;
    const auto& sw = out[static_cast<std::size_t>(5 * s)];
    for (int w = 0; w <= 4; ++w) {
      const auto& o = out[static_cast<std::size_t>(5 * s + w)];
      if (!o.ok()) {
        ++failures[static_cast<std::size_t>(w)];
        continue;
      }
      mean[static_cast<std::size_t>(w)] += lock_fraction(*o.result, configs[0].law.orbit, tube);
      if (w > 0 && sw.ok()) {
        const auto a = sw.result->k0;
        const auto b = o.result->k0;
        if (b && (!a || *a > *b)) no_later = false;
      }
    }
    if (no_later) ++earlier_or_equal;
  }
  for (double& v : mean) v /= kEnsembleSeeds;
  const auto total_failures = failures[0] + failures[1] + failures[2] + failures[3] + failures[4];
  detail::add(rep, "ensemble runs", "no errors", std::to_string(total_failures) + " errors",
              total_failures == 0);
  for (int w = 1; w <= 4; ++w) {
    detail::add(rep, "mean lock fraction switch > ogy" + std::to_string(w),
                "> " + detail::fmt(mean[static_cast<std::size_t>(w)]), detail::fmt(mean[0]),
                mean[0] > mean[static_cast<std::size_t>(w)]);
  }
  detail::add(rep, "switching activates no later than each per-point law",
              std::to_string(kEnsembleSeeds) + " seeds", std::to_string(earlier_or_equal),
              earlier_or_equal == kEnsembleSeeds);
  rep.metrics["tube"] = tube;
  rep.metrics["mean_lock_fraction"] = Json{{"switch", mean[0]}, {"ogy1", mean[1]},
                                           {"ogy2", mean[2]}, {"ogy3", mean[3]},
                                           {"ogy4", mean[4]}};
  rep.runs.push_back(detail::execute("switch_seed0", fig1_config(0, 0)));
  for (int w = 1; w <= 4; ++w) {
    rep.runs.push_back(detail::execute("ogy" + std::to_string(w) + "_seed0", fig1_config(w, 0)));
  }
  return rep;
}

inline FigureReport reproduce_fig2() {
  FigureReport rep{"fig2", "fixed point of r = 3.8: SPF_BETA and DFC_FIX; waiting time vs epsilon"};
  const GainRange gr = gamma_fixed_range(3.8);
  for (double b : kFig2Betas) {
    rep.runs.push_back(detail::execute("beta_" + detail::fmt(b), fixed_point_config(SpfBeta{{b}})));
  }
  for (double t : {0.25, 0.5, 0.75}) {
    const double g = gr.lower + t * gr.width();
    rep.runs.push_back(detail::execute("gamma_" + detail::fmt(g), fixed_point_config(DfcFix{g})));
  }
  for (const auto& r : rep.runs) {
    detail::check_converged(rep, r, 2000);
    const bool ok = r.result && r.result->peak_u <= 0.2;
    detail::add(rep, r.name + " peak effort", "<= 0.2",
                r.result ? detail::fmt(r.result->peak_u) : r.error, ok);
  }
  // Same effort beta * eps = 0.07 at three activation radii from x0 = 0.5.
  std::optional<long> previous;
  bool monotone = true;
  for (double eps : {0.005, 0.01, 0.015}) {
    NamedRun r = detail::execute("effort_eps_" + detail::fmt(eps),
                                 fixed_point_config(SpfBeta{{0.07 / eps}}, 2000, eps, 0.5));
    detail::check_converged(rep, r, 2000);
    if (r.result && r.result->k0) {
      if (previous && *r.result->k0 > *previous) monotone = false;
      previous = r.result->k0;
    } else {
      monotone = false;
    }
    rep.runs.push_back(std::move(r));
  }
  detail::add(rep, "waiting time non-increasing in epsilon", "true",
              monotone ? "true" : "false", monotone);
  return rep;
}

inline FigureReport reproduce_fig3() {
  FigureReport rep{"fig3", "fixed point of r = 3.8 with initial history y0 = 0.45"};
  const GainRange gr = gamma_fixed_range(3.8);
  for (double t : {0.25, 0.5, 0.75}) {
    const double g = gr.lower + t * gr.width();
    SimulationConfig cfg = fixed_point_config(DfcFix{g});
    cfg.initial_history = {0.45};
    rep.runs.push_back(detail::execute("gamma_" + detail::fmt(g), cfg));
  }
  SimulationConfig beta = fixed_point_config(SpfBeta{{kFig2Betas[1]}});
  rep.runs.push_back(detail::execute("beta_" + detail::fmt(kFig2Betas[1]), beta));
  for (const auto& r : rep.runs) {
    detail::check_converged(rep, r, 2000);
    const bool ok = r.result && r.result->peak_u <= 0.2;
    detail::add(rep, r.name + " peak effort", "<= 0.2",
                r.result ? detail::fmt(r.result->peak_u) : r.error, ok);
  }
  return rep;
}

inline void delay_figure_checks(FigureReport& rep, const DelayScenario& s,
                                const SimulationConfig& cfg) {
  const auto gains = law_gains(cfg.law.variant);
  detail::check_radius(rep, rep.id, cfg.map, cfg.law.orbit, gains, s.R);
  rep.runs.push_back(detail::execute("x0_0.5", cfg));
  detail::check_converged(rep, rep.runs.back(), cfg.steps);
}

inline FigureReport reproduce_fig4() {
  FigureReport rep{"fig4", "DFC_PHASE on the r = 3.62 4-cycle, gamma = (0, 0, 0, 4.7997)"};
  const DelayScenario s = fig4();
  const SimulationConfig cfg = delay_config(s);
  const PeriodicOrbit& orbit = cfg.law.orbit;
  const std::size_t a = anchor_index(orbit, s.anchor);
  double worst = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    worst = std::max(worst, std::abs(orbit.point(a + j) - kFig4Points[j]));
  }
  detail::add(rep, "orbit points (0.5522, 0.8951, 0.3398, 0.8121)", "max error <= 5e-4",
              detail::fmt(worst), worst <= 5e-4);
  delay_figure_checks(rep, s, cfg);
  const auto& res = rep.runs.back().result;
  if (res) {
    double tail = 0.0;
    for (std::size_t k = res->states.size() - 8; k < res->states.size(); ++k) {
      tail = std::max(tail, nearest_orbit_distance(orbit, res->states[k]));
    }
    detail::add(rep, "final states on the cycle", "<= 1e-3", detail::fmt(tail), tail <= 1e-3);
    std::vector<bool> active(4, false);
    for (std::size_t k = 0; k < res->controls.size(); ++k) {
      if (res->controls[k] != 0.0 && res->phases[k]) active[*res->phases[k]] = true;
    }
    const auto n = std::count(active.begin(), active.end(), true);
    detail::add(rep, "phases with nonzero control", "1 of 4", std::to_string(n) + " of 4",
                n == 1);
  }
  return rep;
}

inline FigureReport reproduce_fig5() {
  FigureReport rep{"fig5", "DFC_PHASE on the r = 3.67 4-cycle"};
  delay_figure_checks(rep, fig5(), delay_config(fig5()));
  return rep;
}

inline FigureReport reproduce_fig6() {
  FigureReport rep{"fig6", "fig5 scenario under additive noise 2e-5"};
  constexpr double kTube = 0.05;
  std::vector<SimulationConfig> noisy;
  for (int s = 0; s < kEnsembleSeeds; ++s) noisy.push_back(fig6_config(static_cast<std::uint64_t>(s)));
  const auto out = batch(noisy);
  int locked = 0;
  int errors = 0;
  for (const auto& o : out) {
    if (!o.ok()) {
      ++errors;
      continue;
    }
    if (stays_locked(*o.result, noisy[0].law.orbit, kTube)) ++locked;
  }
  detail::add(rep, "ensemble runs", "no errors", std::to_string(errors) + " errors", errors == 0);
  detail::add(rep, "seeds staying locked (tube 0.05 from activation on)", ">= 90 of 100",
              std::to_string(locked), locked >= 90);
  rep.metrics["locked_seeds"] = locked;
  rep.metrics["tube"] = kTube;
  rep.runs.push_back(detail::execute("seed0", fig6_config(0)));
  return rep;
}

inline FigureReport reproduce_fig7() {
  FigureReport rep{"fig7", "EDFC_PHASE (R = 0.3) on the r = 3.76 4-cycle"};
  delay_figure_checks(rep, fig7(), delay_config(fig7()));
  return rep;
}

inline FigureReport reproduce_fig8() {
  FigureReport rep{"fig8", "EDFC_PHASE (R = 0.3) on the r = 3.8 4-cycle"};
  delay_figure_checks(rep, fig8(), delay_config(fig8()));
  return rep;
}

inline const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig1", "fig2", "fig3", "fig4",
                                            "fig5", "fig6", "fig7", "fig8"};
  return ids;
}

inline FigureReport reproduce(std::string_view id) {
  static const std::array<std::function<FigureReport()>, 8> table{
      reproduce_fig1, reproduce_fig2, reproduce_fig3, reproduce_fig4,
      reproduce_fig5, reproduce_fig6, reproduce_fig7, reproduce_fig8};
  const auto& ids = figure_ids();
  const auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw ConfigError("unknown figure id '" + std::string(id) + "'");
  FigureReport rep = table[static_cast<std::size_t>(it - ids.begin())]();
  rep.metrics["runs"] = detail::runs_json(rep);
  return rep;
}

inline Json to_json(const FigureReport& rep) {
  Json checks = Json::array();
  for (const auto& c : rep.checks) {
    checks.push_back(Json{{"name", c.name}, {"expected", c.expected},
                          {"actual", c.actual}, {"passed", c.passed}});
  }
  return Json{{"figure", rep.id}, {"title", rep.title}, {"passed", rep.passed()},
              {"checks", std::move(checks)}, {"metrics", rep.metrics}};
}

}  // namespace scenario
}  // namespace chaosctl
