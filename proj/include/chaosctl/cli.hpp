#pragma once

// Command-line front end. run_cli() parses argv-style arguments, writes
// JSON results to `out`, diagnostics to `err`, and returns the exit code.

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chaosctl/error.hpp"
#include "chaosctl/experiment.hpp"
#include "chaosctl/orbits.hpp"
#include "chaosctl/report.hpp"
#include "chaosctl/scenarios.hpp"
#include "chaosctl/search.hpp"
#include "chaosctl/sim.hpp"
#include "chaosctl/stability.hpp"

namespace chaosctl::cli {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kNoOrbit = 2,
  kNotFound = 3,  // not converged, unstable, or nothing found within budget
  kEffort = 4,
  kReproFailed = 5,
  kUnbounded = 6,
};

namespace detail {

using chaosctl::detail::parse_list;
using chaosctl::detail::parse_number;

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  return parts;
}

inline Interval parse_interval(const std::string& key, const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw ConfigError(key + " expects lo:hi");
  return {parse_number<double>(key, parts[0]), parse_number<double>(key, parts[1])};
}

/// "1,2,3" freezes labels 1..3 at zero; "4=2.5" freezes label 4 at 2.5.
inline std::map<std::size_t, double> parse_freeze(const std::string& text) {
  std::map<std::size_t, double> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    const auto label = parse_number<std::size_t>("freeze", item.substr(0, eq));
    out[label] = eq == std::string::npos ? 0.0
                                         : parse_number<double>("freeze", item.substr(eq + 1));
  }
  return out;
}

inline std::vector<double> to_labels(const PeriodicOrbit& orbit, const std::vector<double>& stored,
                                     double anchor) {
  const std::size_t m = orbit.size();
  const std::size_t a = anchor_index(orbit, anchor);
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j) out[j] = stored[(a + j) % m];
  return out;
}

inline std::vector<double> labelled_points(const PeriodicOrbit& orbit, double anchor) {
  return to_labels(orbit, orbit.points, anchor);
}

struct SearchFlags {
  int period = 4;
  std::string law = "dfc";
  std::optional<double> R;
  std::size_t budget = 20000;
  std::optional<std::uint64_t> seed;
  std::string freeze;
  std::string bounds;
  double target = 0.999;
  double anchor = 0.5;

  void attach(CLI::App* app) {
    app->add_option("--period", period, "orbit period")->check(CLI::PositiveNumber);
    app->add_option("--law", law, "dfc or edfc")->check(CLI::IsMember({"dfc", "edfc"}));
    app->add_option("--R", R, "EDFC memory factor (default 0.3 for edfc)");
    app->add_option("--budget", budget, "objective evaluations");
    app->add_option("--seed", seed, "search seed (default CHAOSCTL_SEED or 0)");
    app->add_option("--freeze", freeze, "labels held fixed: 1,2,3 or 4=2.5");
    app->add_option("--bounds", bounds, "gain bounds lo:hi (default -10:10)");
    app->add_option("--target", target, "target spectral radius");
    app->add_option("--anchor", anchor, "value nearest label 1");
  }

  /// Template for the parameter r; label-based options are resolved once
  /// the orbit is known.
  [[nodiscard]] SearchConfig config(double r) const {
    SearchConfig cfg;
    cfg.r = r;
    cfg.m = period;
    cfg.law = law == "edfc" ? DelayLaw::Edfc : DelayLaw::Dfc;
    cfg.R = cfg.law == DelayLaw::Edfc ? R.value_or(0.3) : 0.0;
    if (law == "dfc" && R && *R != 0.0) throw ConfigError("--R applies to edfc only");
    cfg.budget = budget;
    cfg.seed = seed ? *seed : default_seed();
    cfg.target_radius = target;
    if (!bounds.empty()) {
      cfg.bounds.assign(static_cast<std::size_t>(period), parse_interval("bounds", bounds));
    }
    return cfg;
  }

  void bind(SearchConfig& cfg, const PeriodicOrbit& orbit) const {
    if (freeze.empty()) return;
    cfg.frozen.assign(orbit.size(), std::nullopt);
    for (const auto& [label, value] : parse_freeze(freeze)) {
      if (label < 1 || label > orbit.size()) throw ConfigError("freeze label out of range");
      cfg.frozen[labelled_index(orbit, label, anchor)] = value;
    }
  }
};

inline Json search_row(double r, const PeriodicOrbit& orbit, const std::optional<SearchResult>& res,
                       double anchor) {
  Json row{{"r", r}, {"orbit_found", true}, {"found", res.has_value()}};
  row["points"] = labelled_points(orbit, anchor);
  if (res) {
    row["gains"] = to_labels(orbit, res->gains, anchor);
    row["radius"] = res->radius;
    row["matrix_radius"] = res->matrix_radius;
    row["evaluations"] = res->evaluations;
  } else {
    row["gains"] = nullptr;
    row["radius"] = nullptr;
  }
  return row;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

inline int cmd_upo(double r, int period, double tol, std::ostream& out) {
  const ParamMap map = logistic(r);
  const PeriodicOrbit orbit = find_upo(map, r, period, tol);
  out << to_json(orbit).dump(2) << '\n';
  return kOk;
}

inline int cmd_gains(const std::string& law, double r, int period, std::optional<int> index,
                     double anchor, std::ostream& out) {
  const ParamMap map = logistic(r);
  Json j{{"law", law}, {"r", r}};
  if (law == "dfc-fix") {
    j.update(to_json(gamma_fixed_range(r)));
  } else if (law == "spf") {
    const PeriodicOrbit orbit = resolve_orbit(map, r, period);
    j["period"] = period;
    Json ranges = Json::array();
    for (std::size_t label = 1; label <= orbit.size(); ++label) {
      const double p = orbit.points[labelled_index(orbit, label, anchor)];
      Json row{{"label", label}, {"point", p}};
      row.update(to_json(beta_range(map, p)));
      ranges.push_back(std::move(row));
    }
    if (orbit.size() == 1) j.update(ranges[0]);
    j["ranges"] = std::move(ranges);
  } else if (law == "dfc-single") {
    if (!index) throw ConfigError("dfc-single requires --index");
    const PeriodicOrbit orbit = resolve_orbit(map, r, period);
    if (*index < 1 || static_cast<std::size_t>(*index) > orbit.size()) {
      throw ConfigError("--index must lie in 1..period");
    }
    const std::size_t i = labelled_index(orbit, static_cast<std::size_t>(*index), anchor);
    const GainRange g = single_gamma_range(map, orbit, i);
    const Feasibility f = feasibility_condition(map, orbit);
    j["period"] = period;
    j["index"] = *index;
    j["point"] = orbit.points[i];
    j["lower"] = number_json(g.lower);
    j["upper"] = number_json(g.upper);
    j["feasibility_value"] = f.value;
    j["condition_satisfied"] = f.satisfied;
    j["feasible"] = g.feasible && f.satisfied;
  } else {
    throw ConfigError("unknown gains law '" + law + "'");
  }
  out << j.dump(2) << '\n';
  return kOk;
}

inline int cmd_check_stability(double r, int period, const std::string& law,
                               const std::string& gains_text, std::optional<double> R_opt,
                               double anchor, std::ostream& out) {
  const ParamMap map = logistic(r);
  const PeriodicOrbit orbit = find_upo(map, r, period);
  const auto labelled = detail::parse_list("gains", gains_text);
  if (labelled.size() != orbit.size()) {
    throw ConfigError("--gains needs " + std::to_string(orbit.size()) + " values");
  }
  const double R = law == "edfc" ? R_opt.value_or(0.3) : 0.0;
  if (law == "dfc" && R_opt && *R_opt != 0.0) throw ConfigError("--R applies to edfc only");
  const auto gains = align_gains(orbit, labelled, anchor);
  const double poly = closed_loop_radius(map, orbit, gains, R);
  const double mat = closed_loop_radius_matrix(map, orbit, gains, R);
  const bool stable = is_stable(poly) && is_stable(mat);
  Json j{{"r", r}, {"period", period}, {"law", law}, {"R", R},
         {"gains", labelled}, {"points", detail::labelled_points(orbit, anchor)},
         {"radius", poly}, {"matrix_radius", mat}, {"stable", stable}};
  out << j.dump(2) << '\n';
  return stable ? kOk : kNotFound;
}

inline int cmd_simulate(const std::string& config_path,
                        const std::vector<std::pair<std::string, std::string>>& overrides,
                        std::ostream& out) {
  ExperimentSpec spec;
  if (!config_path.empty()) spec = parse_spec(detail::read_file(config_path));
  for (const auto& [key, value] : overrides) set_field(spec, key, value);
  const ResolvedExperiment exp = resolve(spec);
  const SimulationResult res = run(exp.config);
  write_csv_file(exp.spec.output, res, exp.config.law.orbit);
  Json j{{"spec", to_json(exp.spec)},
         {"orbit", to_json(exp.config.law.orbit)},
         {"metrics", run_metrics(res)},
         {"csv", exp.spec.output}};
  out << j.dump(2) << '\n';
  return res.converged_at ? kOk : kNotFound;
}

inline int cmd_search(double r, const detail::SearchFlags& flags, std::ostream& out) {
  SearchConfig cfg = flags.config(r);
  const ParamMap map = logistic(r);
  const PeriodicOrbit orbit = find_upo(map, r, flags.period);
  flags.bind(cfg, orbit);
  const auto res = search_gains(cfg, map, orbit);
  out << detail::search_row(r, orbit, res, flags.anchor).dump(2) << '\n';
  return res ? kOk : kNotFound;
}

inline int cmd_scan(const std::string& range, const detail::SearchFlags& flags, std::ostream& out) {
  const auto parts = detail::split(range, ':');
  if (parts.size() != 3) throw ConfigError("--r-range expects lo:hi:step");
  const double lo = detail::parse_number<double>("r-range", parts[0]);
  const double hi = detail::parse_number<double>("r-range", parts[1]);
  const double step = detail::parse_number<double>("r-range", parts[2]);
  if (!(step > 0.0)) throw ConfigError("scan step must be positive");
  Json rows = Json::array();
  bool all = true;
  for (double r : scan_grid(lo, hi, step)) {
    const ParamMap map = logistic(r);
    PeriodicOrbit orbit;
    try {
      orbit = find_upo(map, r, flags.period);
    } catch (const Error& e) {
      rows.push_back(Json{{"r", r}, {"orbit_found", false}, {"found", false}, {"error", e.what()}});
      all = false;
      continue;
    }
    SearchConfig cfg = flags.config(r);
    flags.bind(cfg, orbit);
    const auto res = search_gains(cfg, map, orbit);
    all = all && res.has_value();
    rows.push_back(detail::search_row(r, orbit, res, flags.anchor));
  }
  out << Json{{"rows", rows}, {"all_found", all}}.dump(2) << '\n';
  return all ? kOk : kNotFound;
}

inline int cmd_repro(const std::string& id, const std::string& outdir, std::ostream& out,
                     std::ostream& err) {
  std::vector<std::string> ids;
  if (id == "all") {
    ids = scenario::figure_ids();
  } else {
    const auto& known = scenario::figure_ids();
    if (std::find(known.begin(), known.end(), id) == known.end()) {
      throw ConfigError("unknown figure id '" + id + "' (expected fig1..fig8 or all)");
    }
    ids = {id};
  }
  std::filesystem::create_directories(outdir);
  Json summary = Json::array();
  bool all_passed = true;
  for (const auto& fig : ids) {
    const scenario::FigureReport rep = scenario::reproduce(fig);
    Json files = Json::array();
    for (const auto& r : rep.runs) {
      if (!r.result) continue;
      const std::string path = (std::filesystem::path(outdir) / (fig + "_" + r.name + ".csv")).string();
      write_csv_file(path, *r.result, r.orbit);
      files.push_back(path);
    }
    Json report = scenario::to_json(rep);
    report["csv"] = files;
    const std::string metrics_path =
        (std::filesystem::path(outdir) / (fig + "_metrics.json")).string();
    std::ofstream(metrics_path) << report.dump(2) << '\n';
    summary.push_back(Json{{"figure", fig}, {"passed", rep.passed()}, {"metrics", metrics_path}});
    if (!rep.passed()) {
      all_passed = false;
      err << fig << ": acceptance checks failed\n";
      for (const auto& c : rep.checks) {
        if (!c.passed) {
          err << "  - " << c.name << ": expected " << c.expected << ", got " << c.actual << '\n';
        }
      }
    }
  }
  out << summary.dump(2) << '\n';
  return all_passed ? kOk : kReproFailed;
}

/// Entry point shared by the executable and the tests. args excludes argv[0].
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"chaosctl: chaos control of periodic orbits by parameter modulation"};
  app.require_subcommand(1);

  double r = 3.8;
  int period = 1;
  double tol = 1e-12;
  auto* upo = app.add_subcommand("upo", "find a periodic orbit of the free map");
  upo->add_option("--r", r, "map parameter")->required();
  upo->add_option("--period", period, "orbit period")->required()->check(CLI::PositiveNumber);
  upo->add_option("--tol", tol, "root tolerance")->check(CLI::PositiveNumber);

  std::string gains_law;
  std::optional<int> index;
  double anchor = 0.5;
  auto* gains = app.add_subcommand("gains", "stabilizing gain ranges");
  gains->add_option("--law", gains_law, "spf, dfc-fix or dfc-single")
      ->required()
      ->check(CLI::IsMember({"spf", "dfc-fix", "dfc-single"}));
  gains->add_option("--r", r, "map parameter")->required();
  gains->add_option("--period", period, "orbit period")->check(CLI::PositiveNumber);
  gains->add_option("--index", index, "label of the controlled point (dfc-single)");
  gains->add_option("--anchor", anchor, "value nearest label 1");

  std::string stab_law = "dfc";
  std::string gains_text;
  std::optional<double> stab_R;
  int stab_period = 4;
  auto* check = app.add_subcommand("check-stability", "closed-loop spectral radius of a gain tuple");
  check->add_option("--r", r, "map parameter")->required();
  check->add_option("--period", stab_period, "orbit period")->check(CLI::PositiveNumber);
  check->add_option("--law", stab_law, "dfc or edfc")->check(CLI::IsMember({"dfc", "edfc"}));
  check->add_option("--gains", gains_text, "comma-separated gains in label order")->required();
  check->add_option("--R", stab_R, "EDFC memory factor (default 0.3)");
  check->add_option("--anchor", anchor, "value nearest label 1");

  std::string config_path;
  std::map<std::string, std::string> sim_values;
  auto* simulate = app.add_subcommand("simulate", "closed-loop run; CSV trajectory and JSON metrics");
  simulate->add_option("--config", config_path, "key = value or JSON file")->check(CLI::ExistingFile);
  for (std::string_view key : kSpecKeys) {
    const std::string k(key);
    simulate->add_option("--" + k, sim_values[k], "overrides '" + k + "'");
  }

  double search_r = 3.62;
  detail::SearchFlags search_flags;
  auto* search = app.add_subcommand("search", "heuristic search for a stabilizing gain tuple");
  search->add_option("--r", search_r, "map parameter")->required();
  search_flags.attach(search);

  std::string range;
  detail::SearchFlags scan_flags;
  auto* scan = app.add_subcommand("scan", "search over a grid of r values");
  scan->add_option("--r-range", range, "lo:hi:step")->required();
  scan_flags.attach(scan);

  std::string figure;
  std::string outdir = "repro";
  auto* repro = app.add_subcommand("repro", "run a canned figure scenario and its checks");
  repro->add_option("id", figure, "fig1..fig8 or all")->required();
  repro->add_option("--outdir", outdir, "directory for CSV and metrics files");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (upo->parsed()) return cmd_upo(r, period, tol, out);
    if (gains->parsed()) return cmd_gains(gains_law, r, period, index, anchor, out);
    if (check->parsed()) {
      return cmd_check_stability(r, stab_period, stab_law, gains_text, stab_R, anchor, out);
    }
    if (simulate->parsed()) {
      std::vector<std::pair<std::string, std::string>> overrides;
      for (std::string_view key : kSpecKeys) {
        const std::string k(key);
        if (simulate->count("--" + k) > 0) overrides.emplace_back(k, sim_values[k]);
      }
      return cmd_simulate(config_path, overrides, out);
    }
    if (search->parsed()) return cmd_search(search_r, search_flags, out);
    if (scan->parsed()) return cmd_scan(range, scan_flags, out);
    if (repro->parsed()) return cmd_repro(figure, outdir, out, err);
  } catch (const NoOrbitError& e) {
    err << "error: " << e.what() << '\n';
    return kNoOrbit;
  } catch (const NoRootError& e) {
    err << "error: " << e.what() << '\n';
    return kNoOrbit;
  } catch (const EffortViolation& e) {
    err << "error: " << e.what() << '\n';
    return kEffort;
  } catch (const UnboundedTrajectory& e) {
    err << "error: " << e.what() << '\n';
    return kUnbounded;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace chaosctl::cli
