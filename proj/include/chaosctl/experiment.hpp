#pragma once

// Textual experiment configuration: flat `key = value` lines or a JSON
// object, resolved into a SimulationConfig.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "chaosctl/control.hpp"
#include "chaosctl/dynamics.hpp"
#include "chaosctl/error.hpp"
#include "chaosctl/orbits.hpp"
#include "chaosctl/report.hpp"
#include "chaosctl/sim.hpp"
#include "chaosctl/stability.hpp"

namespace chaosctl {

/// Gains are given in label order: label 1 is the orbit point nearest
/// `anchor`, later labels follow the forward iteration.
struct ExperimentSpec {
  std::string map = "logistic";
  double r = 3.8;
  std::string law = "spf-beta";
  int period = 1;
  std::vector<double> gains;
  int target = 1;
  double epsilon = 0.005;
  std::optional<double> delta;
  double R = 0.0;
  double x0 = 0.5;
  long steps = 1000;
  double noise = 0.0;
  std::optional<std::uint64_t> seed;
  std::string output = "trajectory.csv";
  double tol = 1e-6;
  int window = 0;
  std::string saturation = "strict";
  bool relock = false;
  double anchor = 0.5;
  std::vector<double> history;
};

inline constexpr std::string_view kSpecKeys[] = {
    "map",   "r",     "law",    "period", "gains",  "target",     "epsilon",
    "delta", "R",     "x0",     "steps",  "noise",  "seed",       "output",
    "tol",   "window", "saturation", "relock", "anchor", "history"};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  T value{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError("invalid value for '" + std::string(key) + "': '" +
                      std::string(text) + "'");
  }
  return value;
}

inline std::vector<double> parse_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  text = trim(text);
  if (!text.empty() && text.front() == '[' && text.back() == ']') {
    text = trim(text.substr(1, text.size() - 2));
  }
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_number<double>(key, text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("invalid boolean for '" + std::string(key) + "'");
}

}  // namespace detail

inline void set_field(ExperimentSpec& s, std::string_view key, std::string_view raw) {
  using detail::parse_number;
  const std::string_view v = detail::trim(raw);
  if (key == "map") {
    s.map = std::string(v);
  } else if (key == "r") {
    s.r = parse_number<double>(key, v);
  } else if (key == "law") {
    s.law = std::string(v);
  } else if (key == "period") {
    s.period = parse_number<int>(key, v);
  } else if (key == "gains") {
    s.gains = detail::parse_list(key, v);
  } else if (key == "target") {
    s.target = parse_number<int>(key, v);
  } else if (key == "epsilon") {
    s.epsilon = parse_number<double>(key, v);
  } else if (key == "delta") {
    s.delta = parse_number<double>(key, v);
  } else if (key == "R") {
    s.R = parse_number<double>(key, v);
  } else if (key == "x0") {
    s.x0 = parse_number<double>(key, v);
  } else if (key == "steps") {
    s.steps = parse_number<long>(key, v);
  } else if (key == "noise") {
    s.noise = parse_number<double>(key, v);
  } else if (key == "seed") {
    s.seed = parse_number<std::uint64_t>(key, v);
  } else if (key == "output") {
    s.output = std::string(v);
  } else if (key == "tol") {
    s.tol = parse_number<double>(key, v);
  } else if (key == "window") {
    s.window = parse_number<int>(key, v);
  } else if (key == "saturation") {
    s.saturation = std::string(v);
  } else if (key == "relock") {
    s.relock = detail::parse_bool(key, v);
  } else if (key == "anchor") {
    s.anchor = parse_number<double>(key, v);
  } else if (key == "history") {
    s.history = detail::parse_list(key, v);
  } else {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
}

/// JSON scalars and arrays are mapped to the same textual form the
/// key = value syntax accepts.
inline std::string json_value_text(std::string_view key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (!item.is_number()) {
        throw ConfigError("'" + std::string(key) + "' must be a list of numbers");
      }
      if (!out.empty()) out += ',';
      out += json_value_text(key, item);
    }
    return out;
  }
  throw ConfigError("unsupported JSON value for '" + std::string(key) + "'");
}

/// Parses a JSON object (when the text starts with '{') or key = value
/// lines; '#' starts a comment in the latter. JSON nulls leave a field unset.
inline ExperimentSpec parse_spec(std::string_view text, ExperimentSpec base = {}) {
  const auto body = detail::trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (value.is_null()) continue;  // null keeps the default
      set_field(base, key, json_value_text(key, value));
    }
    return base;
  }
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    set_field(base, detail::trim(view.substr(0, eq)), view.substr(eq + 1));
  }
  return base;
}

/// CHAOSCTL_SEED when set and valid, otherwise 0.
inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("CHAOSCTL_SEED")) {
    return detail::parse_number<std::uint64_t>("CHAOSCTL_SEED", env);
  }
  return 0;
}

inline PeriodicOrbit resolve_orbit(const ParamMap& map, double r, int period) {
  if (period < 1) throw ConfigError("period must be >= 1");
  return period == 1 ? find_fixed_point(map, r) : find_upo(map, r, period);
}

/// Default gains in label order for laws that have a canonical choice.
inline std::vector<double> default_gains(const ExperimentSpec& s, const ParamMap& map,
                                         const PeriodicOrbit& orbit) {
  const std::size_t m = orbit.size();
  std::vector<double> stored;
  if (s.law == "spf-ogy") {
    const std::size_t i = labelled_index(orbit, static_cast<std::size_t>(s.target), s.anchor);
    return {alpha_gain(map, orbit.points[i])};
  }
  if (s.law == "spf-switch") {
    for (double p : orbit.points) stored.push_back(alpha_gain(map, p));
  } else if (s.law == "spf-beta" || s.law == "spf-phase") {
    for (double p : orbit.points) {
      const GainRange g = beta_range(map, p);
      if (!g.feasible) throw ConfigError("no admissible beta for orbit point; give gains");
      stored.push_back(g.midpoint());
    }
  } else if (s.law == "dfc-fix") {
    return {gamma_fixed_range(s.r).midpoint()};
  } else {
    throw ConfigError("law '" + s.law + "' requires explicit gains");
  }
  // Back from storage order to label order.
  std::vector<double> labelled(m);
  const std::size_t a = anchor_index(orbit, s.anchor);
  for (std::size_t j = 0; j < m; ++j) labelled[j] = stored[(a + j) % m];
  return labelled;
}

struct ResolvedExperiment {
  ExperimentSpec spec;
  SimulationConfig config;
};

inline ResolvedExperiment resolve(ExperimentSpec s) {
  if (s.map != "logistic") throw ConfigError("unsupported map '" + s.map + "'");
  if (!(s.r > 0.0 && s.r <= 4.0)) throw ConfigError("r must lie in (0, 4]");
  if (s.saturation != "strict" && s.saturation != "clamp") {
    throw ConfigError("saturation must be 'strict' or 'clamp'");
  }
  if (s.steps < 1) throw ConfigError("steps must be >= 1");
  if (!(s.noise >= 0.0)) throw ConfigError("noise must be non-negative");
  if (!(s.tol > 0.0)) throw ConfigError("tol must be positive");
  if (s.window < 0) throw ConfigError("window must be >= 0");
  if (!s.seed) s.seed = default_seed();

  const ParamMap map = logistic(s.r);
  if (!s.delta) s.delta = default_delta(map, s.r);
  const PeriodicOrbit orbit = resolve_orbit(map, s.r, s.period);
  const std::size_t m = orbit.size();
  if (s.law == "spf-ogy" && (s.target < 1 || static_cast<std::size_t>(s.target) > m)) {
    throw ConfigError("target must be a label in 1..period");
  }
  if (s.gains.empty()) s.gains = default_gains(s, map, orbit);

  auto stored = [&] {
    if (s.gains.size() != m) {
      throw ConfigError("law '" + s.law + "' needs " + std::to_string(m) + " gains");
    }
    return align_gains(orbit, s.gains, s.anchor);
  };
  auto single = [&] {
    if (s.gains.size() != 1) throw ConfigError("law '" + s.law + "' needs one gain");
    return s.gains[0];
  };

  LawVariant variant;
  if (s.law == "spf-ogy") {
    variant = SpfOgy{labelled_index(orbit, static_cast<std::size_t>(s.target), s.anchor),
                     single()};
  } else if (s.law == "spf-switch") {
    variant = SpfSwitch{stored()};
  } else if (s.law == "spf-beta") {
    variant = SpfBeta{stored()};
  } else if (s.law == "spf-phase") {
    variant = SpfPhase{stored()};
  } else if (s.law == "dfc-fix") {
    variant = DfcFix{single()};
  } else if (s.law == "dfc-switch") {
    variant = DfcSwitch{stored()};
  } else if (s.law == "dfc-phase") {
    variant = DfcPhase{stored()};
  } else if (s.law == "edfc-phase") {
    variant = EdfcPhase{stored(), s.R};
  } else {
    throw ConfigError("unknown law '" + s.law + "'");
  }

  ControlLaw law{std::move(variant), s.epsilon, *s.delta, orbit};
  law.relock = s.relock;
  try {
    validate(law);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }

  SimulationConfig cfg{map, std::move(law)};
  cfg.x0 = s.x0;
  cfg.steps = s.steps;
  cfg.noise = NoiseSpec{s.noise, *s.seed};
  cfg.convergence_tol = s.tol;
  cfg.convergence_window = s.window;
  cfg.saturation = s.saturation == "clamp" ? SaturationMode::Clamp : SaturationMode::Strict;
  cfg.initial_history = s.history;
  if (!map.state_domain.contains(s.x0)) throw ConfigError("x0 outside [0, 1]");
  return {std::move(s), std::move(cfg)};
}

inline Json to_json(const ExperimentSpec& s) {
  Json j;
  j["map"] = s.map;
  j["r"] = s.r;
  j["law"] = s.law;
  j["period"] = s.period;
  j["gains"] = s.gains;
  if (s.law == "spf-ogy") j["target"] = s.target;
  j["epsilon"] = s.epsilon;
  j["delta"] = optional_json(s.delta);
  if (s.law == "edfc-phase") j["R"] = s.R;
  j["x0"] = s.x0;
  j["steps"] = s.steps;
  j["noise"] = s.noise;
  j["seed"] = optional_json(s.seed);
  j["output"] = s.output;
  j["tol"] = s.tol;
  j["window"] = s.window;
  j["saturation"] = s.saturation;
  j["relock"] = s.relock;
  j["anchor"] = s.anchor;
  if (!s.history.empty()) j["history"] = s.history;
  return j;
}

}  // namespace chaosctl
