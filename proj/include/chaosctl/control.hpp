#pragma once

// The eight parameter-perturbation feedback laws and the per-run controller
// that tracks activation, phase locking and delay buffers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "chaosctl/error.hpp"
#include "chaosctl/orbits.hpp"

namespace chaosctl {

/// Proportional feedback on a single orbit point (OGY when alpha = -f_x/f_r).
struct SpfOgy {
  std::size_t target = 0;
  double alpha = 0.0;
};
/// Proportional feedback switched to whichever point the state is near.
struct SpfSwitch {
  std::vector<double> alphas;
};
struct SpfBeta {
  std::vector<double> betas;
};
/// Proportional feedback locked to the orbit phase after first detection.
struct SpfPhase {
  std::vector<double> betas;
};
/// One-step delayed feedback around a fixed point.
struct DfcFix {
  double gamma = 0.0;
};
struct DfcSwitch {
  std::vector<double> gammas;
};
/// m-step delayed feedback locked to the orbit phase.
struct DfcPhase {
  std::vector<double> gammas;
};
/// DfcPhase plus geometric memory R u_{k-m} of past controls.
struct EdfcPhase {
  std::vector<double> gammas;
  double R = 0.0;
};

using LawVariant = std::variant<SpfOgy, SpfSwitch, SpfBeta, SpfPhase, DfcFix,
                                DfcSwitch, DfcPhase, EdfcPhase>;

struct ControlLaw {
  LawVariant variant;
  double epsilon = 0.0;
  double delta = 0.2;
  PeriodicOrbit orbit;
  /// Phase-locked laws drop the lock when the state strays beyond
  /// relock_factor * epsilon from the expected point.
  bool relock = false;
  double relock_factor = 10.0;
};

inline constexpr std::string_view law_name(const LawVariant& v) {
  constexpr std::string_view names[] = {"spf-ogy",   "spf-switch", "spf-beta",
                                        "spf-phase", "dfc-fix",    "dfc-switch",
                                        "dfc-phase", "edfc-phase"};
  return names[v.index()];
}

[[nodiscard]] inline bool is_phase_locked(const LawVariant& v) {
  return std::holds_alternative<SpfPhase>(v) || std::holds_alternative<DfcPhase>(v) ||
         std::holds_alternative<EdfcPhase>(v);
}

[[nodiscard]] inline bool is_proportional(const LawVariant& v) {
  return v.index() <= 3;
}

/// Gains in orbit storage order (a single entry for SpfOgy and DfcFix).
inline std::vector<double> law_gains(const LawVariant& v) {
  return std::visit(
      [](const auto& law) -> std::vector<double> {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, SpfOgy>) {
          return {law.alpha};
        } else if constexpr (std::is_same_v<T, DfcFix>) {
          return {law.gamma};
        } else if constexpr (std::is_same_v<T, SpfSwitch>) {
          return law.alphas;
        } else if constexpr (std::is_same_v<T, SpfBeta> || std::is_same_v<T, SpfPhase>) {
          return law.betas;
        } else {
          return law.gammas;
        }
      },
      v);
}

inline double max_abs_gain(const ControlLaw& law) {
  double g = 0.0;
  for (double x : law_gains(law.variant)) g = std::max(g, std::abs(x));
  return g;
}

/// A-priori effort bound: max |gain| * epsilon <= delta.
[[nodiscard]] inline bool effort_feasible(const ControlLaw& law) {
  return max_abs_gain(law) * law.epsilon <= law.delta;
}

/// Largest admissible activation radius for the law's orbit.
inline double epsilon_limit(const ControlLaw& law) {
  if (is_proportional(law.variant)) return 0.5 * law.orbit.min_pair_distance;
  if (std::holds_alternative<DfcFix>(law.variant)) {
    return std::numeric_limits<double>::infinity();
  }
  return min_delay_distance(law.orbit) / std::numbers::sqrt2;
}

/// Throws PreconditionError when the law violates one of its invariants.
///
/// The a-priori effort bound is enforced for the proportional laws only;
/// delayed-feedback laws are checked step by step during simulation.
inline void validate(const ControlLaw& law) {
  const std::size_t m = law.orbit.size();
  if (m == 0) throw PreconditionError("control law has no orbit");
  if (!(law.epsilon >= 0.0)) throw PreconditionError("epsilon must be non-negative");
  if (!(law.delta > 0.0)) throw PreconditionError("delta must be positive");
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SpfOgy>) {
          if (v.target >= m) throw PreconditionError("target index out of range");
        } else if constexpr (std::is_same_v<T, DfcFix>) {
          if (m != 1) throw PreconditionError("dfc-fix requires a fixed point");
        } else {
          if (law_gains(law.variant).size() != m) {
            throw PreconditionError("expected one gain per orbit point");
          }
        }
        if constexpr (std::is_same_v<T, EdfcPhase>) {
          if (!(v.R >= 0.0 && v.R < 1.0)) throw PreconditionError("R must lie in [0, 1)");
        }
      },
      law.variant);
  const double limit = epsilon_limit(law);
  if (law.epsilon > 0.0 && !(law.epsilon < limit)) {
    throw PreconditionError("epsilon " + std::to_string(law.epsilon) +
                            " must be below " + std::to_string(limit) +
                            " to separate orbit components");
  }
  if (is_proportional(law.variant) && !effort_feasible(law)) {
    throw PreconditionError("max |gain| * epsilon exceeds delta");
  }
}

/// Fixed-capacity history, index 0 = most recent.
class History {
 public:
  explicit History(std::size_t capacity = 0) : buf_(capacity), capacity_(capacity) {}

  void push(double x) {
    if (capacity_ == 0) return;
    head_ = (head_ + 1) % capacity_;
    buf_[head_] = x;
    size_ = std::min(size_ + 1, capacity_);
  }
  [[nodiscard]] double at(std::size_t back) const {
    return buf_[(head_ + capacity_ - back % capacity_) % capacity_];
  }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] bool full() const { return size_ == capacity_; }

  /// Most recent first.
  [[nodiscard]] std::vector<double> recent(std::size_t n) const {
    std::vector<double> out(std::min(n, size_));
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = at(j);
    return out;
  }

 private:
  std::vector<double> buf_;
  std::size_t capacity_ = 0;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

struct ControllerState {
  bool activated = false;
  /// Step at which the current phase lock was acquired.
  std::optional<long> k0;
  /// Orbit index matched at k0 (0-based).
  std::optional<std::size_t> entry_phase;
  History state_history;
  History control_history;

  /// (entry + k - k0) mod m once locked.
  [[nodiscard]] std::optional<std::size_t> phase_at(long k, std::size_t m) const {
    if (!k0 || !entry_phase || k < *k0) return std::nullopt;
    return (*entry_phase + static_cast<std::size_t>(k - *k0)) % m;
  }
};

struct SwitchOutput {
  double u = 0.0;
  std::optional<std::size_t> phase;
};

namespace detail {

template <class T>
const T& law_as(const ControlLaw& law) {
  if (const T* v = std::get_if<T>(&law.variant)) return *v;
  throw PreconditionError("control law variant mismatch: got " +
                          std::string(law_name(law.variant)));
}

}  // namespace detail

/// Orbit point within epsilon of x, if any.
inline std::optional<std::size_t> match_point(double x, const PeriodicOrbit& orbit,
                                              double epsilon) {
  std::optional<std::size_t> hit;
  if (!(epsilon > 0.0)) return hit;
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    if (std::abs(x - orbit.points[i]) <= epsilon) {
      if (hit) throw AmbiguityError("state matches two orbit components");
      hit = i;
    }
  }
  return hit;
}

/// Phase i whose delay vector P_i lies within epsilon/sqrt(2) of the
/// history (x_k, ..., x_{k-m}).
inline std::optional<std::size_t> match_delay(std::span<const double> history,
                                              const PeriodicOrbit& orbit,
                                              double epsilon) {
  const std::size_t m = orbit.size();
  if (history.size() < m + 1 || !(epsilon > 0.0)) return std::nullopt;
  const double bound = epsilon / std::numbers::sqrt2;
  std::optional<std::size_t> hit;
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= m; ++j) {
      const double d = history[j] - orbit.point(i + m - j % m);
      s += d * d;
    }
    if (std::sqrt(s) <= bound) {
      if (hit) throw AmbiguityError("history matches two delay-embedded orbit points");
      hit = i;
    }
  }
  return hit;
}

inline double u_spf_ogy(double x, const ControlLaw& law) {
  const auto& v = detail::law_as<SpfOgy>(law);
  const double p = law.orbit.point(v.target);
  return std::abs(x - p) <= law.epsilon ? v.alpha * (x - p) : 0.0;
}

/// Switching proportional law; accepts SpfSwitch or SpfBeta.
inline SwitchOutput u_spf_switch(double x, const ControlLaw& law) {
  const std::vector<double>* gains = nullptr;
  if (const auto* s = std::get_if<SpfSwitch>(&law.variant)) gains = &s->alphas;
  if (const auto* b = std::get_if<SpfBeta>(&law.variant)) gains = &b->betas;
  if (gains == nullptr) throw PreconditionError("u_spf_switch needs spf-switch or spf-beta");
  const auto hit = match_point(x, law.orbit, law.epsilon);
  if (!hit) return {};
  return {(*gains)[*hit] * (x - law.orbit.points[*hit]), hit};
}

inline double u_spf_phase(double x, long k, const ControllerState& st,
                          const ControlLaw& law) {
  const auto& v = detail::law_as<SpfPhase>(law);
  const auto ph = st.phase_at(k, law.orbit.size());
  if (!ph) return 0.0;
  return v.betas[*ph] * (x - law.orbit.points[*ph]);
}

inline double u_dfc_fix(double x, double x_prev, const ControlLaw& law) {
  const auto& v = detail::law_as<DfcFix>(law);
  const double p = law.orbit.point(0);
  const double dist = std::hypot(x - p, x_prev - p);
  return dist <= law.epsilon / std::numbers::sqrt2 ? v.gamma * (x - x_prev) : 0.0;
}

/// history = (x_k, x_{k-1}, ..., x_{k-m}).
inline SwitchOutput u_dfc_switch(std::span<const double> history, const ControlLaw& law) {
  const auto& v = detail::law_as<DfcSwitch>(law);
  const std::size_t m = law.orbit.size();
  if (history.size() < m + 1) throw PreconditionError("dfc-switch needs m+1 past states");
  const auto hit = match_delay(history, law.orbit, law.epsilon);
  if (!hit) return {};
  return {v.gammas[*hit] * (history[0] - history[m]), hit};
}

inline double u_dfc_phase(double x, double x_delay, long k, const ControllerState& st,
                          const ControlLaw& law) {
  const auto& v = detail::law_as<DfcPhase>(law);
  const auto ph = st.phase_at(k, law.orbit.size());
  if (!ph) return 0.0;
  return v.gammas[*ph] * (x - x_delay);
}

inline double u_edfc_phase(double x, double x_delay, double u_delay, long k,
                           const ControllerState& st, const ControlLaw& law) {
  const auto& v = detail::law_as<EdfcPhase>(law);
  const auto ph = st.phase_at(k, law.orbit.size());
  if (!ph) return 0.0;
  return v.gammas[*ph] * (x - x_delay) + v.R * u_delay;
}

/// Drives one law through a run: feed x_k to propose(), then commit() the
/// control actually applied (after any saturation).
class Controller {
 public:
  struct Proposal {
    double u = 0.0;
    /// Orbit index the control is referenced to; nullopt when inactive.
    std::optional<std::size_t> phase;
  };

  explicit Controller(ControlLaw law) : law_(std::move(law)) {
    validate(law_);
    const std::size_t m = law_.orbit.size();
    state_.state_history = History(m + 1);
    state_.control_history = History(m);
  }

  /// Past states x_{-1}, x_{-2}, ... (most recent first).
  void seed_history(std::span<const double> past) {
    for (std::size_t j = past.size(); j-- > 0;) state_.state_history.push(past[j]);
  }

  Proposal propose(long k, double x) {
    state_.state_history.push(x);
    Proposal out = std::visit([&](const auto& v) { return dispatch(v, k, x); }, law_.variant);
    if (out.phase && !first_activation_) first_activation_ = k;
    return out;
  }

  void commit(double applied_u) { state_.control_history.push(applied_u); }

  [[nodiscard]] const ControllerState& state() const { return state_; }
  [[nodiscard]] const ControlLaw& law() const { return law_; }
  /// First step at which the law produced an active output.
  [[nodiscard]] std::optional<long> first_activation() const { return first_activation_; }

 private:
  std::size_t m() const { return law_.orbit.size(); }

  void maybe_unlock(long k, double x) {
    if (!law_.relock || !state_.k0) return;
    const auto ph = state_.phase_at(k, m());
    if (ph && std::abs(x - law_.orbit.points[*ph]) > law_.relock_factor * law_.epsilon) {
      state_.activated = false;
      state_.k0.reset();
      state_.entry_phase.reset();
    }
  }

  void lock(long k, std::size_t phase) {
    state_.activated = true;
    state_.k0 = k;
    state_.entry_phase = phase;
  }

  Proposal dispatch(const SpfOgy& v, long, double x) {
    const double u = u_spf_ogy(x, law_);
    if (law_.epsilon > 0.0 && std::abs(x - law_.orbit.point(v.target)) <= law_.epsilon) {
      return {u, v.target};
    }
    return {};
  }
  Proposal dispatch(const SpfSwitch&, long, double x) {
    auto s = u_spf_switch(x, law_);
    return {s.u, s.phase};
  }
  Proposal dispatch(const SpfBeta&, long, double x) {
    auto s = u_spf_switch(x, law_);
    return {s.u, s.phase};
  }
  Proposal dispatch(const SpfPhase&, long k, double x) {
    maybe_unlock(k, x);
    if (!state_.activated) {
      if (auto hit = match_point(x, law_.orbit, law_.epsilon)) lock(k, *hit);
    }
    if (!state_.activated) return {};
    return {u_spf_phase(x, k, state_, law_), state_.phase_at(k, m())};
  }
  Proposal dispatch(const DfcFix&, long, double x) {
    if (state_.state_history.size() < 2 || !(law_.epsilon > 0.0)) return {};
    const double prev = state_.state_history.at(1);
    const double p = law_.orbit.point(0);
    if (std::hypot(x - p, prev - p) > law_.epsilon / std::numbers::sqrt2) return {};
    return {u_dfc_fix(x, prev, law_), std::size_t{0}};
  }
  Proposal dispatch(const DfcSwitch&, long, double) {
    if (!state_.state_history.full()) return {};
    const auto hist = state_.state_history.recent(m() + 1);
    auto s = u_dfc_switch(hist, law_);
    return {s.u, s.phase};
  }
  Proposal dispatch(const DfcPhase&, long k, double x) {
    if (!acquire_delay_lock(k, x)) return {};
    return {u_dfc_phase(x, state_.state_history.at(m()), k, state_, law_),
            state_.phase_at(k, m())};
  }
  Proposal dispatch(const EdfcPhase&, long k, double x) {
    if (!acquire_delay_lock(k, x)) return {};
    const double u_delay =
        state_.control_history.size() >= m() ? state_.control_history.at(m() - 1) : 0.0;
    return {u_edfc_phase(x, state_.state_history.at(m()), u_delay, k, state_, law_),
            state_.phase_at(k, m())};
  }

  bool acquire_delay_lock(long k, double x) {
    maybe_unlock(k, x);
    if (!state_.activated && state_.state_history.full()) {
      const auto hist = state_.state_history.recent(m() + 1);
      if (auto hit = match_delay(hist, law_.orbit, law_.epsilon)) lock(k, *hit);
    }
    return state_.activated;
  }

  ControlLaw law_;
  ControllerState state_;
  std::optional<long> first_activation_;
};

}  // namespace chaosctl
