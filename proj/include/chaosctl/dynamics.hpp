#pragma once

// Parametrized one-dimensional maps x_{k+1} = f(x_k, r), the logistic
// instance, open-loop iteration and the additive noise model.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "chaosctl/error.hpp"

namespace chaosctl {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] bool contains(double x, double tol = 0.0) const {
    return x >= lo - tol && x <= hi + tol;
  }
  [[nodiscard]] double width() const { return hi - lo; }
  [[nodiscard]] double clamp(double x) const {
    return x < lo ? lo : (x > hi ? hi : x);
  }
  /// Distance from x to the interval, 0 inside.
  [[nodiscard]] double excess(double x) const {
    return x < lo ? lo - x : (x > hi ? x - hi : 0.0);
  }
};

using MapFn = std::function<double(double x, double r)>;

/// A scalar map with its partial derivatives supplied as callbacks.
struct ParamMap {
  std::string name;
  MapFn eval;
  MapFn deriv_x;
  MapFn deriv_r;
  double nominal_r0 = 0.0;
  Interval chaotic_range;
  Interval state_domain;
  /// Largest parameter value for which state_domain is invariant.
  double max_parameter = std::numeric_limits<double>::infinity();

  /// Same map with a different nominal parameter.
  [[nodiscard]] ParamMap at(double r0) const {
    ParamMap copy = *this;
    copy.nominal_r0 = r0;
    return copy;
  }
};

inline constexpr double kLogisticDomainTol = 1e-12;

/// r x (1 - x), checked against the unit interval.
inline double logistic_step(double x, double r) {
  if (!(x >= -kLogisticDomainTol && x <= 1.0 + kLogisticDomainTol)) {
    throw DomainError("logistic_step: state " + std::to_string(x) +
                      " outside [0,1]");
  }
  return r * x * (1.0 - x);
}

inline ParamMap logistic(double r0 = 3.8) {
  ParamMap map;
  map.name = "logistic";
  map.eval = [](double x, double r) { return r * x * (1.0 - x); };
  map.deriv_x = [](double x, double r) { return r * (1.0 - 2.0 * x); };
  map.deriv_r = [](double x, double /*r*/) { return x * (1.0 - x); };
  map.nominal_r0 = r0;
  map.chaotic_range = {3.5699456718695445, 4.0};
  map.state_domain = {0.0, 1.0};
  map.max_parameter = 4.0;
  return map;
}

struct NoiseSpec {
  double amplitude = 0.0;
  std::uint64_t seed = 0;
};

/// Standard-normal variates from a fixed generator.
///
/// Uniforms are the top 53 bits of std::mt19937_64 scaled by 2^-53 (the
/// engine's output sequence is fixed by the C++ standard), and normals come
/// from the Box-Muller transform, consuming two uniforms per pair. The
/// sequence depends only on the seed and the platform's libm.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Adds amplitude * sigma_k; a zero amplitude never touches the stream.
class AdditiveNoise {
 public:
  explicit AdditiveNoise(const NoiseSpec& spec)
      : amplitude_(spec.amplitude), stream_(spec.seed) {
    if (!(spec.amplitude >= 0.0)) {
      throw DomainError("noise amplitude must be non-negative");
    }
  }

  double operator()(double x) {
    if (amplitude_ == 0.0) return x;
    return x + amplitude_ * stream_.normal();
  }

 private:
  double amplitude_;
  NoiseStream stream_;
};

inline constexpr double kEscapeTol = 1e-9;

struct Trajectory {
  std::vector<double> states;
  std::size_t clamp_count = 0;
};

/// Applies noise and clamping to a freshly mapped state. Escapes beyond
/// kEscapeTol are an error only when the parameter exceeds the map's
/// invariant range; otherwise clamping absorbs noise-induced excursions.
inline double settle_state(const ParamMap& map, double mapped, double r,
                           AdditiveNoise& noise, std::size_t& clamp_count) {
  if (r > map.max_parameter &&
      map.state_domain.excess(mapped) > kEscapeTol) {
    throw UnboundedTrajectory("state " + std::to_string(mapped) +
                              " escaped the domain at r = " +
                              std::to_string(r));
  }
  double next = noise(mapped);
  if (!map.state_domain.contains(next)) {
    next = map.state_domain.clamp(next);
    ++clamp_count;
  }
  return next;
}

/// Open-loop trajectory x_0..x_n at fixed parameter r.
inline Trajectory iterate_free(const ParamMap& map, double x0, double r,
                               long n, const NoiseSpec& noise_spec) {
  if (n < 0) throw DomainError("iterate_free: negative step count");
  if (!map.state_domain.contains(x0)) {
    throw DomainError("iterate_free: x0 outside the state domain");
  }
  AdditiveNoise noise(noise_spec);
  Trajectory out;
  out.states.reserve(static_cast<std::size_t>(n) + 1);
  out.states.push_back(x0);
  double x = x0;
  for (long k = 0; k < n; ++k) {
    x = settle_state(map, map.eval(x, r), r, noise, out.clamp_count);
    out.states.push_back(x);
  }
  return out;
}

}  // namespace chaosctl
