#pragma once

// Linear stability of the controlled orbit: gain ranges, companion-matrix
// Jacobians of the delay-embedded closed loop, their characteristic
// polynomials and spectral verdicts.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chaosctl/dynamics.hpp"
#include "chaosctl/error.hpp"
#include "chaosctl/orbits.hpp"
#include "chaosctl/polynomial.hpp"

namespace chaosctl {

/// A configuration counts as stable only below this spectral radius.
inline constexpr double kStabilityMargin = 1e-9;

[[nodiscard]] inline bool is_stable(double radius) {
  return radius < 1.0 - kStabilityMargin;
}

struct GainRange {
  double lower = 0.0;
  double upper = 0.0;
  bool feasible = false;

  [[nodiscard]] bool contains(double g) const {
    return feasible && g > lower && g < upper;
  }
  [[nodiscard]] double width() const { return upper - lower; }
  [[nodiscard]] double midpoint() const { return 0.5 * (lower + upper); }
};

inline GainRange make_range(double a, double b) {
  GainRange g;
  g.lower = std::min(a, b);
  g.upper = std::max(a, b);
  g.feasible = g.lower < g.upper;
  return g;
}

namespace detail {
inline double checked_sensitivity(const ParamMap& map, double p, double r0) {
  const double fr = map.deriv_r(p, r0);
  if (std::abs(fr) < 1e-14) {
    throw SingularSensitivity("parameter sensitivity vanishes at x = " +
                              std::to_string(p));
  }
  return fr;
}
}  // namespace detail

/// Gain that cancels the linearized one-step error: -f_x / f_r at (p, r0).
inline double alpha_gain(const ParamMap& map, double p) {
  const double r0 = map.nominal_r0;
  const double fr = detail::checked_sensitivity(map, p, r0);
  return -map.deriv_x(p, r0) / fr;
}

/// Gains beta with |f_x + beta f_r| < 1 at the orbit point.
inline GainRange beta_range(const ParamMap& map, double p) {
  const double r0 = map.nominal_r0;
  const double fr = detail::checked_sensitivity(map, p, r0);
  const double fx = map.deriv_x(p, r0);
  return make_range((-1.0 - fx) / fr, (1.0 - fx) / fr);
}

/// Delayed-feedback gain range for the logistic fixed point 1 - 1/r0.
inline GainRange gamma_fixed_range(double r0) {
  if (!(r0 > 1.0)) throw PreconditionError("gamma_fixed_range needs r0 > 1");
  GainRange g;
  g.lower = r0 * r0 * (r0 - 3.0) / (2.0 * (r0 - 1.0));
  g.upper = r0 * r0 / (r0 - 1.0);
  g.feasible = g.lower < g.upper;
  return g;
}

/// Both roots of x^2 + A x + B inside the unit circle.
[[nodiscard]] inline bool jury_quadratic(double a, double b) {
  return std::abs(b) < 1.0 && std::abs(a) < 1.0 + b;
}

/// Jacobian of the (m+1)-dimensional delay-embedded closed loop at one
/// orbit point: first row (a11, 0, ..., 0, a1m1), ones on the subdiagonal.
struct CompanionJacobian {
  int dimension = 0;
  double a11 = 0.0;
  double a1m1 = 0.0;

  [[nodiscard]] Eigen::MatrixXd dense() const {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(dimension, dimension);
    j(0, 0) = a11;
    j(0, dimension - 1) += a1m1;
    for (int i = 1; i < dimension; ++i) j(i, i - 1) = 1.0;
    return j;
  }
};

inline CompanionJacobian companion_jacobian(const ParamMap& map, double p,
                                            double gamma, int m) {
  if (m < 1) throw PreconditionError("period must be >= 1");
  const double r0 = map.nominal_r0;
  const double fr = map.deriv_r(p, r0);
  CompanionJacobian j;
  j.dimension = m + 1;
  j.a11 = map.deriv_x(p, r0) + gamma * fr;
  j.a1m1 = -gamma * fr;
  return j;
}

/// Jacobians J_i along the orbit, gains in orbit storage order.
inline std::vector<CompanionJacobian> orbit_jacobians(const ParamMap& map,
                                                      const PeriodicOrbit& orbit,
                                                      const std::vector<double>& gains) {
  if (gains.size() != orbit.size()) {
    throw DimensionMismatch("one gain per orbit point required");
  }
  const ParamMap at_r0 = map.at(orbit.r0);
  std::vector<CompanionJacobian> out;
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    out.push_back(companion_jacobian(at_r0, orbit.points[i], gains[i], orbit.period));
  }
  return out;
}

/// chi(x) = -x^{m+1} + prod_i (a1m1_i + x a11_i) for the product of the
/// companion Jacobians along one period.
inline Polynomial char_poly_product(const std::vector<CompanionJacobian>& jacobians) {
  if (jacobians.empty()) throw DimensionMismatch("no Jacobians");
  const int dim = jacobians.front().dimension;
  const std::size_t m = jacobians.size();
  if (static_cast<std::size_t>(dim) != m + 1) {
    throw DimensionMismatch("Jacobian dimension must equal period + 1");
  }
  Polynomial prod({1.0});
  for (const auto& j : jacobians) {
    if (j.dimension != dim) throw DimensionMismatch("mixed Jacobian dimensions");
    prod = prod * linear(j.a1m1, j.a11);
  }
  return prod - Polynomial::monomial(m + 1);
}

/// J_m ... J_2 J_1, the one-period monodromy of the linearized loop.
inline Eigen::MatrixXd jacobian_product(const std::vector<CompanionJacobian>& jacobians) {
  if (jacobians.empty()) throw DimensionMismatch("no Jacobians");
  const int dim = jacobians.front().dimension;
  Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(dim, dim);
  for (const auto& j : jacobians) {
    if (j.dimension != dim) throw DimensionMismatch("mixed Jacobian dimensions");
    prod = j.dense() * prod;
  }
  return prod;
}

/// Stabilizing interval for gamma_i when every other gain is zero.
///
/// With one nonzero gain the spectrum is 0 (multiplicity m-1) plus the roots
/// of x^2 - C a11 x - C a1m1, C = prod_{j != i} f_x(p_j). Writing
/// g = C gamma f_r and M for the free orbit multiplier, the Jury conditions
/// reduce to (-1 - M)/2 < g < 1 together with M < 1; nonempty iff
/// |1 + M| < 2.
inline GainRange single_gamma_range(const ParamMap& map, const PeriodicOrbit& orbit,
                                    std::size_t i) {
  if (i >= orbit.size()) throw PreconditionError("orbit index out of range");
  const double r0 = orbit.r0;
  double c = 1.0;
  for (std::size_t j = 0; j < orbit.size(); ++j) {
    if (j != i) c *= map.deriv_x(orbit.points[j], r0);
  }
  const double p = orbit.points[i];
  const double fr = map.deriv_r(p, r0);
  const double scale = c * fr;
  const double multiplier = c * map.deriv_x(p, r0);
  GainRange g;
  if (scale == 0.0) return g;
  const double from_lower = (-1.0 - multiplier) / (2.0 * scale);
  const double from_upper = 1.0 / scale;
  if (scale > 0.0) {
    g.lower = from_lower;
    g.upper = from_upper;
  } else {
    g.lower = from_upper;
    g.upper = from_lower;
  }
  g.feasible = g.lower < g.upper && multiplier < 1.0;
  return g;
}

/// Logistic closed form of single_gamma_range, case split on the sign of C.
inline GainRange single_gamma_range_logistic(const PeriodicOrbit& orbit, std::size_t i) {
  if (i >= orbit.size()) throw PreconditionError("orbit index out of range");
  const double r = orbit.r0;
  double c = 1.0;
  for (std::size_t j = 0; j < orbit.size(); ++j) {
    if (j != i) c *= r * (1.0 - 2.0 * orbit.points[j]);
  }
  const double p = orbit.points[i];
  const double s = p * (1.0 - p);
  const double a = (-1.0 - r * (1.0 - 2.0 * p) * c) / (2.0 * s * c);
  const double b = 1.0 / (s * c);
  GainRange g;
  if (c > 0.0) {
    g.lower = a;
    g.upper = b;
  } else {
    g.lower = b;
    g.upper = a;
  }
  g.feasible = g.lower < g.upper;
  return g;
}

struct Feasibility {
  double value = 0.0;
  bool satisfied = false;
};

/// |1 + M| with M the free orbit multiplier; single-gain stabilization is
/// possible iff the value is below 2.
inline Feasibility feasibility_condition(const ParamMap& map, const PeriodicOrbit& orbit) {
  Feasibility out;
  out.value = std::abs(1.0 + orbit_multiplier(map, orbit));
  out.satisfied = out.value < 2.0;
  return out;
}

/// 2m x 2m Jacobian of the extended delayed-feedback loop at one orbit
/// point, state (x_k..x_{k-m+1}, u_k..u_{k-m+1}). `gamma` is the gain that
/// produces the next control u_{k+1}.
inline Eigen::MatrixXd edfc_jacobian(const ParamMap& map, double p, double gamma,
                                     double R, int m) {
  if (m < 1) throw PreconditionError("period must be >= 1");
  if (!(R >= 0.0 && R < 1.0)) throw PreconditionError("R must lie in [0, 1)");
  const double r0 = map.nominal_r0;
  const double a = map.deriv_x(p, r0);
  const double b = map.deriv_r(p, r0);
  const Eigen::Index n = 2 * m;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  j(0, 0) = a;
  j(0, m) = b;
  for (int i = 1; i < m; ++i) {
    j(i, i - 1) = 1.0;
    j(m + i, m + i - 1) = 1.0;
  }
  j(m, 0) += gamma * a;
  j(m, m - 1) += -gamma;
  j(m, m) += gamma * b;
  j(m, 2 * m - 1) += R;
  return j;
}

/// Characteristic polynomial of a single 8x8 extended Jacobian (m = 4):
/// x^3 [x^5 - (a + gamma b) x^4 - R x + a R + gamma b].
inline Polynomial edfc_char_poly(double a, double b, double gamma, double R) {
  std::vector<double> c(9, 0.0);
  c[8] = 1.0;
  c[7] = -(a + gamma * b);
  c[4] = -R;
  c[3] = a * R + gamma * b;
  return Polynomial(std::move(c));
}

/// One-period product of extended Jacobians. gains[j] acts while the state
/// is at orbit point j, so J_j carries gains[j+1] in its control row.
inline Eigen::MatrixXd edfc_product(const ParamMap& map, const PeriodicOrbit& orbit,
                                    const std::vector<double>& gains, double R) {
  if (gains.size() != orbit.size()) {
    throw DimensionMismatch("one gain per orbit point required");
  }
  const ParamMap at_r0 = map.at(orbit.r0);
  const std::size_t m = orbit.size();
  Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(2 * static_cast<Eigen::Index>(m),
                                                   2 * static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    prod = edfc_jacobian(at_r0, orbit.points[j], gains[(j + 1) % m], R,
                         orbit.period) * prod;
  }
  return prod;
}

/// Reduced polynomial whose roots are the nonzero spectrum of the one-period
/// monodromy under phase-locked (extended) delayed feedback:
///   x (x - R)^m - prod_j [a_j (x - R) + b_j gamma_j (x - 1)],
/// a_j = f_x(p_j), b_j = f_r(p_j). With R = 0 this is the negated companion
/// product polynomial.
inline Polynomial delayed_feedback_char_poly(const ParamMap& map,
                                             const PeriodicOrbit& orbit,
                                             const std::vector<double>& gains,
                                             double R = 0.0) {
  if (gains.size() != orbit.size()) {
    throw DimensionMismatch("one gain per orbit point required");
  }
  const double r0 = orbit.r0;
  Polynomial lhs({0.0, 1.0});
  Polynomial rhs({1.0});
  for (std::size_t j = 0; j < orbit.size(); ++j) {
    const double a = map.deriv_x(orbit.points[j], r0);
    const double bg = map.deriv_r(orbit.points[j], r0) * gains[j];
    lhs = lhs * linear(-R, 1.0);
    rhs = rhs * linear(-a * R - bg, a + bg);
  }
  return lhs - rhs;
}

/// Spectral radius of the closed-loop monodromy via the reduced polynomial.
inline double closed_loop_radius(const ParamMap& map, const PeriodicOrbit& orbit,
                                 const std::vector<double>& gains, double R = 0.0) {
  return spectral_radius(delayed_feedback_char_poly(map, orbit, gains, R));
}

/// Same quantity via the explicit matrix product ((m+1)- or 2m-dimensional).
inline double closed_loop_radius_matrix(const ParamMap& map, const PeriodicOrbit& orbit,
                                        const std::vector<double>& gains, double R = 0.0) {
  if (R == 0.0) return spectral_radius(jacobian_product(orbit_jacobians(map, orbit, gains)));
  return spectral_radius(edfc_product(map, orbit, gains, R));
}

}  // namespace chaosctl
