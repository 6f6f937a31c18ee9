#pragma once

// Real polynomials, Durand-Kerner simultaneous root iteration, and
// characteristic polynomials of dense matrices.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chaosctl/error.hpp"

namespace chaosctl {

using Complex = std::complex<double>;

/// Coefficients in ascending powers: c[0] + c[1] x + ... + c[n] x^n.
struct Polynomial {
  std::vector<double> coeffs;

  Polynomial() = default;
  explicit Polynomial(std::vector<double> c) : coeffs(std::move(c)) {}

  static Polynomial monomial(std::size_t power, double scale = 1.0) {
    std::vector<double> c(power + 1, 0.0);
    c[power] = scale;
    return Polynomial(std::move(c));
  }

  /// Highest power with a nonzero coefficient; -1 for the zero polynomial.
  [[nodiscard]] int degree() const {
    for (std::size_t i = coeffs.size(); i-- > 0;) {
      if (coeffs[i] != 0.0) return static_cast<int>(i);
    }
    return -1;
  }

  [[nodiscard]] double operator[](std::size_t i) const {
    return i < coeffs.size() ? coeffs[i] : 0.0;
  }

  [[nodiscard]] Complex operator()(Complex z) const {
    Complex acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * z + coeffs[i];
    return acc;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.coeffs.empty() || b.coeffs.empty()) return {};
    std::vector<double> c(a.coeffs.size() + b.coeffs.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
      for (std::size_t j = 0; j < b.coeffs.size(); ++j) {
        c[i + j] += a.coeffs[i] * b.coeffs[j];
      }
    }
    return Polynomial(std::move(c));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] + b[i];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] - b[i];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator*(double s, const Polynomial& p) {
    Polynomial out = p;
    for (double& c : out.coeffs) c *= s;
    return out;
  }
};

/// Linear factor c0 + c1 x.
inline Polynomial linear(double c0, double c1) { return Polynomial({c0, c1}); }

struct RootOptions {
  int max_iterations = 5000;
  double step_tol = 1e-15;
  double residual_tol = 1e-10;
  int polish_sweeps = 20;
};

/// |p(z)| relative to sum |c_i| |z|^i.
inline double relative_residual(const Polynomial& p, Complex z) {
  double scale = 0.0;
  const double az = std::abs(z);
  for (std::size_t i = p.coeffs.size(); i-- > 0;) scale = scale * az + std::abs(p.coeffs[i]);
  if (scale == 0.0) return 0.0;
  return std::abs(p(z)) / scale;
}

/// All complex roots by Durand-Kerner (Weierstrass) iteration.
///
/// Exact zero roots are factored out first. The remaining monic polynomial
/// of degree n starts from n points on a circle of radius half the Fujiwara
/// bound, rotated off the real axis, and every estimate is updated in place
/// (Gauss-Seidel style) until the corrections settle. Every returned root
/// has a relative residual below residual_tol or ConvergenceFailure is thrown.
inline std::vector<Complex> roots(const Polynomial& p, const RootOptions& opt = {}) {
  const int deg = p.degree();
  if (deg < 0) throw PreconditionError("roots of the zero polynomial");
  std::vector<Complex> out;
  std::size_t low = 0;
  while (p.coeffs[low] == 0.0) ++low;
  out.assign(low, Complex(0.0, 0.0));
  const int n = deg - static_cast<int>(low);
  if (n == 0) return out;

  const double lead = p.coeffs[static_cast<std::size_t>(deg)];
  std::vector<double> monic(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) monic[static_cast<std::size_t>(i)] = p.coeffs[low + static_cast<std::size_t>(i)] / lead;
  const Polynomial q(monic);

  if (n == 1) {
    out.emplace_back(-monic[0], 0.0);
    return out;
  }

  double bound = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = std::abs(monic[static_cast<std::size_t>(i)]);
    if (c == 0.0) continue;
    const double e = (i == 0) ? std::pow(0.5 * c, 1.0 / n) : std::pow(c, 1.0 / (n - i));
    bound = std::max(bound, e);
  }
  const double radius = std::max(bound, 1e-3);  // Fujiwara bound is 2*bound
  std::vector<Complex> z(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double angle = 2.0 * std::numbers::pi * j / n + 0.4;
    z[static_cast<std::size_t>(j)] = std::polar(radius, angle);
  }

  // Tiny roots never produce a large absolute step, so a root counts as
  // settled only when its step is small and its residual acceptable.
  // Clustered roots converge linearly; once every residual is acceptable,
  // a bounded number of extra sweeps polishes the simple roots.
  int polish = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    bool settled = true;
    bool accurate = true;
    for (std::size_t j = 0; j < z.size(); ++j) {
      Complex denom = 1.0;
      for (std::size_t k = 0; k < z.size(); ++k) {
        if (k != j) denom *= (z[j] - z[k]);
      }
      if (denom == Complex(0.0, 0.0)) denom = Complex(1e-300, 0.0);
      const Complex step = q(z[j]) / denom;
      z[j] -= step;
      const bool small = std::abs(step) <= opt.step_tol * (1.0 + std::abs(z[j]));
      const bool good = relative_residual(q, z[j]) < opt.residual_tol;
      settled = settled && small && good;
      accurate = accurate && good;
    }
    if (settled) break;
    if (accurate && ++polish > opt.polish_sweeps) break;
  }
  for (const Complex& root : z) {
    if (!(relative_residual(q, root) < opt.residual_tol)) {
      throw ConvergenceFailure("Durand-Kerner: residual " +
                               std::to_string(relative_residual(q, root)) +
                               " exceeds tolerance");
    }
    out.push_back(root);
  }
  return out;
}

inline double spectral_radius(const Polynomial& p, const RootOptions& opt = {}) {
  double rho = 0.0;
  for (const Complex& z : roots(p, opt)) rho = std::max(rho, std::abs(z));
  return rho;
}

/// Monic det(x I - A), ascending coefficients.
///
/// A is reduced to upper Hessenberg form H by orthogonal similarity, then
/// the leading principal minors obey
///   p_k = (x - h_kk) p_{k-1} - sum_{i<k} h_ik (prod_{j=i+1..k} h_{j,j-1}) p_{i-1}.
inline Polynomial characteristic_polynomial(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("matrix is not square");
  const Eigen::Index n = a.rows();
  if (n == 0) return Polynomial({1.0});
  Eigen::MatrixXd h;
  if (n <= 2) {
    h = a;
  } else {
    Eigen::HessenbergDecomposition<Eigen::MatrixXd> hess(a);
    h = hess.matrixH();
  }
  std::vector<Polynomial> minors;
  minors.reserve(static_cast<std::size_t>(n) + 1);
  minors.emplace_back(std::vector<double>{1.0});
  for (Eigen::Index k = 1; k <= n; ++k) {
    Polynomial pk = linear(-h(k - 1, k - 1), 1.0) * minors[static_cast<std::size_t>(k - 1)];
    double sub = 1.0;
    for (Eigen::Index i = k - 1; i >= 1; --i) {
      sub *= h(i, i - 1);
      pk = pk - (h(i - 1, k - 1) * sub) * minors[static_cast<std::size_t>(i - 1)];
    }
    minors.push_back(std::move(pk));
  }
  return minors.back();
}

inline double spectral_radius(const Eigen::MatrixXd& a, const RootOptions& opt = {}) {
  return spectral_radius(characteristic_polynomial(a), opt);
}

}  // namespace chaosctl
