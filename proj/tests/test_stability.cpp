#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "chaosctl/stability.hpp"
#include "oracles.hpp"

using namespace chaosctl;

namespace {

Eigen::MatrixXd fixed_point_jacobian(double r, double gamma) {
  const double p = 1.0 - 1.0 / r;
  const double a = r * (1.0 - 2.0 * p);
  const double b = p * (1.0 - p);
  Eigen::MatrixXd j(2, 2);
  j << a + gamma * b, -gamma * b, 1.0, 0.0;
  return j;
}

struct Orbit362 : ::testing::Test {
  ParamMap map = logistic(3.62);
  PeriodicOrbit orbit = find_upo(map, 3.62, 4);
  std::size_t idx = anchor_index(orbit, 0.8121);
};

}  // namespace

TEST(GainRanges, BetaRangeAtFixedPoint) {
  const ParamMap map = logistic(3.8);
  const double p = 1.0 - 1.0 / 3.8;
  const GainRange g = beta_range(map, p);
  EXPECT_TRUE(g.feasible);
  EXPECT_NEAR(g.lower, 4.126, 0.01);
  EXPECT_NEAR(g.upper, 14.44, 0.01);
  // Closed forms r^2 (r - 3)/(r - 1) and r^2.
  EXPECT_NEAR(g.lower, 3.8 * 3.8 * 0.8 / 2.8, 1e-12);
  EXPECT_NEAR(g.upper, 3.8 * 3.8, 1e-12);
  EXPECT_NEAR(alpha_gain(map, p), g.midpoint(), 1e-12);
}

TEST(GainRanges, BetaRangeVerdictMatchesOneStepFactor) {
  const ParamMap map = logistic(3.8);
  const double p = 1.0 - 1.0 / 3.8;
  const GainRange g = beta_range(map, p);
  for (int i = 0; i <= 400; ++i) {
    const double beta = -2.0 + 0.05 * i;
    const double factor = std::abs(map.deriv_x(p, 3.8) + beta * map.deriv_r(p, 3.8));
    if (std::abs(factor - 1.0) < 1e-9) continue;
    EXPECT_EQ(g.contains(beta), factor < 1.0) << beta;
  }
}

TEST(GainRanges, SingularSensitivity) {
  EXPECT_THROW(alpha_gain(logistic(3.8), 0.0), SingularSensitivity);
  EXPECT_THROW(beta_range(logistic(3.8), 1.0), SingularSensitivity);
}

TEST(GainRanges, GammaFixedRangeMatchesSpectrum) {
  const GainRange g = gamma_fixed_range(3.8);
  EXPECT_NEAR(g.lower, 2.0629, 1e-4);
  EXPECT_NEAR(g.upper, 5.1571, 1e-4);
  for (int i = 0; i <= 700; ++i) {
    const double gamma = 0.01 * i;
    const double rho = oracle::eigen_radius(fixed_point_jacobian(3.8, gamma));
    if (std::abs(rho - 1.0) < 1e-7) continue;
    EXPECT_EQ(g.contains(gamma), rho < 1.0) << gamma;
  }
  EXPECT_THROW(gamma_fixed_range(1.0), PreconditionError);
}

TEST(Jury, QuadraticAgreesWithQuadraticFormula) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng);
    const double b = u(rng);
    if (std::abs(std::abs(b) - 1.0) < 1e-9 || std::abs(std::abs(a) - 1.0 - b) < 1e-9) continue;
    EXPECT_EQ(jury_quadratic(a, b), oracle::quadratic_inside(a, b)) << a << " " << b;
    ++checked;
  }
  EXPECT_GT(checked, 9900);
}

TEST(Companion, DenseLayout) {
  const CompanionJacobian j{4, 0.5, -0.25};
  const Eigen::MatrixXd d = j.dense();
  EXPECT_EQ(d(0, 0), 0.5);
  EXPECT_EQ(d(0, 3), -0.25);
  EXPECT_EQ(d(1, 0), 1.0);
  EXPECT_EQ(d(3, 2), 1.0);
  EXPECT_EQ(d(2, 2), 0.0);
}

TEST(Companion, ProductPolynomialMatchesMatrixProduct) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int m = 1; m <= 8; ++m) {
    for (int trial = 0; trial < 25; ++trial) {
      std::vector<CompanionJacobian> js;
      for (int i = 0; i < m; ++i) js.push_back({m + 1, u(rng), u(rng)});
      const Polynomial chi = char_poly_product(js);
      const Polynomial det = characteristic_polynomial(jacobian_product(js));
      double scale = 0.0;
      for (double c : det.coeffs) scale = std::max(scale, std::abs(c));
      ASSERT_EQ(chi.coeffs.size(), det.coeffs.size());
      for (std::size_t k = 0; k < det.coeffs.size(); ++k) {
        EXPECT_NEAR(chi[k], -det[k], 1e-9 * (1.0 + scale)) << "m=" << m << " k=" << k;
      }
      EXPECT_NEAR(spectral_radius(chi), oracle::eigen_radius(jacobian_product(js)),
                  1e-6 * (1.0 + spectral_radius(chi)));
    }
  }
}

TEST(Companion, DimensionChecks) {
  EXPECT_THROW(char_poly_product({}), DimensionMismatch);
  EXPECT_THROW(char_poly_product({{3, 1.0, 1.0}}), DimensionMismatch);
  EXPECT_THROW(jacobian_product({{3, 1.0, 1.0}, {2, 1.0, 1.0}}), DimensionMismatch);
  const ParamMap map = logistic(3.62);
  EXPECT_THROW(orbit_jacobians(map, find_upo(map, 3.62, 4), {1.0}), DimensionMismatch);
}

TEST_F(Orbit362, ZeroGainRadiusIsMultiplier) {
  const std::vector<double> zero(4, 0.0);
  EXPECT_NEAR(closed_loop_radius(map, orbit, zero), std::abs(orbit.multiplier), 1e-9);
  EXPECT_NEAR(closed_loop_radius_matrix(map, orbit, zero), std::abs(orbit.multiplier), 1e-9);
}

TEST_F(Orbit362, SingleGammaRangeAndFeasibility) {
  const GainRange g = single_gamma_range(map, orbit, idx);
  EXPECT_TRUE(g.feasible);
  EXPECT_NEAR(g.lower, 4.79, 0.01);
  EXPECT_NEAR(g.upper, 5.23, 0.01);
  EXPECT_TRUE(g.contains(4.7997));
  const GainRange c = single_gamma_range_logistic(orbit, idx);
  EXPECT_NEAR(c.lower, g.lower, 1e-9);
  EXPECT_NEAR(c.upper, g.upper, 1e-9);
  const Feasibility f = feasibility_condition(map, orbit);
  EXPECT_NEAR(f.value, 1.83, 0.02);
  EXPECT_TRUE(f.satisfied);
}

TEST_F(Orbit362, SingleGammaVerdictMatchesExplicitProduct) {
  const GainRange g = single_gamma_range(map, orbit, idx);
  for (int s = 0; s < 20; ++s) {
    const double gamma = 4.5 + 0.04 * s;
    std::vector<double> gains(4, 0.0);
    gains[idx] = gamma;
    const double rho = oracle::eigen_radius(jacobian_product(orbit_jacobians(map, orbit, gains)));
    EXPECT_EQ(g.contains(gamma), rho < 1.0) << gamma << " rho=" << rho;
  }
}

TEST_F(Orbit362, EveryPointRangeMatchesSpectrum) {
  for (std::size_t i = 0; i < 4; ++i) {
    const GainRange g = single_gamma_range(map, orbit, i);
    const double lo = g.feasible ? g.lower - 1.0 : -5.0;
    for (int s = 0; s <= 40; ++s) {
      const double gamma = lo + 0.07 * s;
      std::vector<double> gains(4, 0.0);
      gains[i] = gamma;
      const double rho = oracle::eigen_radius(jacobian_product(orbit_jacobians(map, orbit, gains)));
      if (std::abs(rho - 1.0) < 1e-7) continue;
      EXPECT_EQ(g.contains(gamma), rho < 1.0) << i << " " << gamma;
    }
  }
}

TEST(SingleGamma, InfeasibleAtR38) {
  const ParamMap map = logistic(3.8);
  const PeriodicOrbit o = find_upo(map, 3.8, 4);
  EXPECT_FALSE(feasibility_condition(map, o).satisfied);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_FALSE(single_gamma_range(map, o, i).feasible);
}

TEST(Edfc, SingleJacobianPolynomial) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> ur(0.0, 0.99);
  for (int trial = 0; trial < 50; ++trial) {
    const double p = 0.05 + 0.9 * (trial + 0.5) / 50.0;
    const double r = 3.6 + 0.004 * trial;
    const double gamma = u(rng);
    const double R = ur(rng);
    const ParamMap map = logistic(r);
    const Polynomial expected =
        edfc_char_poly(map.deriv_x(p, r), map.deriv_r(p, r), gamma, R);
    const Polynomial got = characteristic_polynomial(edfc_jacobian(map, p, gamma, R, 4));
    ASSERT_EQ(got.coeffs.size(), 9u);
    for (std::size_t k = 0; k < 9; ++k) EXPECT_NEAR(got[k], expected[k], 1e-10) << k;
  }
  EXPECT_THROW(edfc_jacobian(logistic(3.8), 0.5, 1.0, 1.0, 4), PreconditionError);
}

TEST(Edfc, ProductAgreesWithReducedPolynomial) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (double r : {3.68, 3.72, 3.76, 3.8}) {
    const ParamMap map = logistic(r);
    const PeriodicOrbit o = find_upo(map, r, 4);
    for (int trial = 0; trial < 20; ++trial) {
      const std::vector<double> g{u(rng), u(rng), u(rng), u(rng)};
      const double R = 0.05 * (trial % 19);
      const double poly = closed_loop_radius(map, o, g, R);
      const double mat = oracle::eigen_radius(R == 0.0 ? jacobian_product(orbit_jacobians(map, o, g))
                                                      : edfc_product(map, o, g, R));
      EXPECT_NEAR(poly, mat, 1e-6 * (1.0 + mat)) << r << " " << R;
    }
  }
}

TEST(Edfc, ZeroMemoryReducesToDfc) {
  const ParamMap map = logistic(3.67);
  const PeriodicOrbit o = find_upo(map, 3.67, 4);
  const std::vector<double> g = align_gains(o, {0.4, 4.97156, -0.598, 2.09}, 0.5);
  const Polynomial dfc = char_poly_product(orbit_jacobians(map, o, g));
  const Polynomial red = delayed_feedback_char_poly(map, o, g, 0.0);
  for (std::size_t k = 0; k < dfc.coeffs.size(); ++k) EXPECT_NEAR(red[k], -dfc[k], 1e-12);
  EXPECT_NEAR(oracle::eigen_radius(edfc_product(map, o, g, 0.0)),
              oracle::eigen_radius(jacobian_product(orbit_jacobians(map, o, g))), 1e-9);
}

TEST(PublishedTuples, AreStable) {
  struct Case {
    double r;
    std::vector<double> gains;
    double anchor;
    double R;
    double radius;
  };
  const std::vector<Case> cases{
      {3.62, {0.0, 0.0, 0.0, 4.7997}, 0.5, 0.0, 0.9585},
      {3.67, {0.4, 4.97156, -0.598, 2.09}, 0.5, 0.0, 0.9005},
      {3.76, {1.333, 6.79, -0.6999, 3.601}, 0.5, 0.3, 0.8945},
      {3.8, {3.50293, 1.38, 7.49498, -1.181}, 0.8037, 0.3, 0.8715},
  };
  for (const auto& c : cases) {
    const ParamMap map = logistic(c.r);
    const PeriodicOrbit o = find_upo(map, c.r, 4);
    const auto g = align_gains(o, c.gains, c.anchor);
    EXPECT_NEAR(closed_loop_radius(map, o, g, c.R), c.radius, 5e-4) << c.r;
    EXPECT_NEAR(closed_loop_radius_matrix(map, o, g, c.R), c.radius, 5e-4) << c.r;
    EXPECT_TRUE(is_stable(closed_loop_radius(map, o, g, c.R)));
  }
}
