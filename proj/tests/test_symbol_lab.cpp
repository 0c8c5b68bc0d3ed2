#include <gtest/gtest.h>

#include <random>

#include "mixray/symbol_lab.hpp"

using namespace mixray;
using namespace mixray::symbols;

TEST(Integrand, FiberT1AtZeroSlope) {
  IntegrandParams p;
  p.S = 0.0;
  p.Y = Eigen::Vector2d(0.6, -0.8);
  const CMatX m = integrand_matrix(Kind::T1_FIBER, p);
  Eigen::Matrix3d expect = Eigen::Matrix3d::Zero();
  expect(0, 0) = 1.0;
  expect.bottomRightCorner<2, 2>() = Eigen::Matrix2d::Identity() - p.Y * p.Y.transpose();
  EXPECT_EQ((m.real() - expect).norm(), 0.0);
  EXPECT_EQ(m.imag().norm(), 0.0);
  p.Y = Eigen::Vector2d(1.0, 1.0);
  EXPECT_THROW(integrand_matrix(Kind::T1_FIBER, p), DomainError);
}

TEST(EquatorialIntegral, NormalDirectionIsDiagonal) {
  const auto r = equatorial_integral(Kind::T1_FIBER, 1.0, Eigen::VectorXd::Zero(2));
  const Eigen::Matrix3d expect = Eigen::Vector3d(2 * kPi, kPi, kPi).asDiagonal();
  EXPECT_NEAR((r.matrix.real() - expect).norm(), 0.0, 1e-10);
  EXPECT_LE(r.anti_hermitian, 1e-14);
}

TEST(EquatorialIntegral, TangentialDirectionMatchesAngleSum) {
  // u = (0,0,1): w = (cos a, sin a, 0), S = cot a, Y = (sign sin a, 0).
  Eigen::VectorXd eta(2);
  eta << 0.0, 1.0;
  IntegralOptions o;
  o.order = 512;
  const auto r = equatorial_integral(Kind::T1_FIBER, 0.0, eta, o);
  const CutoffProfile chi = CutoffProfile::bump(1.0);
  Eigen::Matrix3d ref = Eigen::Matrix3d::Zero();
  const int M = 200000;
  for (int k = 0; k < M; ++k) {
    const double a = 2 * kPi * (k + 0.5) / M;
    if (std::abs(std::sin(a)) < 1e-9) continue;
    const double S = std::cos(a) / std::abs(std::sin(a));
    const double c = chi(S) * 2 * kPi / M;
    ref(0, 0) += c;
    ref(1, 1) += c * S * S;
    ref(2, 2) += c;
  }
  EXPECT_NEAR((r.matrix.real() - ref).norm(), 0.0, 1e-6 * ref.norm());
  EXPECT_THROW(equatorial_integral(Kind::T1_FIBER, 1.0, Eigen::VectorXd::Zero(2), IntegralOptions{4}), DomainError);
}

TEST(SolenoidalBasis, DimensionAndConstraints) {
  Eigen::VectorXd eta(2);
  eta << 0.3, -0.7;
  for (bool fiber : {true, false}) {
    const CMatX B = solenoidal_tracefree_basis(fiber, 0.4, eta);
    ASSERT_EQ(B.cols(), 5);
    CVecX z(3);
    z << (fiber ? cd(0.4, 0.0) : cd(0.4, -1.0)), eta[0], eta[1];
    for (int c = 0; c < B.cols(); ++c) {
      CMatX f(3, 3);
      for (int i = 0; i < 9; ++i) f(i / 3, i % 3) = B(i, c);
      EXPECT_LE(std::abs(f.trace()), 1e-12);
      EXPECT_LE((f * z).norm(), 1e-12);
    }
    EXPECT_LE((B.adjoint() * B - CMatX::Identity(5, 5)).norm(), 1e-12);
  }
}

TEST(EllipticityScan, FiberT1IsPositive) {
  const auto pts = direction_grid(3, 12);
  ASSERT_EQ(pts.size(), 12u);
  for (const auto& p : pts) EXPECT_NEAR(p.norm(), 1.0, 1e-14);
  const auto rep = ellipticity_scan(Kind::T1_FIBER, pts, false);
  EXPECT_TRUE(rep.pass);
  EXPECT_GT(rep.global_min, 0.0);
  for (const auto& p : direction_grid(4, 5)) EXPECT_NEAR(p.norm(), 1.0, 1e-14);
}

TEST(KernelSystem, DeterminantInThreeDimensions) {
  for (double rho : {0.0, 1.0, 2.5}) EXPECT_NEAR(kernel_system_check(rho, 3), -2 * (rho + 1) * (rho + 1), 1e-12);
  EXPECT_NEAR(kernel_system_check(0.0, 3), -2.0, 1e-14);
  EXPECT_NEAR(kernel_system_check(1.0, 3), -8.0, 1e-14);
  EXPECT_THROW(kernel_system_check(1.0, 2), DomainError);
  EXPECT_THROW(kernel_system_check(-1.0, 3), DomainError);
}

TEST(GaugeSymbols, CompositionDecompositionAndPositivity) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0), uf(0.1, 5.0);
  double single = 0.0;
  for (int k = 0; k < 30; ++k) {
    Eigen::VectorXd eta(2);
    eta << u(rng), u(rng);
    const double xi = u(rng), F = uf(rng);
    const auto r = gauge_symbol_check(xi, eta, F);
    EXPECT_LE(r.composition_residual, 1e-12);
    EXPECT_LE(r.decomposition_residual, 1e-12);
    EXPECT_GE(r.M_min_eig, -1e-12);
    EXPECT_GT(r.laplacian_min_eig, 0.0);
    EXPECT_GT(r.ellipticity_constant, 0.0);
    single = std::max(single, r.decomposition_residual_single_weight);
    CVecX f(3);
    f << cd(u(rng), u(rng)), cd(u(rng), u(rng)), cd(u(rng), u(rng));
    const auto [value, bound] = M_block_form_chain(xi, eta, F, f);
    EXPECT_GE(value + 1e-10, bound);
    EXPECT_GE(bound, -1e-10);
  }
  // weight 1/n on the first pair leaves a residual
  EXPECT_GT(single, 1e-3);
}

TEST(ExtensionCoefficients, SolveTheSystem) {
  const auto c = extension_coefficients();
  EXPECT_EQ(c[0], -6.0);
  EXPECT_EQ(c[1], 16.0);
  EXPECT_EQ(c[2], -9.0);
  for (int j : {-1, 0, 1}) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += c[k] * std::pow(-(k + 1.0), j);
    EXPECT_NEAR(s, 1.0, 1e-14) << "power " << j;
  }
}
