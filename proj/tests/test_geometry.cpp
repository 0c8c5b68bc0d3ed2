#include <gtest/gtest.h>

#include <random>

#include "mixray/geometry.hpp"

using namespace mixray;
using V3 = Vec<3>;
using M3 = Mat<3>;

namespace {

Box<3> slab() {
  Box<3> b;
  b.lo = V3(0.0, -1.0, -1.0);
  b.hi = V3(1.0, 1.0, 1.0);
  return b;
}

MetricChart<3> conformal() { return MetricChart<3>::conformal(slab(), 0.1, V3(0.2, 0.1, -0.1), V3(0.1, 0.05, 0.05)); }

V3 unit_dir(const MetricChart<3>& c, const V3& z, V3 d) { return d / std::sqrt(d.dot(c.metric(z) * d)); }

}  // namespace

TEST(Christoffel, FlatChartVanishes) {
  const auto c = MetricChart<3>::euclidean(slab());
  const auto G = christoffel_symbols(c, V3(0.3, 0.2, -0.5));
  for (int k = 0; k < 3; ++k) EXPECT_EQ(G[k].norm(), 0.0);
}

TEST(Christoffel, ExponentialConformalHandValues) {
  const auto c = MetricChart<3>::conformal(slab(), 0.0, V3(1.0, 0.0, 0.0), V3::Zero());
  const auto G = christoffel_symbols(c, V3(0.0, 0.0, 0.0));
  M3 gx = M3::Zero(), gy1 = M3::Zero(), gy2 = M3::Zero();
  gx(0, 0) = 1.0;
  gx(1, 1) = gx(2, 2) = -1.0;
  gy1(0, 1) = gy1(1, 0) = 1.0;
  gy2(0, 2) = gy2(2, 0) = 1.0;
  EXPECT_NEAR((G[0] - gx).norm(), 0.0, 1e-12);
  EXPECT_NEAR((G[1] - gy1).norm(), 0.0, 1e-12);
  EXPECT_NEAR((G[2] - gy2).norm(), 0.0, 1e-12);
}

TEST(Christoffel, MatchesFiniteDifferencesOfTheMetric) {
  const auto c = conformal();
  const V3 p(0.4, 0.2, -0.3);
  const double h = 1e-5;
  std::array<M3, 3> dg;
  for (int l = 0; l < 3; ++l) {
    V3 e = V3::Zero();
    e[l] = h;
    dg[l] = (c.metric(p + e) - c.metric(p - e)) / (2 * h);
  }
  const M3 gi = c.metric(p).inverse();
  const auto G = christoffel_symbols(c, p);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double v = 0.0;
        for (int l = 0; l < 3; ++l) v += 0.5 * gi(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        EXPECT_NEAR(G[k](i, j), v, 1e-8);
      }
}

TEST(Christoffel, GridSampledIsSymmetric) {
  GridSpec<3> g;
  g.nodes = {5, 5, 5};
  g.box = slab();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  std::vector<double> vals;
  for (std::size_t k = 0; k < g.count(); ++k) {
    M3 m = M3::Identity();
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        const double r = u(rng);
        m(i, j) += r;
        if (i != j) m(j, i) += r;
      }
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) vals.push_back(m(i, j));
  }
  const auto c = MetricChart<3>::grid_sampled(g, vals);
  const auto G = christoffel_symbols(c, V3(0.37, 0.11, -0.42));
  for (int k = 0; k < 3; ++k) EXPECT_EQ((G[k] - G[k].transpose()).norm(), 0.0);
}

TEST(Christoffel, RejectsPointsOutsideTheBox) {
  EXPECT_THROW(christoffel_symbols(conformal(), V3(1.5, 0.0, 0.0)), DomainError);
}

TEST(Geodesic, FlatChartGivesTheStraightSegment) {
  const auto c = MetricChart<3>::euclidean(slab());
  const V3 z(0.5, 0.0, 0.0), zeta(0.0, 1.0, 0.0);
  const auto path = shoot_geodesic(c, z, zeta);
  EXPECT_NEAR(path.t.front(), -1.0, 1e-9);
  EXPECT_NEAR(path.t.back(), 1.0, 1e-9);
  for (std::size_t m = 0; m < path.size(); ++m) EXPECT_NEAR((path.p[m] - (z + path.t[m] * zeta)).norm(), 0.0, 1e-12);
}

TEST(Geodesic, BallShellMatchesTheCartesianChord) {
  const auto c = MetricChart<3>::ball_shell(1.0, 0.3, 0.8);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(0.05, 0.25), uy(-0.4, 0.4);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    const V3 z(ux(rng), uy(rng), uy(rng));
    const V3 zeta = unit_dir(c, z, V3(nd(rng), nd(rng), nd(rng)));
    const auto path = shoot_geodesic(c, z, zeta);
    const V3 P0 = c.embed(z), D = c.embed_jacobian(z) * zeta;
    EXPECT_NEAR(D.norm(), 1.0, 1e-12);
    for (std::size_t m = 0; m < path.size(); m += 7)
      EXPECT_NEAR((path.p[m] - c.chart_from_cartesian(P0 + path.t[m] * D)).norm(), 0.0, 1e-8);
  }
}

TEST(Geodesic, ConformalUnitSpeedIsConserved) {
  const auto c = conformal();
  const V3 z(0.3, 0.1, 0.2);
  const auto path = shoot_geodesic(c, z, unit_dir(c, z, V3(0.2, 1.0, -0.5)));
  for (std::size_t m = 0; m < path.size(); ++m)
    EXPECT_NEAR(path.v[m].dot(c.metric(path.p[m]) * path.v[m]), 1.0, 1e-8);
}

TEST(Geodesic, TimeReversalReturnsToTheStart) {
  const auto c = conformal();
  const V3 z(0.4, 0.0, 0.1);
  GeodesicOptions o;
  o.stop.max_arc = 0.5;
  const auto fwd = shoot_geodesic(c, z, unit_dir(c, z, V3(0.3, 1.0, 0.2)), o);
  const auto back = shoot_geodesic(c, fwd.p.back(), V3(-fwd.v.back()), o);
  EXPECT_NEAR(back.t.back(), 0.5, 1e-12);
  EXPECT_NEAR((back.p.back() - z).norm(), 0.0, 1e-7);
}

TEST(Geodesic, InputErrors) {
  const auto c = conformal();
  EXPECT_THROW(shoot_geodesic(c, V3(0.3, 0.0, 0.0), V3(1.0, 1.0, 0.0)), DomainError);
  EXPECT_THROW(shoot_geodesic(c, V3(-0.1, 0.0, 0.0), unit_dir(c, V3(0.1, 0, 0), V3(0, 1, 0))), DomainError);
  GeodesicOptions o;
  o.max_steps = 5;
  const V3 z(0.5, 0.0, 0.0);
  EXPECT_THROW(shoot_geodesic(c, z, unit_dir(c, z, V3(0, 1, 0)), o), TrappedRayError);
}

TEST(Transport, FlatChartKeepsFieldsConstant) {
  const auto c = MetricChart<3>::euclidean(slab());
  const auto path = shoot_geodesic(c, V3(0.5, 0.1, 0.0), V3(0.6, 0.8, 0.0));
  const Eigen::Vector3d w(0.3, -1.0, 2.0);
  for (bool cov : {false, true})
    for (const auto& v : parallel_transport(path, w, cov)) EXPECT_EQ((v - w).norm(), 0.0);
}

TEST(Transport, ConormalCovectorStaysConormalAndInnerProductsHold) {
  const auto c = conformal();
  const V3 z(0.3, -0.2, 0.1);
  const V3 zeta = unit_dir(c, z, V3(0.1, 0.7, 0.7));
  const auto path = shoot_geodesic(c, z, zeta);
  const M3 g0 = c.metric(z);
  V3 eta(0.2, -0.5, 0.9);
  eta -= eta.dot(zeta) * (g0 * zeta);
  const V3 other(1.0, 0.3, -0.2);
  const auto a = parallel_transport(path, eta, true);
  const auto b = parallel_transport(path, other, true);
  const double ab0 = eta.dot(g0.inverse() * other);
  for (std::size_t m = 0; m < path.size(); ++m) {
    EXPECT_LE(std::abs(a[m].dot(path.v[m])), 1e-9);
    EXPECT_NEAR(a[m].dot(c.metric(path.p[m]).inverse() * b[m]), ab0, 1e-8);
  }
  const V3 u(0.1, 0.2, 0.3), w(-0.4, 0.0, 0.5);
  const auto tu = parallel_transport(path, u, false), tw = parallel_transport(path, w, false);
  for (std::size_t m = 0; m < path.size(); ++m)
    EXPECT_NEAR(tu[m].dot(c.metric(path.p[m]) * tw[m]), u.dot(g0 * w), 1e-8);
}

TEST(Transport, StepHalvingShowsFourthOrder) {
  const auto c = conformal();
  const V3 z(0.5, 0.0, 0.1);
  const V3 zeta = unit_dir(c, z, V3(0.3, 1.0, -0.4));
  auto frame = [&](double h) {
    GeodesicOptions o;
    o.step = h;
    o.stop.max_arc = 0.4;
    return shoot_geodesic(c, z, zeta, o).psi.back();
  };
  const M3 a = frame(0.1), b = frame(0.05), d = frame(0.025);
  const double ratio = (a - b).norm() / (b - d).norm();
  EXPECT_GT(ratio, 13.0);
  EXPECT_LT(ratio, 19.0);
}

TEST(Convexity, FlatSlabHasZeroAlpha) {
  const auto r = boundary_convexity_alpha(MetricChart<3>::euclidean(slab()), Vec<2>(0.0, 0.0));
  EXPECT_TRUE(r.isotropic);
  EXPECT_EQ(r.alpha, 0.0);
}

TEST(Convexity, BallShellConvexAndConcaveSides) {
  // k = (R -+ x)^2 I at y = 0, g^xx = 1: half H = +-R / 2.
  const auto convex = boundary_convexity_alpha(MetricChart<3>::ball_shell(1.0, 0.3, 0.8), Vec<2>(0.0, 0.0));
  EXPECT_TRUE(convex.isotropic);
  EXPECT_NEAR(convex.alpha, 0.5, 1e-12);
  const auto concave = boundary_convexity_alpha(MetricChart<3>::ball_shell(1.0, 0.3, 0.8, true), Vec<2>(0.0, 0.0));
  EXPECT_NEAR(concave.alpha, -0.5, 1e-12);
  EXPECT_EQ(conjugation_sign(MetricChart<3>::ball_shell(1.0, 0.3, 0.8)), -1);
  EXPECT_EQ(conjugation_sign(MetricChart<3>::ball_shell(1.0, 0.3, 0.8, true)), 1);
}
