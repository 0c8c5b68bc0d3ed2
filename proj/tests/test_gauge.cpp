#include <gtest/gtest.h>

#include "mixray/gauge.hpp"

using namespace mixray;
using V3 = Vec<3>;
using M3 = Mat<3>;

namespace {

MetricChart<3> shell() { return MetricChart<3>::ball_shell(1.0, 0.45, 0.8); }

GridSpec<3> grid(int n) {
  Box<3> b;
  b.lo = V3(0.1, -0.3, -0.3);
  b.hi = V3(0.3, 0.3, 0.3);
  return GridSpec<3>({n, n, n}, b);
}

V3 poly(const V3& p) { return V3(p[0] * p[1] + 0.2, p[2] - p[0] * p[0], 1.0 + p[1] * p[2]); }

}  // namespace

TEST(GaugeSystem, SymmetricPositiveDefinite) {
  const GaugeSystem<3> sys(shell(), grid(5), 5.0);
  EXPECT_EQ(sys.unknowns(), 81u);
  EXPECT_LE(sys.hermitian_residual(), 1e-12);
  EXPECT_GT(sys.min_eigenvalue(), 0.0);
  EXPECT_EQ(sys.rank(), 81);
}

TEST(GaugeSystem, SmallestEigenvalueGrowsWithF) {
  double prev = 0.0;
  for (double F : {1.0, 2.0, 5.0, 10.0}) {
    const double m = GaugeSystem<3>(shell(), grid(5), F).min_eigenvalue();
    EXPECT_GT(m, prev) << "F=" << F;
    prev = m;
  }
}

TEST(Dirichlet, ManufacturedSolutionIsRecovered) {
  const GaugeSystem<3> sys(shell(), grid(6), 3.0);
  const auto u = sample_vector_field(sys.grid(), poly);
  const auto rhs = sys.apply_laplacian(u);
  const auto got = solve_dirichlet(sys, rhs, u);
  EXPECT_NEAR((got.vec() - u.vec()).norm(), 0.0, 1e-7 * u.vec().norm());
  EXPECT_THROW(solve_dirichlet(sys, sample_vector_field(grid(5), poly), u), DomainError);
}

TEST(SolenoidalSplit, RecombinesAndRemovesPotentials) {
  const GaugeSystem<3> sys(shell(), grid(6), 5.0);
  const auto& g = sys.grid();
  const auto f = sample_tensor_field(g, [](const V3& p) {
    M3 m;
    m << p[1], 1 + p[0], p[2], -p[2], 0.5, p[0] * p[1], 0.3, p[1] * p[1], -p[0];
    return trace_free<3>(m);
  });
  for (bool factored : {false, true}) {
    const auto s = solenoidal_split(sys, f, factored);
    EXPECT_LE((s.solenoidal.vec() + s.potential.vec() - f.vec()).cwiseAbs().maxCoeff(), 1e-14);
    const Eigen::VectorXd div = SpMat(sys.D_int.transpose()) * (sys.db.Wt * s.solenoidal.vec());
    const Eigen::VectorXd ref = SpMat(sys.D_int.transpose()) * (sys.db.Wt * f.vec());
    EXPECT_LE(div.norm(), 1e-8 * ref.norm());
  }
  // A potential with zero boundary values has no solenoidal part.
  VectorField<3> u = sample_vector_field(g, poly);
  for (std::size_t k : sys.boundary) u.set(k, V3::Zero());
  const auto du = sys.db.apply(u);
  const auto s = solenoidal_split(sys, du, true);
  EXPECT_LE(s.solenoidal.vec().norm(), 1e-6 * du.vec().norm());
  EXPECT_NEAR((s.potential_field.vec() - u.vec()).norm(), 0.0, 1e-6 * u.vec().norm());
  const auto tr = sample_tensor_field(g, [](const V3&) { return M3(M3::Identity()); });
  EXPECT_THROW(solenoidal_split(sys, tr), DomainError);
}
