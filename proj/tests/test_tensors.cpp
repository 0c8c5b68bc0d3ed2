#include <gtest/gtest.h>

#include <random>

#include "mixray/tensors.hpp"

using namespace mixray;
using V3 = Vec<3>;
using M3 = Mat<3>;

namespace {

Box<3> cube() {
  Box<3> b;
  b.lo = V3(0.1, -0.3, -0.3);
  b.hi = V3(0.5, 0.3, 0.3);
  return b;
}

Box<3> slab() {
  Box<3> b;
  b.lo = V3(0.0, -1.0, -1.0);
  b.hi = V3(1.0, 1.0, 1.0);
  return b;
}

GridSpec<3> grid(int n) { return GridSpec<3>({n, n, n}, cube()); }

MetricChart<3> conformal() { return MetricChart<3>::conformal(slab(), 0.1, V3(0.2, 0.1, -0.1), V3(0.1, 0.05, 0.05)); }

}  // namespace

TEST(TraceSplit, WorkedExample) {
  Eigen::MatrixXd T(3, 3);
  T << 1, 2, 0, 0, 4, 0, 0, 0, 1;
  const auto s = trace_split(T);
  EXPECT_EQ(s.trace, 6.0);
  Eigen::MatrixXd expect = T;
  expect.diagonal().array() -= 2.0;
  EXPECT_EQ((s.trace_free - expect).norm(), 0.0);
  EXPECT_EQ(s.trace_free.trace(), 0.0);
  EXPECT_THROW(trace_split(Eigen::MatrixXd::Zero(2, 3)), DomainError);
}

TEST(TraceSplit, LambdaAndMu) {
  const Eigen::MatrixXd L = lambda_embed(1.5, 3);
  EXPECT_EQ(mu_trace(L), 4.5);
  Eigen::MatrixXd T(3, 3);
  T << 1, 2, 3, 4, -2, 6, 7, 8, 1;
  EXPECT_EQ(pair11(L, T), 0.0);
  EXPECT_EQ(pair11(T, T), T.squaredNorm());
}

TEST(GridField, MultilinearInterpolationIsExactAndVanishesOutside) {
  const auto g = grid(4);
  auto fn = [](const V3& p) { return V3(1 + p[0] * p[1], p[2] - p[0], p[0] * p[1] * p[2]); };
  const auto f = sample_vector_field(g, fn);
  for (const V3& p : {V3(0.13, 0.2, -0.1), V3(0.42, -0.29, 0.05), V3(0.5, 0.3, 0.3)})
    EXPECT_NEAR((f(p) - fn(p)).norm(), 0.0, 1e-14);
  EXPECT_EQ(f(V3(0.6, 0.0, 0.0)).norm(), 0.0);
  const auto t = sample_tensor_field(g, [](const V3& p) { return M3(p[0] * M3::Identity()); });
  EXPECT_NEAR(t(V3(0.2, 0.0, 0.1)).trace(), 0.6, 1e-14);
  EXPECT_NEAR(t.max_abs_trace(), 1.5, 1e-14);
}

TEST(DiscreteDB, RadialVectorGivesTraceFreeDiagonal) {
  const auto c = MetricChart<3>::euclidean(slab());
  const auto g = grid(6);
  const auto v = sample_vector_field(g, [](const V3& p) { return V3(p[0], 0.0, 0.0); });
  const auto T = covariant_dB(c, v, 0.0, 1, VolumeWeight::Chart);
  M3 expect = M3::Zero();
  expect.diagonal() << 2.0 / 3, -1.0 / 3, -1.0 / 3;
  for (std::size_t k = 0; k < g.count(); ++k) EXPECT_NEAR((T.at(k) - expect).norm(), 0.0, 1e-12);
}

TEST(DiscreteDB, AgreesWithPointwiseFormulaOnPolynomials) {
  const auto c = conformal();
  const auto g = grid(7);
  auto fn = [](const V3& p) { return V3(p[0] * p[1] + 0.3, p[2] * p[2] - p[0], p[1] * p[0] * p[0]); };
  const auto v = sample_vector_field(g, fn);
  for (double F : {0.0, 0.7}) {
    const auto T = covariant_dB(c, v, F);
    for (std::size_t k = 0; k < g.count(); ++k) {
      const M3 ref = covariant_dB_at(c, fn, g.point(k), F);
      EXPECT_NEAR((T.at(k) - ref).norm(), 0.0, 1e-8) << "F=" << F << " node " << k;
      EXPECT_NEAR(T.at(k).trace(), 0.0, 1e-12);
    }
  }
}

TEST(DiscreteDB, DeltaIsTheNegativeAdjoint) {
  const auto c = conformal();
  const auto g = grid(6);
  const DiscreteDB<3> db(c, g, 2.0);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  VectorField<3> v(g);
  TensorField11<3> T(g);
  for (auto& x : v.data) x = nd(rng);
  for (std::size_t k = 0; k < g.count(); ++k) {
    M3 m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = nd(rng);
    T.set(k, trace_free<3>(m));
  }
  const double lhs = db.inner_tensor(db.apply(v).vec(), T.vec());
  const double rhs = db.inner_vector(v.vec(), db.delta(T).vec());
  EXPECT_NEAR(lhs + rhs, 0.0, 1e-10 * std::abs(lhs));
  const Eigen::MatrixXd id = Eigen::MatrixXd(db.Wv_inv * db.Wv);
  EXPECT_NEAR((id - Eigen::MatrixXd::Identity(id.rows(), id.cols())).norm(), 0.0, 1e-8);
}

TEST(DiscreteDB, InputErrors) {
  const auto c = conformal();
  EXPECT_THROW(DiscreteDB<3>(c, grid(4), 1.0), DomainError);
  EXPECT_THROW(DiscreteDB<3>(c, grid(5), -1.0), DomainError);
  GridSpec<3> wide = grid(5);
  wide.box.hi[0] = 1.5;
  EXPECT_THROW(DiscreteDB<3>(c, wide, 1.0), DomainError);
  const DiscreteDB<3> db(c, grid(5), 1.0);
  const auto T = sample_tensor_field(db.grid, [](const V3&) { return M3(M3::Identity()); });
  EXPECT_THROW(db.delta(T), DomainError);
}
