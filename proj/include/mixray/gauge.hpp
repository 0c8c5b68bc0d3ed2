#pragma once

#include "mixray/tensors.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <memory>

namespace mixray {

// Discrete Delta^B_F = delta^B_F d^B_F on zero-Dirichlet interior vector
// unknowns, stored in its symmetric weak form K = D_int^T W_t D_int.
template <int N>
class GaugeSystem {
 public:
  DiscreteDB<N> db;
  std::vector<std::size_t> interior;  // interior node indices
  std::vector<std::size_t> boundary;  // boundary node indices
  SpMat select;                       // interior unknowns -> full vector dofs
  SpMat D_int;
  SpMat K;
  double cg_tolerance = 1e-10;

  GaugeSystem(const MetricChart<N>& chart, const GridSpec<N>& grid, double F, int sigma = 1,
              VolumeWeight w = VolumeWeight::Scattering)
      : db(chart, grid, F, sigma, w) {
    for (std::size_t k = 0; k < grid.count(); ++k) (grid.is_boundary(k) ? boundary : interior).push_back(k);
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t a = 0; a < interior.size(); ++a)
      for (int i = 0; i < N; ++i) t.emplace_back(interior[a] * N + i, a * N + i, 1.0);
    select.resize(grid.count() * N, interior.size() * N);
    select.setFromTriplets(t.begin(), t.end());
    D_int = db.D * select;
    SpMat K0 = SpMat(D_int.transpose()) * (db.Wt * D_int);
    K = 0.5 * (K0 + SpMat(K0.transpose()));
    K.prune(0.0);
  }

  const GridSpec<N>& grid() const { return db.grid; }
  std::size_t unknowns() const { return interior.size() * N; }

  double hermitian_residual() const {
    SpMat A = SpMat(D_int.transpose()) * (db.Wt * D_int);
    return (A - SpMat(A.transpose())).norm() / std::max(A.norm(), 1e-300);
  }
  Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(K), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }
  double min_eigenvalue() const { return eigenvalues().minCoeff(); }
  int rank() const {
    Eigen::FullPivLU<Eigen::MatrixXd> lu{Eigen::MatrixXd(K)};
    return static_cast<int>(lu.rank());
  }

  // CG on K to relative residual cg_tolerance.
  Eigen::VectorXd solve_interior(const Eigen::VectorXd& rhs) const {
    if (rhs.norm() == 0.0) return Eigen::VectorXd::Zero(rhs.size());
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(cg_tolerance);
    cg.setMaxIterations(static_cast<Eigen::Index>(10 * unknowns()));
    cg.compute(K);
    Eigen::VectorXd u = cg.solve(rhs);
    if (cg.info() != Eigen::Success) throw NumericError("solve_dirichlet: conjugate gradient did not converge");
    return u;
  }
  // Direct factorization, for repeated projections.
  Eigen::VectorXd solve_factored(const Eigen::VectorXd& rhs) const {
    if (!ldlt_) {
      ldlt_ = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(K);
      if (ldlt_->info() != Eigen::Success) throw NumericError("gauge: factorization failed");
    }
    return ldlt_->solve(rhs);
  }

  VectorField<N> apply_laplacian(const VectorField<N>& u) const {
    VectorField<N> out(grid());
    out.vec() = -(db.Wv_inv * (db.D.transpose() * (db.Wt * (db.D * u.vec()))));
    return out;
  }

 private:
  mutable std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt_;
};

template <int N>
GaugeSystem<N> assemble_laplacian_BF(const MetricChart<N>& chart, const GridSpec<N>& grid, double F, int sigma = 1,
                                     VolumeWeight w = VolumeWeight::Scattering) {
  return GaugeSystem<N>(chart, grid, F, sigma, w);
}

// Solves Delta^B_F u = rhs in the interior with u = boundary on the grid
// boundary (boundary values of `boundary` are used, interior ones ignored).
template <int N>
VectorField<N> solve_dirichlet(const GaugeSystem<N>& sys, const VectorField<N>& rhs, const VectorField<N>& boundary) {
  const auto& g = sys.grid();
  if (!(rhs.grid == g) || !(boundary.grid == g)) throw DomainError("solve_dirichlet: grid mismatch");
  Eigen::VectorXd ub = Eigen::VectorXd::Zero(g.count() * N);
  for (std::size_t k : sys.boundary) ub.template segment<N>(k * N) = boundary.at(k);
  const Eigen::VectorXd wr = sys.db.Wv * rhs.vec();
  Eigen::VectorXd b = -(SpMat(sys.select.transpose()) * wr);
  b -= SpMat(sys.D_int.transpose()) * (sys.db.Wt * (sys.db.D * ub));
  const Eigen::VectorXd ui = sys.solve_interior(b);
  VectorField<N> u(g);
  u.vec() = ub + sys.select * ui;
  return u;
}

template <int N>
struct SolenoidalSplit {
  TensorField11<N> solenoidal;
  TensorField11<N> potential;
  VectorField<N> potential_field;  // u with P f = d^B_F u
};

template <int N>
SolenoidalSplit<N> solenoidal_split(const GaugeSystem<N>& sys, const TensorField11<N>& f, bool factored = false) {
  if (!(f.grid == sys.grid())) throw DomainError("solenoidal_split: grid mismatch");
  if (f.max_abs_trace() > 1e-10 * std::max(1.0, f.vec().cwiseAbs().maxCoeff()))
    throw DomainError("solenoidal_split: tensor field is not trace-free");
  const Eigen::VectorXd rhs = SpMat(sys.D_int.transpose()) * (sys.db.Wt * f.vec());
  const Eigen::VectorXd u = factored ? sys.solve_factored(rhs) : sys.solve_interior(rhs);
  SolenoidalSplit<N> s{TensorField11<N>(f.grid), TensorField11<N>(f.grid), VectorField<N>(f.grid)};
  s.potential.vec() = sys.D_int * u;
  s.solenoidal.vec() = f.vec() - s.potential.vec();
  s.potential_field.vec() = sys.select * u;
  return s;
}

}  // namespace mixray
