#pragma once

#include "mixray/gauge.hpp"
#include "mixray/normal_op.hpp"

namespace mixray {

enum class SolveMethod { Auto, CG, Direct };  // Auto: CG for T1, Direct for L11

struct SolveOptions {
  SolveMethod method = SolveMethod::Auto;
  double reg_relative = 1e-6;  // lambda_reg = reg_relative * ||M||_2
  double tolerance = 1e-8;
  int max_iterations = 0;  // 0: 10 * unknowns
  int threads = 1;
};

struct ReconstructionReport {
  std::string mode;
  std::vector<int> grid;
  double F = 0.0;
  double regularization = 0.0;
  int iterations = 0;
  double relative_error = -1.0;  // -1 when no truth is given
  double residual_norm = 0.0;
  double relative_residual = 0.0;
  double condition_estimate = 0.0;
  bool converged = false;
};

// Dense products over fixed 256-wide blocks, so the floating-point result does
// not depend on the thread count.
inline constexpr Eigen::Index kProductBlock = 256;

inline Eigen::VectorXd matvec(const Eigen::MatrixXd& A, const Eigen::VectorXd& v, int threads) {
  Eigen::VectorXd out(A.rows());
  const auto blocks = static_cast<std::size_t>((A.rows() + kProductBlock - 1) / kProductBlock);
  parallel_for(blocks, threads, [&](std::size_t b) {
    const Eigen::Index lo = static_cast<Eigen::Index>(b) * kProductBlock, len = std::min(kProductBlock, A.rows() - lo);
    out.segment(lo, len).noalias() = A.middleRows(lo, len) * v;
  });
  return out;
}

inline Eigen::VectorXd matvec_transpose(const Eigen::MatrixXd& A, const Eigen::VectorXd& v, int threads) {
  Eigen::VectorXd out(A.cols());
  const auto blocks = static_cast<std::size_t>((A.cols() + kProductBlock - 1) / kProductBlock);
  parallel_for(blocks, threads, [&](std::size_t b) {
    const Eigen::Index lo = static_cast<Eigen::Index>(b) * kProductBlock, len = std::min(kProductBlock, A.cols() - lo);
    out.segment(lo, len).noalias() = A.middleCols(lo, len).transpose() * v;
  });
  return out;
}

inline double spectral_norm(const Eigen::MatrixXd& M, int iterations = 60, int threads = 1) {
  if (M.size() == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(M.cols()).normalized();
  double s = 0.0;
  for (int k = 0; k < iterations; ++k) {
    Eigen::VectorXd w = matvec_transpose(M, matvec(M, v, threads), threads);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    s = std::sqrt(nw);
    v = w / nw;
  }
  return s;
}

struct CglsResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  double condition = 0.0;  // of the Jacobi-scaled operator
};

// Conjugate gradients on (A^T A + diag(damp)^2) x = A^T b with the diagonal of
// the normal matrix as preconditioner. Convergence is measured on the
// unpreconditioned normal residual. Extreme Ritz values of the scaled normal
// operator, read off the recurrence, give the condition estimate.
inline CglsResult cgls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& damp, double tol,
                       int max_iter, int threads = 1) {
  const Eigen::Index n = A.cols();
  if (damp.size() != n) throw ConfigError("cgls: damping size mismatch");
  const Eigen::VectorXd l2 = damp.cwiseAbs2();
  CglsResult out;
  out.x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd dinv = A.colwise().squaredNorm().transpose();
  for (Eigen::Index j = 0; j < n; ++j) dinv[j] = dinv[j] + l2[j] > 0 ? 1.0 / (dinv[j] + l2[j]) : 0.0;
  Eigen::VectorXd r = matvec_transpose(A, b, threads);
  const double r0 = r.norm();
  if (r0 == 0.0) {
    out.converged = true;
    return out;
  }
  Eigen::VectorXd z = dinv.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double gamma = r.dot(z);
  std::vector<double> alphas, betas;
  for (int k = 0; k < max_iter; ++k) {
    const Eigen::VectorXd q = matvec_transpose(A, matvec(A, p, threads), threads) + l2.cwiseProduct(p);
    const double delta = p.dot(q);
    if (!(delta > 0.0)) break;
    const double alpha = gamma / delta;
    out.x += alpha * p;
    r -= alpha * q;
    z = dinv.cwiseProduct(r);
    const double gnew = r.dot(z);
    const double beta = gnew / gamma;
    alphas.push_back(alpha);
    betas.push_back(beta);
    out.iterations = k + 1;
    gamma = gnew;
    if (r.norm() <= tol * r0) {
      out.converged = true;
      break;
    }
    p = z + beta * p;
  }
  const auto m = static_cast<Eigen::Index>(alphas.size());
  if (m > 0) {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      T(k, k) = 1.0 / alphas[k] + (k > 0 ? betas[k - 1] / alphas[k - 1] : 0.0);
      if (k + 1 < m) T(k, k + 1) = T(k + 1, k) = std::sqrt(betas[k]) / alphas[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    out.condition = lo > 0 ? std::sqrt(hi / lo) : std::numeric_limits<double>::infinity();
  }
  return out;
}

// Cholesky factorization of the Jacobi-scaled regularized normal matrix
// D (A^T A + diag(damp)^2) D. The condition estimate comes from power and
// inverse power iteration on the scaled matrix.
inline CglsResult solve_normal_direct(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& damp) {
  const Eigen::Index n = A.cols();
  if (damp.size() != n) throw ConfigError("solve_normal_direct: damping size mismatch");
  CglsResult out;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  H.selfadjointView<Eigen::Lower>().rankUpdate(A.transpose());
  H.diagonal() += damp.cwiseAbs2();
  Eigen::VectorXd d = H.diagonal();
  for (Eigen::Index j = 0; j < n; ++j) d[j] = d[j] > 0 ? 1.0 / std::sqrt(d[j]) : 1.0;
  H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
  H = d.asDiagonal() * H * d.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) throw NumericError("reconstruct: normal matrix is not positive definite");
  const Eigen::VectorXd rhs = d.cwiseProduct(A.transpose() * b);
  out.x = d.cwiseProduct(llt.solve(rhs));
  out.iterations = 1;
  out.converged = out.x.allFinite();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized(), w = v;
  double hi = 0.0, lo_inv = 0.0;
  for (int k = 0; k < 100; ++k) {
    v = H * v;
    hi = v.norm();
    v /= hi;
    w = llt.solve(w);
    lo_inv = w.norm();
    w /= lo_inv;
  }
  out.condition = std::sqrt(hi * lo_inv);
  return out;
}

inline ReconstructionReport base_report(const NormalMatrix& nm) {
  ReconstructionReport rep;
  rep.mode = to_string(nm.kind);
  rep.grid = nm.nodes;
  rep.F = nm.F;
  return rep;
}

struct Reconstruction {
  Eigen::VectorXd field;
  ReconstructionReport report;
};

// Pointwise trace-free projection on stacked (1,1) values.
inline Eigen::VectorXd trace_free_stack(const Eigen::VectorXd& f, int n) {
  Eigen::VectorXd out = f;
  const Eigen::Index nodes = f.size() / (n * n);
  for (Eigen::Index k = 0; k < nodes; ++k) {
    double tr = 0.0;
    for (int a = 0; a < n; ++a) tr += f[k * n * n + a * n + a];
    for (int a = 0; a < n; ++a) out[k * n * n + a * n + a] -= tr / n;
  }
  return out;
}

// Orthonormal basis of trace-free n x n matrices in row-major layout, as the
// columns of an n^2 x (n^2 - 1) matrix.
inline Eigen::MatrixXd trace_free_basis(int n) {
  Eigen::VectorXd id = Eigen::VectorXd::Zero(n * n);
  for (int a = 0; a < n; ++a) id[a * n + a] = 1.0;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(id);
  const Eigen::MatrixXd Q = qr.householderQ();
  return Q.rightCols(n * n - 1);
}

// Projection onto the discrete solenoidal trace-free subspace, and its
// Euclidean transpose.
template <int N>
struct SolenoidalProjector {
  const GaugeSystem<N>* sys;
  SpMat Dt;
  explicit SolenoidalProjector(const GaugeSystem<N>* s) : sys(s), Dt(s->D_int.transpose()) {}
  Eigen::VectorXd apply(const Eigen::VectorXd& f) const {
    const Eigen::VectorXd tf = trace_free_stack(f, N);
    const Eigen::VectorXd u = sys->solve_factored(Dt * (sys->db.Wt * tf));
    return tf - sys->D_int * u;
  }
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& f) const {
    const Eigen::VectorXd u = sys->solve_factored(Dt * f);
    return trace_free_stack(f - sys->db.Wt * (sys->D_int * u), N);
  }
};

template <int N>
Reconstruction reconstruct(const NormalMatrix& nm, const Eigen::VectorXd& data, const GaugeSystem<N>* gauge,
                           const SolveOptions& o = {}, const Eigen::VectorXd* truth = nullptr) {
  if (nm.dim != N) throw ConfigError("reconstruct: dimension mismatch");
  if (data.size() != nm.M.rows()) throw ConfigError("reconstruct: data size does not match the normal matrix");
  Reconstruction out;
  out.report = base_report(nm);
  const double mnorm = spectral_norm(nm.M, 60, o.threads);
  const double lambda = o.reg_relative * mnorm;
  out.report.regularization = lambda;
  const int max_iter = o.max_iterations > 0 ? o.max_iterations : static_cast<int>(10 * nm.M.cols());
  CglsResult res;
  Eigen::VectorXd fitted;
  auto solve = [&](const Eigen::MatrixXd& A, const Eigen::VectorXd& damp, bool direct) {
    return direct ? solve_normal_direct(A, data, damp) : cgls(A, data, damp, o.tolerance, max_iter, o.threads);
  };
  if (nm.kind == TransformKind::T1) {
    res = solve(nm.M, Eigen::VectorXd::Constant(nm.M.cols(), lambda), o.method == SolveMethod::Direct);
    out.field = fitted = res.x;
  } else {
    if (!gauge) throw ConfigError("reconstruct: L11 mode needs a gauge system");
    if (gauge->grid().count() * N * N != static_cast<std::size_t>(nm.M.cols()))
      throw ConfigError("reconstruct: gauge grid does not match the normal matrix");
    // Unknowns: trace-free coordinates y of the solenoidal part S B y, and an
    // undamped interior potential u. Potentials present in the data are
    // absorbed by u; the solenoidal part S B y is returned.
    const SolenoidalProjector<N> P(gauge);
    const Eigen::MatrixXd B = trace_free_basis(N);
    const Eigen::Index nodes = nm.M.cols() / (N * N), q = N * N - 1, nu = gauge->D_int.cols();
    Eigen::MatrixXd SB(nm.M.cols(), nodes * q);
    for (Eigen::Index k = 0; k < nodes; ++k)
      for (Eigen::Index c = 0; c < q; ++c) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(nm.M.cols());
        e.segment(k * N * N, N * N) = B.col(c);
        SB.col(k * q + c) = P.apply(e);
      }
    Eigen::MatrixXd A(nm.M.rows(), nodes * q + nu);
    A.leftCols(nodes * q).noalias() = nm.M * SB;
    A.rightCols(nu).noalias() = nm.M * gauge->D_int;
    Eigen::VectorXd damp = Eigen::VectorXd::Zero(A.cols());
    damp.head(nodes * q).setConstant(lambda);
    res = solve(A, damp, o.method != SolveMethod::CG);
    out.field = SB * res.x.head(nodes * q);
    fitted = out.field + gauge->D_int * res.x.tail(nu);
  }
  if (!res.converged) throw NumericError("reconstruct: solver did not converge");
  out.report.iterations = res.iterations;
  out.report.converged = res.converged;
  out.report.condition_estimate = res.condition;
  out.report.residual_norm = (matvec(nm.M, fitted, o.threads) - data).norm();
  out.report.relative_residual = out.report.residual_norm / std::max(data.norm(), 1e-300);
  if (truth) {
    Eigen::VectorXd ref = *truth;
    if (nm.kind == TransformKind::L11) ref = SolenoidalProjector<N>(gauge).apply(*truth);
    const double nr = ref.norm();
    out.report.relative_error = nr > 0 ? (out.field - ref).norm() / nr : out.field.norm();
  }
  return out;
}

struct LayerResult {
  double level = 0.0;
  std::vector<std::size_t> nodes;
  ReconstructionReport report;
};

struct LayerSweep {
  Eigen::VectorXd field;
  std::vector<LayerResult> layers;
  double stitched_error = -1.0;
};

// Shell-by-shell solve. Layer j holds the nodes with levels[j-1] < x <= levels[j];
// already fixed layers enter only through their re-simulated contribution.
template <int N>
LayerSweep layer_sweep(const NormalMatrix& nm, const Eigen::VectorXd& data, const GridSpec<N>& grid,
                       const std::vector<double>& levels, const SolveOptions& o = {},
                       const Eigen::VectorXd* truth = nullptr) {
  if (nm.kind != TransformKind::T1) throw ConfigError("layer_sweep: only T1 mode is supported");
  if (levels.empty()) throw ConfigError("layer_sweep: no levels");
  for (std::size_t j = 1; j < levels.size(); ++j)
    if (!(levels[j] > levels[j - 1])) throw ConfigError("layer_sweep: levels must increase");
  if (levels.back() < grid.box.hi[0] - 1e-12) throw DomainError("layer_sweep: deepest level must cover the grid");
  const int C = N;
  LayerSweep out;
  out.field = Eigen::VectorXd::Zero(nm.M.cols());
  std::vector<Eigen::Index> fixed;
  double lower = -std::numeric_limits<double>::infinity();
  for (double level : levels) {
    LayerResult lr;
    lr.level = level;
    std::vector<Eigen::Index> idx;
    for (std::size_t k = 0; k < grid.count(); ++k) {
      const double x = grid.point(k)[0];
      if (x > lower + 1e-12 && x <= level + 1e-12) {
        lr.nodes.push_back(k);
        for (int c = 0; c < C; ++c) idx.push_back(static_cast<Eigen::Index>(k * C + c));
      }
    }
    lower = level;
    if (idx.empty()) throw DomainError("layer_sweep: empty layer");
    NormalMatrix sub = nm;
    sub.M = nm.M(idx, idx);
    Eigen::VectorXd rhs = data(idx);
    if (!fixed.empty()) rhs -= nm.M(idx, fixed) * out.field(fixed);
    Eigen::VectorXd sub_truth;
    if (truth) sub_truth = (*truth)(idx);
    Reconstruction r = reconstruct<N>(sub, rhs, nullptr, o, truth ? &sub_truth : nullptr);
    out.field(idx) = r.field;
    lr.report = r.report;
    out.layers.push_back(lr);
    fixed.insert(fixed.end(), idx.begin(), idx.end());
  }
  if (truth) out.stitched_error = (out.field - *truth).norm() / std::max(truth->norm(), 1e-300);
  return out;
}

}  // namespace mixray
