#pragma once

#include "mixray/normal_op.hpp"

#include <complex>
#include <random>

namespace mixray::symbols {

using cd = std::complex<double>;

enum class Kind { T1_FIBER, T1_BASE, L11_FIBER, L11_BASE };

inline std::string to_string(Kind k) {
  switch (k) {
    case Kind::T1_FIBER: return "T1_FIBER";
    case Kind::T1_BASE: return "T1_BASE";
    case Kind::L11_FIBER: return "L11_FIBER";
    case Kind::L11_BASE: return "L11_BASE";
  }
  return "?";
}
inline bool is_fiber(Kind k) { return k == Kind::T1_FIBER || k == Kind::L11_FIBER; }
inline bool is_l11(Kind k) { return k == Kind::L11_FIBER || k == Kind::L11_BASE; }

struct IntegrandParams {
  double S = 0.0;         // fiber: S~
  Eigen::VectorXd Y;      // unit Y^ in R^{n-1}
  double xiF = 0.0;       // base
  Eigen::VectorXd etaF;   // base
  CutoffProfile chi = CutoffProfile::bump(1.0);
};

namespace detail {

// v in C^n -> v (x) w in C^{n^2}, row-major (upper index slow).
inline CMatX outer_left(const CVecX& w) {
  const auto n = w.size();
  CMatX L = CMatX::Zero(n * n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) L(i * n + j, i) = w[j];
  return L;
}

inline Eigen::MatrixXd t1_fiber_core(double S, const Eigen::VectorXd& Y) {
  const auto n = Y.size() + 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  m(0, 0) = 1.0;
  m.block(0, 1, 1, n - 1) = -S * Y.transpose();
  m.block(1, 0, n - 1, 1) = -S * Y;
  m.bottomRightCorner(n - 1, n - 1) =
      Eigen::MatrixXd::Identity(n - 1, n - 1) + (S * S - 1.0) * Y * Y.transpose();
  return m;
}

inline CMatX t1_base_core(double xiF, const Eigen::VectorXd& Y, const Eigen::VectorXd& etaF) {
  const auto n = Y.size() + 1;
  const double c = Y.dot(etaF) / (xiF * xiF + 1.0);
  CMatX m = CMatX::Zero(n, n);
  m(0, 0) = 1.0;
  for (int j = 0; j < n - 1; ++j) {
    m(0, j + 1) = cd(xiF, -1.0) * c * Y[j];
    m(j + 1, 0) = cd(xiF, 1.0) * c * Y[j];
  }
  const double q = Y.dot(etaF) * Y.dot(etaF) / (xiF * xiF + 1.0) - 1.0;
  m.bottomRightCorner(n - 1, n - 1) =
      (Eigen::MatrixXd::Identity(n - 1, n - 1) + q * Y * Y.transpose()).cast<cd>();
  return m;
}

}  // namespace detail

inline CMatX integrand_matrix(Kind kind, const IntegrandParams& p) {
  if (std::abs(p.Y.norm() - 1.0) > 1e-12) throw DomainError("integrand_matrix: Y must be a unit vector");
  const auto n = p.Y.size() + 1;
  switch (kind) {
    case Kind::T1_FIBER: return (p.chi(p.S) * detail::t1_fiber_core(p.S, p.Y)).cast<cd>();
    case Kind::T1_BASE: return detail::t1_base_core(p.xiF, p.Y, p.etaF);
    case Kind::L11_FIBER: {
      CVecX w(n);
      w[0] = p.S;
      for (int j = 0; j < n - 1; ++j) w[j + 1] = p.Y[j];
      const CMatX L = detail::outer_left(w);
      const CMatX core = detail::t1_fiber_core(p.S, p.Y).cast<cd>();
      return p.chi(p.S) * (L * core * L.transpose());
    }
    case Kind::L11_BASE: {
      if (p.etaF.size() != n - 1) throw DomainError("integrand_matrix: eta_F has wrong size");
      const double c = p.Y.dot(p.etaF) / (p.xiF * p.xiF + 1.0);
      CVecX wl(n), wr(n);
      wl[0] = -cd(p.xiF, 1.0) * c;
      wr[0] = -cd(p.xiF, -1.0) * c;
      for (int j = 0; j < n - 1; ++j) wl[j + 1] = wr[j + 1] = p.Y[j];
      const CMatX L = detail::outer_left(wl);
      const CMatX R = detail::outer_left(wr).transpose();
      return L * detail::t1_base_core(p.xiF, p.Y, p.etaF) * R;
    }
  }
  return {};
}

struct IntegralOptions {
  int order = 64;
  CutoffProfile chi = CutoffProfile::bump(1.0);  // fiber kinds
  double alpha = 0.5;                            // base kinds
  double h = 0.1;                                // base kinds, h = 1 / F
  double excise = 1e-6;
};

struct IntegralResult {
  CMatX matrix;
  double anti_hermitian = 0.0;  // relative norm of the removed anti-Hermitian part
};

inline IntegralResult hermitize(const CMatX& A) {
  IntegralResult r;
  r.matrix = 0.5 * (A + A.adjoint());
  r.anti_hermitian = (0.5 * (A - A.adjoint())).norm() / std::max(A.norm(), 1e-300);
  return r;
}

// Orthonormal basis (columns) of the orthogonal complement of u in R^n.
inline Eigen::MatrixXd complement_basis(const Eigen::VectorXd& u) {
  const auto n = u.size();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(u.normalized());
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return Q.rightCols(n - 1);
}

// Fiber regime: integral over the (xi, eta)-equatorial sphere.
// Base regime: (xi, eta) are read as (xi_F, eta_F); integral over Y in S^{n-2}
// with the Gaussian weight, normalized by the T1 (1,1) entry at eta_F = 0.
inline IntegralResult equatorial_integral(Kind kind, double xi, const Eigen::VectorXd& eta,
                                          const IntegralOptions& o = {}) {
  if (o.order < 8) throw DomainError("equatorial_integral: quadrature order must be at least 8");
  const auto n = eta.size() + 1;
  if (n < 3) throw DomainError("equatorial_integral: dimension must be at least 3");
  const int C = is_l11(kind) ? n * n : n;
  CMatX acc = CMatX::Zero(C, C);
  IntegrandParams p;
  p.chi = o.chi;
  if (is_fiber(kind)) {
    Eigen::VectorXd u(n);
    u[0] = xi;
    u.tail(n - 1) = eta;
    if (u.norm() == 0.0) throw DomainError("equatorial_integral: degenerate direction");
    const Eigen::MatrixXd E = complement_basis(u);
    const SphereQuadrature q = sphere_quadrature(n - 2, o.order);
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      const Eigen::VectorXd w = E * q.points[k];
      const double wn = w.tail(n - 1).norm();
      if (wn < o.excise) continue;
      p.S = w[0] / wn;
      p.Y = w.tail(n - 1) / wn;
      if (o.chi(p.S) == 0.0) continue;
      acc += q.weights[k] * integrand_matrix(kind, p);
    }
  } else {
    if (o.h <= 0 || o.alpha <= 0) throw DomainError("equatorial_integral: base regime needs h > 0 and alpha > 0");
    p.xiF = xi;
    p.etaF = eta;
    const double phiF = o.alpha * (xi * xi + 1.0);
    const double pre = 1.0 / std::sqrt(xi * xi + 1.0);
    const SphereQuadrature q = sphere_quadrature(n - 2, o.order);
    double mass = 0.0;
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      p.Y = q.points[k].normalized();
      const double ye = p.Y.dot(eta);
      const double wgt = q.weights[k] * pre * std::exp(-ye * ye / (2.0 * o.h * phiF));
      acc += wgt * integrand_matrix(kind, p);
      mass += q.weights[k] * pre;
    }
    acc /= mass;
  }
  return hermitize(acc);
}

// Null space of the symbol of delta^B_F on (1,1) tensors: trace f = 0 and
// f zeta = 0 with zeta = (xi, eta) (fiber) or (xi_F - i, eta_F) (base).
inline CMatX solenoidal_tracefree_basis(bool fiber, double xi, const Eigen::VectorXd& eta) {
  const auto n = eta.size() + 1;
  CVecX z(n);
  z[0] = fiber ? cd(xi, 0.0) : cd(xi, -1.0);
  for (int j = 0; j < n - 1; ++j) z[j + 1] = eta[j];
  CMatX Cn = CMatX::Zero(n + 1, n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) Cn(i, i * n + j) = z[j];
    Cn(n, i * n + i) = 1.0;
  }
  Eigen::JacobiSVD<CMatX> svd(Cn, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (int k = 0; k < s.size(); ++k)
    if (s[k] > 1e-10 * std::max(1.0, s[0])) ++rank;
  return svd.matrixV().rightCols(n * n - rank);
}

inline double min_eigenvalue(const CMatX& H) {
  Eigen::SelfAdjointEigenSolver<CMatX> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

struct DirectionResult {
  double xi = 0.0;
  Eigen::VectorXd eta;
  double h = 0.0;
  double min_eig = 0.0;
  double anti_hermitian = 0.0;
  int subspace_dim = 0;
  bool pass = false;
};

struct SymbolReport {
  Kind kind = Kind::T1_FIBER;
  bool restricted = false;
  std::vector<DirectionResult> directions;
  double global_min = 0.0;
  bool pass = false;
};

// Deterministic direction set in R^n: Fibonacci points for n = 3, seeded
// Gaussian draws otherwise.
inline std::vector<Eigen::VectorXd> direction_grid(int n, int count, unsigned seed = 7) {
  std::vector<Eigen::VectorXd> out;
  if (n == 3) {
    const double ga = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double zc = 1.0 - (2.0 * k + 1.0) / count;
      const double r = std::sqrt(1.0 - zc * zc);
      Eigen::VectorXd u(3);
      u << zc, r * std::cos(ga * k), r * std::sin(ga * k);
      out.push_back(u);
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u[i] = nd(rng);
    out.push_back(u.normalized());
  }
  return out;
}

inline SymbolReport ellipticity_scan(Kind kind, const std::vector<Eigen::VectorXd>& points, bool restricted,
                                     const IntegralOptions& o = {}) {
  SymbolReport rep;
  rep.kind = kind;
  rep.restricted = restricted && is_l11(kind);
  rep.global_min = std::numeric_limits<double>::infinity();
  for (const auto& pt : points) {
    DirectionResult d;
    d.xi = pt[0];
    d.eta = pt.tail(pt.size() - 1);
    d.h = is_fiber(kind) ? 0.0 : o.h;
    const IntegralResult I = equatorial_integral(kind, d.xi, d.eta, o);
    d.anti_hermitian = I.anti_hermitian;
    if (rep.restricted) {
      const CMatX B = solenoidal_tracefree_basis(is_fiber(kind), d.xi, d.eta);
      d.subspace_dim = static_cast<int>(B.cols());
      const CMatX R = B.adjoint() * I.matrix * B;
      d.min_eig = min_eigenvalue(0.5 * (R + R.adjoint()));
    } else {
      d.subspace_dim = static_cast<int>(I.matrix.rows());
      d.min_eig = min_eigenvalue(I.matrix);
    }
    d.pass = d.min_eig > 0.0;
    rep.global_min = std::min(rep.global_min, d.min_eig);
    rep.directions.push_back(d);
  }
  rep.pass = !rep.directions.empty() && rep.global_min > 0.0;
  return rep;
}

// Determinant of the n x n block system of the kernel equations.
inline double kernel_system_check(double rho, int n) {
  if (n < 3 || rho < 0) throw DomainError("kernel_system_check: needs n >= 3 and rho >= 0");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  A(0, 0) = 1.0;
  A(0, 1) = 1.0;
  A(1, 0) = -(rho + 1.0);
  for (int j = 2; j < n; ++j) {
    A(0, j) = 1.0;
    A(1, j) = rho;
    A(j, 1) = rho + 1.0;
    A(j, j) = -1.0;
  }
  return A.determinant();
}

struct GaugeSymbolReport {
  double composition_residual = 0.0;
  double decomposition_residual = 0.0;
  double decomposition_residual_single_weight = 0.0;
  double M_min_eig = 0.0;
  double laplacian_min_eig = 0.0;
  double ellipticity_constant = 0.0;  // min eig / (xi^2 + |eta|^2 + F^2)
  CMatX laplacian;                    // symbol of -Delta^B_F
  CMatX rough_laplacian;              // symbol of nabla_F^* nabla_F
};

// Gauge symbols at a normal-coordinate point (Christoffel term a = 0).
inline GaugeSymbolReport gauge_symbol_check(double xi, const Eigen::VectorXd& eta, double F) {
  const auto n = eta.size() + 1;
  const double z2 = xi * xi + F * F + eta.squaredNorm();
  CVecX zeta(n);
  zeta[0] = cd(xi, F);
  for (int j = 0; j < n - 1; ++j) zeta[j + 1] = eta[j];
  // sigma(d_F / i) v = v (x) zeta; B removes the trace.
  const CMatX dsym = detail::outer_left(zeta);
  CMatX Bp = CMatX::Identity(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Bp(i * n + i, j * n + j) -= 1.0 / n;
  const CMatX dB = Bp * dsym;
  // sigma(delta^B_F / i): f -> f zeta_bar, minus the trace term.
  CMatX dl = CMatX::Zero(n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dl(i, i * n + j) = std::conj(zeta[j]);
  CMatX e = CMatX::Zero(n * n, 1);
  for (int i = 0; i < n; ++i) e(i * n + i, 0) = 1.0;
  const CMatX deltaB = dl - (1.0 / n) * dl * e * e.transpose();

  GaugeSymbolReport r;
  CMatX outer = CMatX::Zero(n, n);  // rows: (xi^2+F^2, (xi - iF) eta^T), ((xi + iF) eta, eta eta^T)
  outer(0, 0) = xi * xi + F * F;
  for (int j = 0; j < n - 1; ++j) {
    outer(0, j + 1) = cd(xi, -F) * eta[j];
    outer(j + 1, 0) = cd(xi, F) * eta[j];
    for (int k = 0; k < n - 1; ++k) outer(j + 1, k + 1) = eta[j] * eta[k];
  }
  r.rough_laplacian = z2 * CMatX::Identity(n, n);
  r.laplacian = r.rough_laplacian - (1.0 / n) * outer;
  r.composition_residual = (deltaB * dB - r.laplacian).norm();

  // D1..D5
  CMatX D1 = CMatX::Zero(n * n, n), D2 = CMatX::Zero(n * n, n), D4 = CMatX::Zero(n * n, n);
  CMatX D3 = CMatX::Zero(n, 1), D5 = CMatX::Zero(1, n);
  for (int j = 0; j < n - 1; ++j) {
    D1(0 * n + (j + 1), 0) = eta[j];
    D2((j + 1) * n + 0, j + 1) = cd(xi, -F);
    for (int k = 0; k < n - 1; ++k) D4((j + 1) * n + (k + 1), j + 1) = eta[k];
    D3(j + 1, 0) = -eta[j];
    D5(0, j + 1) = eta[j];
  }
  D3(0, 0) = cd(xi, -F);
  const CMatX d12 = D1.adjoint() * D1 + D2.adjoint() * D2;
  const CMatX d33 = D3 * D3.adjoint();
  const CMatX d45 = D4.adjoint() * D4 - D5.adjoint() * D5;
  const double nn = static_cast<double>(n);
  const CMatX rhs = ((nn - 2) / nn) * r.rough_laplacian + (2.0 / nn) * d12 + (1.0 / nn) * d33 + (2.0 / nn) * d45;
  // weight 1/n on D1*D1 + D2*D2 does not close; kept as a diagnostic
  const CMatX rhs_single =
      ((nn - 2) / nn) * r.rough_laplacian + (1.0 / nn) * d12 + (1.0 / nn) * d33 + (2.0 / nn) * d45;
  r.decomposition_residual = (r.laplacian - rhs).norm();
  r.decomposition_residual_single_weight = (r.laplacian - rhs_single).norm();

  const CMatX M = 2.0 * r.rough_laplacian - outer;
  r.M_min_eig = min_eigenvalue(M);
  r.laplacian_min_eig = min_eigenvalue(r.laplacian);
  r.ellipticity_constant = z2 > 0 ? r.laplacian_min_eig / z2 : 0.0;
  return r;
}

// The quadratic-form chain used for semidefiniteness of the second block of
// M: returns (form value, intermediate lower bound).
inline std::pair<double, double> M_block_form_chain(double xi, const Eigen::VectorXd& eta, double F,
                                                    const CVecX& f) {
  const auto n = eta.size() + 1;
  CMatX Q = CMatX::Zero(n, n);
  Q(0, 0) = xi * xi + F * F;
  for (int j = 0; j < n - 1; ++j) {
    Q(0, j + 1) = -cd(xi, -F) * eta[j];
    Q(j + 1, 0) = -cd(xi, F) * eta[j];
    for (int k = 0; k < n - 1; ++k) Q(j + 1, k + 1) = (j == k ? 2.0 * eta.squaredNorm() : 0.0) - eta[j] * eta[k];
  }
  const double value = (f.adjoint() * Q * f)(0, 0).real();
  const CVecX fy = f.tail(n - 1);
  cd ef = 0.0;
  for (int j = 0; j < n - 1; ++j) ef += eta[j] * fy[j];
  const double bound = (xi * xi + F * F) * std::norm(f[0]) - std::norm(cd(xi, -F)) * std::norm(f[0]) -
                       2.0 * std::norm(ef) + 2.0 * eta.squaredNorm() * fy.squaredNorm();
  return {value, bound};
}

// Exact rational solve of the Vandermonde-type system in the nodes -1, -2, -3.
inline std::array<double, 3> extension_coefficients() {
  struct Q {
    long long p, q;
    Q(long long a = 0, long long b = 1) : p(a), q(b) { norm(); }
    void norm() {
      if (q < 0) p = -p, q = -q;
      long long a = std::llabs(p), b = q;
      while (b) {
        const long long t = a % b;
        a = b;
        b = t;
      }
      if (a > 1) p /= a, q /= a;
    }
    Q operator-(const Q& o) const { return Q(p * o.q - o.p * q, q * o.q); }
    Q operator*(const Q& o) const { return Q(p * o.p, q * o.q); }
    Q operator/(const Q& o) const { return Q(p * o.q, q * o.p); }
  };
  Q A[3][4] = {{Q(-1), Q(-1, 2), Q(-1, 3), Q(1)}, {Q(1), Q(1), Q(1), Q(1)}, {Q(-1), Q(-2), Q(-3), Q(1)}};
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    while (A[piv][c].p == 0) ++piv;
    if (piv != c)
      for (int k = 0; k < 4; ++k) std::swap(A[c][k], A[piv][k]);
    for (int r = 0; r < 3; ++r) {
      if (r == c || A[r][c].p == 0) continue;
      const Q f = A[r][c] / A[c][c];
      for (int k = 0; k < 4; ++k) A[r][k] = A[r][k] - f * A[c][k];
    }
  }
  std::array<double, 3> out{};
  for (int r = 0; r < 3; ++r) {
    const Q v = A[r][3] / A[r][r];
    out[r] = static_cast<double>(v.p) / static_cast<double>(v.q);
  }
  return out;
}

}  // namespace mixray::symbols
