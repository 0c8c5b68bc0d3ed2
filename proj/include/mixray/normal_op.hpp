#pragma once

#include "mixray/transforms.hpp"

namespace mixray {

enum class TransformKind { T1, L11 };

inline std::string to_string(TransformKind k) { return k == TransformKind::T1 ? "T1" : "L11"; }

// True when a field callable returns an n x n matrix, false for vectors.
template <int N, class Field>
inline constexpr bool returns_tensor_v =
    std::decay_t<std::invoke_result_t<Field, const Vec<N>&>>::ColsAtCompileTime == N;

struct CutoffProfile {
  enum class Kind { Bump, Gaussian } kind = Kind::Bump;
  double width = 1.0;  // bump support (-width, width), width <= 1
  double nu = 0.0;     // gaussian variance (explicit, or alpha / F)

  static CutoffProfile bump(double w = 1.0) {
    if (w <= 0 || w > 1) throw DomainError("cutoff: bump width must lie in (0, 1]");
    CutoffProfile c;
    c.kind = Kind::Bump;
    c.width = w;
    return c;
  }
  static CutoffProfile gaussian(double variance) {
    if (variance <= 0) throw DomainError("cutoff: gaussian variance must be positive");
    CutoffProfile c;
    c.kind = Kind::Gaussian;
    c.nu = variance;
    return c;
  }
  static CutoffProfile gaussian_from_alpha(double alpha, double F) {
    if (alpha <= 0 || F <= 0) throw DomainError("cutoff: nu = alpha / F needs alpha > 0 and F > 0");
    return gaussian(alpha / F);
  }

  double operator()(double s) const {
    if (kind == Kind::Bump) {
      const double u = s / width;
      if (std::abs(u) >= 1.0) return 0.0;
      return std::exp(1.0 - 1.0 / (1.0 - u * u));
    }
    return std::exp(-s * s / (2.0 * nu));
  }
  // Half-length of the integration interval in s.
  double support() const { return kind == Kind::Bump ? width : 6.0 * std::sqrt(nu); }
  std::string name() const { return kind == Kind::Bump ? "bump" : "gaussian"; }
};

struct NormalOptions {
  TransformKind kind = TransformKind::T1;
  double F = 0.0;
  int sigma = 1;
  CutoffProfile chi;
  int radial_order = 8;
  int angular_order = 32;
  GeodesicOptions geodesic;
  int threads = 1;
};

// One backprojection ray through a base point: the sampling parameters, the
// initial data for the geodesic, and the projector factor in chart basis.
template <int N>
struct BackRay {
  double s = 0.0;
  Eigen::VectorXd omega;
  Vec<N> zeta;
  Vec<N> theta;
  double coef = 0.0;  // chi-weighted quadrature weights / x
  Mat<N> factor;      // D p_{w,c} D^{-1} in chart basis
  Vec<N> cov;         // chart components of the covector attached for L11
};

template <int N>
std::vector<BackRay<N>> backprojection_rays(const MetricChart<N>& chart, const Vec<N>& z, const NormalOptions& o) {
  const double x = chart.bdf(z);
  if (x <= 0.0) throw DomainError("backprojection: x must be positive at the evaluation point");
  const Mat<N> g = chart.metric(z);
  const double sup = o.chi.support();
  const Quadrature1D qs = gauss_weighted(o.radial_order, -sup, sup, o.chi);
  const SphereQuadrature qw = sphere_quadrature(N - 2, o.angular_order);
  Vec<N> scale = Vec<N>::Constant(x);
  scale[0] = x * x;
  std::vector<BackRay<N>> rays;
  rays.reserve(qs.nodes.size() * qw.points.size());
  for (std::size_t a = 0; a < qs.nodes.size(); ++a) {
    const double s = qs.nodes[a];
    for (std::size_t b = 0; b < qw.points.size(); ++b) {
      BackRay<N> r;
      r.s = s;
      r.omega = qw.points[b];
      Vec<N> raw;
      raw[0] = x * s;
      raw.tail(N - 1) = r.omega;
      r.zeta = raw / std::sqrt(raw.dot(g * raw));
      r.theta.setZero();
      r.theta.tail(N - 1) = g.bottomRightCorner(N - 1, N - 1) * r.omega;
      r.coef = qs.weights[a] * qw.weights[b] / x;
      Vec<N> w = Vec<N>::Zero();
      w.tail(N - 1) = r.omega;
      Vec<N> sv;
      sv[0] = s;
      sv.tail(N - 1) = r.omega;
      const Vec<N> c = g * sv;
      const Mat<N> bsc = oblique_projection<N>(w, c);
      r.factor = scale.asDiagonal() * bsc * scale.cwiseInverse().asDiagonal();
      r.cov = c.cwiseQuotient(scale);
      rays.push_back(std::move(r));
    }
  }
  return rays;
}

inline int value_size(TransformKind k, int n) { return k == TransformKind::T1 ? n : n * n; }

// L applied to per-ray data: data(ray) returns the transform value of that ray.
template <int N, class Data>
Eigen::VectorXd apply_backprojection_L(const MetricChart<N>& chart, const Vec<N>& z, const NormalOptions& o,
                                       Data&& data) {
  const auto rays = backprojection_rays(chart, z, o);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(value_size(o.kind, N));
  for (const auto& r : rays) {
    const Vec<N> u = r.coef * (r.factor * Vec<N>(data(r)));
    if (o.kind == TransformKind::T1) {
      out += u;
    } else {
      for (int a = 0; a < N; ++a)
        for (int e = 0; e < N; ++e) out[a * N + e] += u[a] * r.cov[e];
    }
  }
  if (o.kind == TransformKind::L11) {
    double tr = 0;
    for (int a = 0; a < N; ++a) tr += out[a * N + a];
    for (int a = 0; a < N; ++a) out[a * N + a] -= tr / N;
  }
  return out;
}

template <int N>
RayWeight make_weight(const NormalOptions& o, std::atomic<long>* warnings = nullptr) {
  RayWeight w;
  w.F = o.F;
  w.sigma = o.sigma;
  w.warnings = warnings;
  return w;
}

// Pointwise N_F at z for a field given as a callable (vector-valued for T1,
// (1,1)-valued for L11). The weight and the projector factor are folded into
// the t-integrand.
template <int N, class Field>
Eigen::VectorXd apply_normal_NF(const MetricChart<N>& chart, Field&& f, const Vec<N>& z, const NormalOptions& o,
                                std::atomic<long>* warnings = nullptr) {
  if (o.F < 0) throw DomainError("apply_normal_NF: F must be non-negative");
  if (returns_tensor_v<N, Field> != (o.kind == TransformKind::L11))
    throw ConfigError("apply_normal_NF: field type does not match the transform kind");
  const auto rays = backprojection_rays(chart, z, o);
  const RayWeight wt = make_weight<N>(o, warnings);
  const double xz = chart.bdf(z);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(value_size(o.kind, N));
  for (const auto& r : rays) {
    const GeodesicPath<N> path = shoot_geodesic(chart, z, r.zeta, o.geodesic);
    Vec<N> th;
    for (std::size_t m = 0; m < path.size(); ++m) {
      if (path.weight[m] == 0.0) continue;
      const double pr = detail::pairing_at(path, m, r.theta, th);
      Vec<N> lf;
      if constexpr (returns_tensor_v<N, Field>) {
        lf = Mat<N>(f(path.p[m])) * path.v[m];
      } else {
        lf = f(path.p[m]);
      }
      const Vec<N> pf = lf - path.v[m] * (th.dot(lf) / pr);
      const double c = r.coef * path.weight[m] * wt(chart.bdf(path.p[m]), xz);
      const Vec<N> u = c * (r.factor * (path.psi[m].transpose() * pf));
      if (o.kind == TransformKind::T1) {
        out += u;
      } else {
        for (int a = 0; a < N; ++a)
          for (int e = 0; e < N; ++e) out[a * N + e] += u[a] * r.cov[e];
      }
    }
  }
  if (o.kind == TransformKind::L11) {
    double tr = 0;
    for (int a = 0; a < N; ++a) tr += out[a * N + a];
    for (int a = 0; a < N; ++a) out[a * N + a] -= tr / N;
  }
  return out;
}

// Weighted forward values for every backprojection ray through z.
template <int N>
struct RayRecord {
  Vec<N> z, zeta, theta;
  double s = 0.0;
  Eigen::VectorXd omega;
  Vec<N> value;
};

template <int N, class Field>
std::vector<RayRecord<N>> forward_dataset(const MetricChart<N>& chart, Field&& f, const Vec<N>& z,
                                          const NormalOptions& o, std::atomic<long>* warnings = nullptr) {
  const auto rays = backprojection_rays(chart, z, o);
  const RayWeight wt = make_weight<N>(o, warnings);
  std::vector<RayRecord<N>> out;
  out.reserve(rays.size());
  for (const auto& r : rays) {
    const GeodesicPath<N> path = shoot_geodesic(chart, z, r.zeta, o.geodesic);
    RayRecord<N> rec{z, r.zeta, r.theta, r.s, r.omega, Vec<N>::Zero()};
    if constexpr (returns_tensor_v<N, Field>) {
      if (o.kind != TransformKind::L11) throw ConfigError("forward_dataset: tensor field given for T1");
      rec.value = mixed_L11_on_path(chart, path, r.theta, f, wt);
    } else {
      if (o.kind != TransformKind::T1) throw ConfigError("forward_dataset: vector field given for L11");
      rec.value = transverse_T1_on_path(chart, path, r.theta, f, wt);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

// Two-stage evaluation: forward dataset first, then L.
template <int N, class Field>
Eigen::VectorXd apply_normal_two_stage(const MetricChart<N>& chart, Field&& f, const Vec<N>& z,
                                       const NormalOptions& o) {
  const auto records = forward_dataset(chart, f, z, o);
  std::size_t k = 0;
  return apply_backprojection_L(chart, z, o, [&](const BackRay<N>&) { return records[k++].value; });
}

struct NormalMatrix {
  TransformKind kind = TransformKind::T1;
  int dim = 3;
  std::vector<int> nodes;
  std::vector<double> box_lo, box_hi;
  double F = 0.0;
  int sigma = 1;
  std::string chi_kind;
  double chi_width = 0.0;
  double chi_nu = 0.0;
  int radial_order = 0;
  int angular_order = 0;
  double step = 0.0;
  long weight_warnings = 0;
  std::vector<std::size_t> zero_columns;
  Eigen::MatrixXd M;

  int block() const { return kind == TransformKind::T1 ? dim : dim * dim; }
  double asymmetry() const { return (M - M.transpose()).norm() / std::max(M.norm(), 1e-300); }
  double symmetric_min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
};

template <int N>
NormalMatrix assemble_normal_matrix(const MetricChart<N>& chart, const GridSpec<N>& grid, const NormalOptions& o,
                                    std::size_t unknown_cap = 8000) {
  if (grid.min_nodes() < 5) throw DomainError("assemble_normal_matrix: grid needs at least 5 nodes per axis");
  const int C = value_size(o.kind, N);
  const std::size_t nn = grid.count();
  const std::size_t dimM = nn * C;
  if (dimM > unknown_cap) throw DomainError("assemble_normal_matrix: unknown count exceeds cap");
  NormalMatrix out;
  out.kind = o.kind;
  out.dim = N;
  out.nodes.assign(grid.nodes.begin(), grid.nodes.end());
  out.box_lo.assign(grid.box.lo.data(), grid.box.lo.data() + N);
  out.box_hi.assign(grid.box.hi.data(), grid.box.hi.data() + N);
  out.F = o.F;
  out.sigma = o.sigma;
  out.chi_kind = o.chi.name();
  out.chi_width = o.chi.width;
  out.chi_nu = o.chi.nu;
  out.radial_order = o.radial_order;
  out.angular_order = o.angular_order;
  out.step = o.geodesic.step;
  out.M = Eigen::MatrixXd::Zero(dimM, dimM);
  std::atomic<long> warnings{0};

  parallel_for(nn, o.threads, [&](std::size_t row_node) {
    const Vec<N> z = grid.point(row_node);
    const auto rays = backprojection_rays(chart, z, o);
    const RayWeight wt = make_weight<N>(o, &warnings);
    const double xz = chart.bdf(z);
    // per-ray accumulation over touched nodes
    std::vector<int> slot(nn, -1);
    std::vector<std::size_t> touched;
    std::vector<Eigen::MatrixXd> local;
    Eigen::MatrixXd rowblock = Eigen::MatrixXd::Zero(C, dimM);
    std::size_t idx[1 << N];
    double cw[1 << N];
    for (const auto& r : rays) {
      const GeodesicPath<N> path = shoot_geodesic(chart, z, r.zeta, o.geodesic);
      touched.clear();
      Vec<N> th;
      for (std::size_t m = 0; m < path.size(); ++m) {
        if (path.weight[m] == 0.0) continue;
        const int nc = grid.corners(path.p[m], idx, cw);
        if (nc == 0) continue;
        const double pr = detail::pairing_at(path, m, r.theta, th);
        const Mat<N> P = Mat<N>::Identity() - path.v[m] * th.transpose() / pr;
        const double c = path.weight[m] * wt(chart.bdf(path.p[m]), xz);
        const Mat<N> Q = c * (path.psi[m].transpose() * P);
        for (int q = 0; q < nc; ++q) {
          int& sl = slot[idx[q]];
          if (sl < 0) {
            sl = static_cast<int>(touched.size());
            touched.push_back(idx[q]);
            if (local.size() < touched.size()) local.emplace_back();
            local[sl] = Eigen::MatrixXd::Zero(N, C);
          }
          if (o.kind == TransformKind::T1) {
            local[sl] += cw[q] * Q;
          } else {
            for (int b = 0; b < N; ++b)
              for (int e = 0; e < N; ++e) local[sl].col(b * N + e) += (cw[q] * path.v[m][e]) * Q.col(b);
          }
        }
      }
      const Mat<N> Bf = r.coef * r.factor;
      for (std::size_t t = 0; t < touched.size(); ++t) {
        const std::size_t col = touched[t] * C;
        const Eigen::MatrixXd u = Bf * local[t];  // N x C
        if (o.kind == TransformKind::T1) {
          rowblock.middleCols(col, C) += u;
        } else {
          for (int a = 0; a < N; ++a)
            for (int e = 0; e < N; ++e) rowblock.block(a * N + e, col, 1, C) += r.cov[e] * u.row(a);
        }
        slot[touched[t]] = -1;
      }
    }
    if (o.kind == TransformKind::L11) {
      Eigen::RowVectorXd tr = Eigen::RowVectorXd::Zero(dimM);
      for (int a = 0; a < N; ++a) tr += rowblock.row(a * N + a);
      for (int a = 0; a < N; ++a) rowblock.row(a * N + a) -= tr / N;
    }
    out.M.middleRows(row_node * C, C) = rowblock;
  });
  out.weight_warnings = warnings.load();
  for (std::size_t j = 0; j < dimM; ++j)
    if (out.M.col(j).cwiseAbs().maxCoeff() == 0.0) out.zero_columns.push_back(j);
  return out;
}

}  // namespace mixray
