#pragma once

#include "mixray/grid.hpp"

#include <limits>
#include <string>

namespace mixray {

enum class MetricKind { EuclideanCartesian, EuclideanBallShell, Conformal, GridSampled };

inline std::string to_string(MetricKind k) {
  switch (k) {
    case MetricKind::EuclideanCartesian: return "euclidean-cartesian";
    case MetricKind::EuclideanBallShell: return "euclidean-ball-shell";
    case MetricKind::Conformal: return "conformal";
    case MetricKind::GridSampled: return "grid-sampled";
  }
  return "unknown";
}

// Single coordinate chart. Coordinate 0 is the boundary defining function x;
// the remaining coordinates are the tangential y.
template <int N>
class MetricChart {
  static_assert(N >= 3, "dimension must be at least 3");

 public:
  MetricKind kind = MetricKind::EuclideanCartesian;
  Box<N> box;

  // euclidean-ball-shell: P = rho(x) u(y), rho = R - x (or R + x when concave),
  // u the stereographic parametrization of the unit sphere scaled so that the
  // round metric is |dy|^2 at y = 0.
  double radius = 1.0;
  bool concave = false;

  // conformal: g = exp(2 phi) delta, phi = phi0 + a.p + sum_i b_i p_i^2.
  double phi0 = 0.0;
  Vec<N> phi_lin = Vec<N>::Zero();
  Vec<N> phi_quad = Vec<N>::Zero();

  // grid-sampled: symmetric components (upper triangle, row-major) per node.
  GridSpec<N> metric_grid;
  std::vector<double> metric_values;
  double fd_step = 1e-5;

  static MetricChart euclidean(const Box<N>& b) {
    MetricChart c;
    c.kind = MetricKind::EuclideanCartesian;
    c.box = b;
    return c;
  }
  static MetricChart ball_shell(double R, double depth, double y_half_width, bool concave_side = false) {
    if (R <= 0 || depth <= 0 || y_half_width <= 0) throw DomainError("ball_shell: parameters must be positive");
    if (!concave_side && depth >= R) throw DomainError("ball_shell: depth must be below the radius");
    MetricChart c;
    c.kind = MetricKind::EuclideanBallShell;
    c.radius = R;
    c.concave = concave_side;
    c.box.lo = Vec<N>::Constant(-y_half_width);
    c.box.hi = Vec<N>::Constant(y_half_width);
    c.box.lo[0] = 0.0;
    c.box.hi[0] = depth;
    return c;
  }
  static MetricChart conformal(const Box<N>& b, double p0, const Vec<N>& lin, const Vec<N>& quad) {
    MetricChart c;
    c.kind = MetricKind::Conformal;
    c.box = b;
    c.phi0 = p0;
    c.phi_lin = lin;
    c.phi_quad = quad;
    return c;
  }
  static MetricChart grid_sampled(const GridSpec<N>& grid, std::vector<double> values) {
    constexpr int ncomp = N * (N + 1) / 2;
    if (values.size() != grid.count() * ncomp) throw DomainError("grid_sampled: component count mismatch");
    MetricChart c;
    c.kind = MetricKind::GridSampled;
    c.box = grid.box;
    c.metric_grid = grid;
    c.metric_values = std::move(values);
    for (std::size_t k = 0; k < c.metric_grid.count(); ++k) {
      Mat<N> g = c.node_metric(k);
      Eigen::SelfAdjointEigenSolver<Mat<N>> es(g);
      if (es.eigenvalues().minCoeff() <= 0) throw DomainError("grid_sampled: metric not positive definite at node");
    }
    return c;
  }

  bool has_analytic_derivatives() const { return kind != MetricKind::GridSampled; }

  double bdf(const Vec<N>& p) const { return p[0]; }

  Mat<N> metric(const Vec<N>& p) const {
    switch (kind) {
      case MetricKind::EuclideanCartesian: return Mat<N>::Identity();
      case MetricKind::EuclideanBallShell: {
        Mat<N> g = Mat<N>::Zero();
        g(0, 0) = 1.0;
        const double rho = shell_rho(p[0]);
        const double c = stereo_c(p);
        for (int i = 1; i < N; ++i) g(i, i) = rho * rho * c * c;
        return g;
      }
      case MetricKind::Conformal: return std::exp(2.0 * phi(p)) * Mat<N>::Identity();
      case MetricKind::GridSampled: return sampled_metric(p);
    }
    return Mat<N>::Identity();
  }

  // g and its partial derivatives dg[k] = d_k g.
  void metric_and_derivatives(const Vec<N>& p, Mat<N>& g, std::array<Mat<N>, N>& dg) const {
    g = metric(p);
    switch (kind) {
      case MetricKind::EuclideanCartesian:
        for (auto& d : dg) d.setZero();
        return;
      case MetricKind::EuclideanBallShell: {
        const double rho = shell_rho(p[0]);
        const double drho = concave ? 1.0 : -1.0;
        const double c = stereo_c(p);
        for (auto& d : dg) d.setZero();
        for (int i = 1; i < N; ++i) dg[0](i, i) = 2.0 * rho * drho * c * c;
        for (int k = 1; k < N; ++k) {
          const double dc = -0.5 * c * c * p[k];
          for (int i = 1; i < N; ++i) dg[k](i, i) = rho * rho * 2.0 * c * dc;
        }
        return;
      }
      case MetricKind::Conformal: {
        const double e = std::exp(2.0 * phi(p));
        for (int k = 0; k < N; ++k) {
          const double dphi = phi_lin[k] + 2.0 * phi_quad[k] * p[k];
          dg[k] = 2.0 * dphi * e * Mat<N>::Identity();
        }
        return;
      }
      case MetricKind::GridSampled:
        for (int k = 0; k < N; ++k) {
          Vec<N> a = p, b = p;
          a[k] += fd_step;
          b[k] -= fd_step;
          dg[k] = (sampled_metric(a) - sampled_metric(b)) / (2.0 * fd_step);
        }
        return;
    }
  }

  // Chart point -> Cartesian point (ball-shell only).
  Vec<N> embed(const Vec<N>& p) const {
    require_ball();
    const double c = stereo_c(p);
    const double q = 0.25 * p.tail(N - 1).squaredNorm();
    Vec<N> u;
    for (int i = 0; i < N - 1; ++i) u[i] = p[i + 1] * c;
    u[N - 1] = (1.0 - q) * c;
    return shell_rho(p[0]) * u;
  }
  // Differential of embed.
  Mat<N> embed_jacobian(const Vec<N>& p) const {
    require_ball();
    const double c = stereo_c(p);
    const double q = 0.25 * p.tail(N - 1).squaredNorm();
    const double rho = shell_rho(p[0]);
    const double drho = concave ? 1.0 : -1.0;
    Vec<N> u;
    for (int i = 0; i < N - 1; ++i) u[i] = p[i + 1] * c;
    u[N - 1] = (1.0 - q) * c;
    Mat<N> J;
    J.col(0) = drho * u;
    for (int k = 1; k < N; ++k) {
      Vec<N> du;
      for (int i = 0; i < N - 1; ++i) du[i] = (i + 1 == k ? c : 0.0) - 0.5 * c * c * p[i + 1] * p[k];
      du[N - 1] = -p[k] * c * c;
      J.col(k) = rho * du;
    }
    return J;
  }
  // Cartesian point -> chart point (ball-shell only).
  Vec<N> chart_from_cartesian(const Vec<N>& P) const {
    require_ball();
    const double r = P.norm();
    const Vec<N> u = P / r;
    Vec<N> p;
    p[0] = concave ? r - radius : radius - r;
    for (int i = 0; i < N - 1; ++i) p[i + 1] = 2.0 * u[i] / (1.0 + u[N - 1]);
    return p;
  }

 private:
  double shell_rho(double x) const { return concave ? radius + x : radius - x; }
  static double stereo_c(const Vec<N>& p) { return 1.0 / (1.0 + 0.25 * p.tail(N - 1).squaredNorm()); }
  double phi(const Vec<N>& p) const {
    return phi0 + phi_lin.dot(p) + (phi_quad.array() * p.array().square()).sum();
  }
  void require_ball() const {
    if (kind != MetricKind::EuclideanBallShell) throw DomainError("chart has no Cartesian embedding");
  }
  Mat<N> node_metric(std::size_t k) const {
    constexpr int ncomp = N * (N + 1) / 2;
    Mat<N> g;
    int c = 0;
    for (int i = 0; i < N; ++i)
      for (int j = i; j < N; ++j) {
        g(i, j) = g(j, i) = metric_values[k * ncomp + c];
        ++c;
      }
    return g;
  }
  Mat<N> sampled_metric(const Vec<N>& p) const {
    Vec<N> q = p;
    for (int a = 0; a < N; ++a) q[a] = std::clamp(q[a], metric_grid.box.lo[a], metric_grid.box.hi[a]);
    std::size_t idx[1 << N];
    double w[1 << N];
    const int m = metric_grid.corners(q, idx, w);
    Mat<N> g = Mat<N>::Zero();
    for (int c = 0; c < m; ++c) g += w[c] * node_metric(idx[c]);
    return g;
  }
};

template <int N>
using Christoffel = std::array<Mat<N>, N>;  // G[k](i, j) = Gamma^k_{ij}

namespace detail {

template <int N>
Christoffel<N> christoffel_unchecked(const MetricChart<N>& chart, const Vec<N>& p) {
  Mat<N> g;
  std::array<Mat<N>, N> dg;
  chart.metric_and_derivatives(p, g, dg);
  const Mat<N> gi = g.inverse();
  // lowered symbols L[l](i, j) = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
  std::array<Mat<N>, N> low;
  for (int l = 0; l < N; ++l)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) low[l](i, j) = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
  Christoffel<N> G;
  for (int k = 0; k < N; ++k) {
    G[k].setZero();
    for (int l = 0; l < N; ++l) G[k] += gi(k, l) * low[l];
  }
  return G;
}

}  // namespace detail

template <int N>
Christoffel<N> christoffel_symbols(const MetricChart<N>& chart, const Vec<N>& p) {
  if (!chart.box.contains(p, 1e-12)) throw DomainError("christoffel_symbols: point outside chart box");
  const Mat<N> g = chart.metric(p);
  if (!g.allFinite() || std::abs(g.determinant()) < 1e-300) throw NumericError("christoffel_symbols: singular metric");
  return detail::christoffel_unchecked(chart, p);
}

struct StopRule {
  bool at_x_zero = true;
  bool at_box = true;
  double max_arc = std::numeric_limits<double>::infinity();
};

struct GeodesicOptions {
  double step = 1e-3;
  StopRule stop;
  int max_steps = 10000;
  double unit_tolerance = 1e-10;
};

// Sampled geodesic through z = gamma(0) with its transport frame. psi[m]
// carries covectors from gamma(0) to gamma(t_m); its transpose carries
// vectors from gamma(t_m) back to gamma(0).
template <int N>
struct GeodesicPath {
  std::vector<double> t;
  std::vector<Vec<N>> p;
  std::vector<Vec<N>> v;
  std::vector<Mat<N>> psi;
  std::vector<double> weight;  // composite Simpson weights on the sample grid
  std::string stop_minus;
  std::string stop_plus;
  std::size_t origin = 0;  // sample index of t = 0

  std::size_t size() const { return t.size(); }
  double length() const { return t.empty() ? 0.0 : t.back() - t.front(); }
  Mat<N> vector_to_origin(std::size_t m) const { return psi[m].transpose(); }
  Mat<N> vector_from_origin(std::size_t m) const { return psi[m].transpose().inverse(); }
  Vec<N> covector_at(std::size_t m, const Vec<N>& eta0) const { return psi[m] * eta0; }
};

namespace detail {

template <int N>
struct GeoState {
  Vec<N> p;
  Vec<N> v;
  Mat<N> psi;
};

template <int N>
GeoState<N> geo_rhs(const MetricChart<N>& chart, const GeoState<N>& s) {
  const Christoffel<N> G = christoffel_unchecked(chart, s.p);
  GeoState<N> d;
  d.p = s.v;
  Mat<N> A = Mat<N>::Zero();
  for (int k = 0; k < N; ++k) {
    d.v[k] = -s.v.dot(G[k] * s.v);
    // A(k, i) = Gamma^i_{jk} v^j
    A.col(k) = Vec<N>::Zero();
  }
  for (int i = 0; i < N; ++i) A.col(i) = G[i] * s.v;
  d.psi = A * s.psi;
  return d;
}

template <int N>
GeoState<N> rk4(const MetricChart<N>& chart, const GeoState<N>& s, double h) {
  auto axpy = [](const GeoState<N>& a, const GeoState<N>& d, double c) {
    return GeoState<N>{a.p + c * d.p, a.v + c * d.v, a.psi + c * d.psi};
  };
  const GeoState<N> k1 = geo_rhs(chart, s);
  const GeoState<N> k2 = geo_rhs(chart, axpy(s, k1, 0.5 * h));
  const GeoState<N> k3 = geo_rhs(chart, axpy(s, k2, 0.5 * h));
  const GeoState<N> k4 = geo_rhs(chart, axpy(s, k3, h));
  GeoState<N> r;
  r.p = s.p + (h / 6.0) * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
  r.v = s.v + (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
  r.psi = s.psi + (h / 6.0) * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi);
  return r;
}

template <int N>
const char* stop_reason(const MetricChart<N>& chart, const StopRule& stop, const Vec<N>& p) {
  if (stop.at_x_zero && chart.bdf(p) < 0.0) return "x=0";
  if (stop.at_box && !chart.box.contains(p)) return "box";
  return nullptr;
}

// One time direction: exit time by fixed steps plus bisection, then a uniform
// even-count resampling ending exactly at the exit.
template <int N>
std::vector<GeoState<N>> shoot_side(const MetricChart<N>& chart, const GeoState<N>& s0, const GeodesicOptions& o,
                                    double& T, double& h_used, std::string& reason) {
  GeoState<N> s = s0;
  double t = 0.0;
  reason = "none";
  bool done = false;
  for (int k = 0; k < o.max_steps; ++k) {
    double h = o.step;
    bool last = false;
    if (t + h >= o.stop.max_arc) {
      h = o.stop.max_arc - t;
      last = true;
    }
    const GeoState<N> s1 = rk4(chart, s, h);
    if (!s1.p.allFinite()) throw NumericError("shoot_geodesic: non-finite state");
    if (stop_reason(chart, o.stop, s1.p)) {
      double lo = 0.0, hi = h;
      const char* why = stop_reason(chart, o.stop, s1.p);
      for (int it = 0; it < 80 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        const char* r = stop_reason(chart, o.stop, rk4(chart, s, mid).p);
        if (r) {
          hi = mid;
          why = r;
        } else {
          lo = mid;
        }
      }
      T = t + lo;
      reason = why;
      done = true;
      break;
    }
    t += h;
    s = s1;
    if (last) {
      T = t;
      reason = "arc";
      done = true;
      break;
    }
  }
  if (!done) throw TrappedRayError("shoot_geodesic: step budget exhausted");
  std::vector<GeoState<N>> out;
  if (T < 1e-13) {
    h_used = 0.0;
    return out;
  }
  int ns = 2 * static_cast<int>(std::ceil(T / (2.0 * o.step) - 1e-9));
  ns = std::max(ns, 2);
  h_used = T / ns;
  GeoState<N> q = s0;
  out.reserve(ns);
  for (int k = 0; k < ns; ++k) {
    q = rk4(chart, q, h_used);
    out.push_back(q);
  }
  return out;
}

}  // namespace detail

template <int N>
GeodesicPath<N> shoot_geodesic(const MetricChart<N>& chart, const Vec<N>& z, const Vec<N>& zeta,
                               const GeodesicOptions& opts = {}) {
  if (!z.allFinite() || !zeta.allFinite()) throw DomainError("shoot_geodesic: non-finite input");
  if (!chart.box.contains(z, 1e-12) || chart.bdf(z) < -1e-12)
    throw DomainError("shoot_geodesic: base point outside working region");
  const double speed = std::sqrt(zeta.dot(chart.metric(z) * zeta));
  if (std::abs(speed - 1.0) > opts.unit_tolerance) throw DomainError("shoot_geodesic: direction is not g-unit");
  if (opts.step <= 0) throw DomainError("shoot_geodesic: step must be positive");

  const detail::GeoState<N> start{z, zeta, Mat<N>::Identity()};
  const detail::GeoState<N> back{z, -zeta, Mat<N>::Identity()};
  double Tp = 0, Tm = 0, hp = 0, hm = 0;
  GeodesicPath<N> path;
  const auto plus = detail::shoot_side(chart, start, opts, Tp, hp, path.stop_plus);
  const auto minus = detail::shoot_side(chart, back, opts, Tm, hm, path.stop_minus);

  const std::size_t total = plus.size() + minus.size() + 1;
  path.t.reserve(total);
  for (std::size_t k = minus.size(); k-- > 0;) {
    path.t.push_back(-static_cast<double>(k + 1) * hm);
    path.p.push_back(minus[k].p);
    path.v.push_back(-minus[k].v);
    path.psi.push_back(minus[k].psi);
  }
  path.origin = path.t.size();
  path.t.push_back(0.0);
  path.p.push_back(z);
  path.v.push_back(zeta);
  path.psi.push_back(Mat<N>::Identity());
  for (std::size_t k = 0; k < plus.size(); ++k) {
    path.t.push_back(static_cast<double>(k + 1) * hp);
    path.p.push_back(plus[k].p);
    path.v.push_back(plus[k].v);
    path.psi.push_back(plus[k].psi);
  }
  // endpoint times exact
  if (!minus.empty()) path.t.front() = -Tm;
  if (!plus.empty()) path.t.back() = Tp;

  path.weight.assign(path.t.size(), 0.0);
  auto simpson = [&](std::size_t first, std::size_t count, double h) {
    // count intervals starting at sample `first`
    for (std::size_t k = 0; k <= count; ++k) {
      double c = (k == 0 || k == count) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      path.weight[first + k] += c * h / 3.0;
    }
  };
  if (!minus.empty()) simpson(0, minus.size(), hm);
  if (!plus.empty()) simpson(path.origin, plus.size(), hp);
  return path;
}

// Applies the path's transport frame to a vector or covector given at gamma(0).
template <int N>
std::vector<Vec<N>> parallel_transport(const GeodesicPath<N>& path, const Eigen::VectorXd& w0, bool covector) {
  if (w0.size() != N) throw DomainError("parallel_transport: dimension mismatch");
  if (!w0.allFinite()) throw NumericError("parallel_transport: non-finite input");
  const Vec<N> w = w0;
  std::vector<Vec<N>> out(path.size());
  for (std::size_t m = 0; m < path.size(); ++m) {
    out[m] = covector ? Vec<N>(path.psi[m] * w) : Vec<N>(path.psi[m].transpose().partialPivLu().solve(w));
    if (!out[m].allFinite()) throw NumericError("parallel_transport: non-finite result");
  }
  return out;
}

template <int N>
struct ConvexityReport {
  Eigen::MatrixXd half_H;        // 1/2 H on the y block
  double euclid_min = 0, euclid_max = 0;  // eigenvalue range of 1/2 H
  double metric_min = 0, metric_max = 0;  // eigenvalues of 1/2 H relative to k
  bool isotropic = false;
  double alpha = std::numeric_limits<double>::quiet_NaN();  // set when isotropic
};

// alpha(y) = 1/2 H at x = 0 with H_ij = -1/2 g^{xx} d_x k_ij.
template <int N>
ConvexityReport<N> boundary_convexity_alpha(const MetricChart<N>& chart, const Vec<N - 1>& y) {
  Vec<N> p;
  p[0] = 0.0;
  p.tail(N - 1) = y;
  if (!chart.box.contains(p, 1e-12)) throw DomainError("boundary_convexity_alpha: point outside chart box");
  Mat<N> g;
  std::array<Mat<N>, N> dg;
  chart.metric_and_derivatives(p, g, dg);
  const double off = g.row(0).tail(N - 1).norm();
  if (off > 1e-10) throw DomainError("boundary_convexity_alpha: chart not in normal form");
  const double gxx = g.inverse()(0, 0);
  const Eigen::MatrixXd k = g.bottomRightCorner(N - 1, N - 1);
  const Eigen::MatrixXd H = -0.5 * gxx * dg[0].bottomRightCorner(N - 1, N - 1);
  ConvexityReport<N> r;
  r.half_H = 0.5 * H;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.half_H);
  r.euclid_min = es.eigenvalues().minCoeff();
  r.euclid_max = es.eigenvalues().maxCoeff();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> gs(r.half_H, k);
  r.metric_min = gs.eigenvalues().minCoeff();
  r.metric_max = gs.eigenvalues().maxCoeff();
  r.isotropic = (r.euclid_max - r.euclid_min) <= 1e-10 * std::max(1.0, std::abs(r.euclid_max));
  if (r.isotropic) r.alpha = 0.5 * (r.euclid_min + r.euclid_max);
  return r;
}

// Orientation of the conjugation weight exp(sigma F / x): +1 when near-tangent
// geodesics curve toward larger x, -1 when they curve toward x = 0.
template <int N>
int conjugation_sign(const MetricChart<N>& chart) {
  Vec<N - 1> y = 0.5 * (chart.box.lo.tail(N - 1) + chart.box.hi.tail(N - 1));
  const auto r = boundary_convexity_alpha(chart, y);
  return r.metric_max > 0.0 ? -1 : 1;
}

}  // namespace mixray
