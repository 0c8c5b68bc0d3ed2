#pragma once

#include "mixray/tensors.hpp"

#include <atomic>
#include <optional>

namespace mixray {

// p_{w,v} = I - w v^T / <w, v>; w a vector, v a covector.
template <int N>
Mat<N> oblique_projection(const Vec<N>& w, const Vec<N>& v) {
  const double pairing = v.dot(w);
  if (std::abs(pairing) < 1e-12) throw DegeneratePairingError("oblique_projection: <w, v> vanishes");
  return Mat<N>::Identity() - w * v.transpose() / pairing;
}

template <int N>
struct RaySpec {
  Vec<N> z;
  Vec<N> zeta;   // g-unit direction
  Vec<N> theta;  // reference covector
  std::optional<Vec<N>> eta0;

  void validate(const MetricChart<N>& chart) const {
    if (std::abs(theta.dot(zeta)) < 1e-8) throw DegeneratePairingError("RaySpec: <theta, zeta> vanishes");
    if (eta0) {
      if (std::abs(eta0->dot(zeta)) > 1e-10) throw DomainError("RaySpec: eta0 is not conormal");
      const double nrm = std::sqrt(eta0->dot(chart.metric(z).inverse() * *eta0));
      if (std::abs(nrm - 1.0) > 1e-10) throw DomainError("RaySpec: eta0 is not unit");
    }
  }
};

// Exponential weight exp(sigma F (1/x(gamma(t)) - 1/x(z))) evaluated as one
// exponent difference.
struct RayWeight {
  double F = 0.0;
  int sigma = 1;
  double clamp = 700.0;
  double warn_above = 50.0;
  std::atomic<long>* warnings = nullptr;

  bool active() const { return F != 0.0; }
  double operator()(double x_t, double x_z) const {
    if (F == 0.0) return 1.0;
    double e;
    if (x_t <= 1e-300)
      e = sigma * clamp;
    else
      e = sigma * F * (1.0 / x_t - 1.0 / x_z);
    if (std::abs(e) > warn_above && warnings) warnings->fetch_add(1, std::memory_order_relaxed);
    e = std::clamp(e, -clamp, clamp);
    return std::exp(e);
  }
};

struct TransformOptions {
  GeodesicOptions geodesic;
  RayWeight weight;
  bool check_trace = true;  // mixed_L11 rejects fields with a trace part
};

namespace detail {

template <int N>
double pairing_at(const GeodesicPath<N>& path, std::size_t m, const Vec<N>& theta0, Vec<N>& theta_m) {
  theta_m = path.psi[m] * theta0;
  const double pr = theta_m.dot(path.v[m]);
  if (std::abs(pr) < 1e-8) throw DegeneratePairingError("transform: degenerate pairing along the chord");
  return pr;
}

}  // namespace detail

// Integral of T^{0,t} p_{gamma', theta(t)} f(gamma(t)) over a traced path.
template <int N, class VField>
Vec<N> transverse_T1_on_path(const MetricChart<N>& chart, const GeodesicPath<N>& path, const Vec<N>& theta0,
                             VField&& f, const RayWeight& weight = {}) {
  const double xz = chart.bdf(path.p[path.origin]);
  Vec<N> acc = Vec<N>::Zero();
  Vec<N> th;
  for (std::size_t m = 0; m < path.size(); ++m) {
    if (path.weight[m] == 0.0) continue;
    const double pr = detail::pairing_at(path, m, theta0, th);
    const Vec<N> fv = f(path.p[m]);
    const Vec<N> pf = fv - path.v[m] * (th.dot(fv) / pr);
    acc += (path.weight[m] * weight(chart.bdf(path.p[m]), xz)) * (path.psi[m].transpose() * pf);
  }
  return acc;
}

template <int N, class TField>
Vec<N> mixed_L11_on_path(const MetricChart<N>& chart, const GeodesicPath<N>& path, const Vec<N>& theta0, TField&& f,
                         const RayWeight& weight = {}, bool check_trace = true) {
  const double xz = chart.bdf(path.p[path.origin]);
  Vec<N> acc = Vec<N>::Zero();
  Vec<N> th;
  for (std::size_t m = 0; m < path.size(); ++m) {
    if (path.weight[m] == 0.0) continue;
    const double pr = detail::pairing_at(path, m, theta0, th);
    const Mat<N> fm = f(path.p[m]);
    if (check_trace && std::abs(fm.trace()) > 1e-10 * std::max(1.0, fm.norm()))
      throw DomainError("mixed_L11: tensor field is not trace-free");
    const Vec<N> lf = fm * path.v[m];
    const Vec<N> pf = lf - path.v[m] * (th.dot(lf) / pr);
    acc += (path.weight[m] * weight(chart.bdf(path.p[m]), xz)) * (path.psi[m].transpose() * pf);
  }
  return acc;
}

template <int N, class VField>
Vec<N> transverse_T1(const MetricChart<N>& chart, VField&& f, const RaySpec<N>& ray, const TransformOptions& o = {}) {
  ray.validate(chart);
  const GeodesicPath<N> path = shoot_geodesic(chart, ray.z, ray.zeta, o.geodesic);
  return transverse_T1_on_path(chart, path, ray.theta, f, o.weight);
}

template <int N, class TField>
Vec<N> mixed_L11(const MetricChart<N>& chart, TField&& f, const RaySpec<N>& ray, const TransformOptions& o = {}) {
  ray.validate(chart);
  const GeodesicPath<N> path = shoot_geodesic(chart, ray.z, ray.zeta, o.geodesic);
  return mixed_L11_on_path(chart, path, ray.theta, f, o.weight, o.check_trace);
}

// Integral of f^i_j eta_i gamma'^j with eta the parallel transport of eta0.
template <int N, class TField>
double mixed_classic(const MetricChart<N>& chart, TField&& f, const GeodesicPath<N>& path, const Vec<N>& eta0) {
  const std::size_t o = path.origin;
  if (std::abs(eta0.dot(path.v[o])) > 1e-10) throw DomainError("mixed_classic: eta0 is not conormal");
  const double nrm = std::sqrt(eta0.dot(chart.metric(path.p[o]).inverse() * eta0));
  if (std::abs(nrm - 1.0) > 1e-10) throw DomainError("mixed_classic: eta0 is not unit");
  double acc = 0.0;
  for (std::size_t m = 0; m < path.size(); ++m) {
    const Vec<N> eta = path.psi[m] * eta0;
    acc += path.weight[m] * eta.dot(f(path.p[m]) * path.v[m]);
  }
  return acc;
}

}  // namespace mixray
