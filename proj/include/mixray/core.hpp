#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace mixray {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy. Every module throws one of these.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};
class NumericError : public Error {
 public:
  using Error::Error;
};
class TrappedRayError : public Error {
 public:
  using Error::Error;
};
class DegeneratePairingError : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;
template <int N>
using Mat = Eigen::Matrix<double, N, N>;

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using CMatX = Eigen::MatrixXcd;
using CVecX = Eigen::VectorXcd;

struct Quadrature1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [a, b].
inline Quadrature1D gauss_legendre(int order, double a = -1.0, double b = 1.0) {
  if (order < 1) throw DomainError("gauss_legendre: order must be >= 1");
  Quadrature1D q;
  q.nodes.resize(order);
  q.weights.resize(order);
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    q.nodes[i] = -z;
    q.nodes[order - 1 - i] = z;
    q.weights[i] = w;
    q.weights[order - 1 - i] = w;
  }
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < order; ++i) {
    q.nodes[i] = mid + half * q.nodes[i];
    q.weights[i] *= half;
  }
  return q;
}

// Gauss rule for the weight w(s) on [a, b]: recurrence coefficients by the
// discretized Stieltjes procedure on a fine Gauss-Legendre grid, nodes and
// weights from the Jacobi matrix.
template <class Weight>
Quadrature1D gauss_weighted(int order, double a, double b, Weight&& w, int fine = 0) {
  if (order < 1) throw DomainError("gauss_weighted: order must be >= 1");
  if (fine <= 0) fine = std::max(400, 40 * order);
  const Quadrature1D g = gauss_legendre(fine, a, b);
  VecX x = Eigen::Map<const VecX>(g.nodes.data(), fine);
  VecX c(fine);
  for (int i = 0; i < fine; ++i) c[i] = g.weights[i] * w(g.nodes[i]);
  const double mass = c.sum();
  if (!(mass > 0)) throw DomainError("gauss_weighted: weight has no mass");
  VecX alpha(order), beta = VecX::Zero(order);
  VecX p_prev = VecX::Zero(fine), p = VecX::Ones(fine) / std::sqrt(mass);
  for (int k = 0; k < order; ++k) {
    alpha[k] = (c.array() * x.array() * p.array().square()).sum();
    VecX q = (x.array() - alpha[k]) * p.array() - (k > 0 ? beta[k] : 0.0) * p_prev.array();
    if (k + 1 < order) {
      beta[k + 1] = std::sqrt((c.array() * q.array().square()).sum());
      p_prev = p;
      p = q / beta[k + 1];
    }
  }
  MatX J = MatX::Zero(order, order);
  J.diagonal() = alpha;
  for (int k = 1; k < order; ++k) J(k, k - 1) = J(k - 1, k) = beta[k];
  Eigen::SelfAdjointEigenSolver<MatX> es(J);
  Quadrature1D q;
  for (int k = 0; k < order; ++k) {
    q.nodes.push_back(es.eigenvalues()[k]);
    q.weights.push_back(mass * es.eigenvectors()(0, k) * es.eigenvectors()(0, k));
  }
  return q;
}

struct SphereQuadrature {
  std::vector<VecX> points;  // unit vectors in R^{m+1}
  std::vector<double> weights;
};

// Quadrature on the unit sphere S^m in R^{m+1}. Uniform angles for m = 1,
// otherwise a product rule in hyperspherical coordinates.
inline SphereQuadrature sphere_quadrature(int m, int order) {
  if (m < 0) throw DomainError("sphere_quadrature: negative dimension");
  SphereQuadrature q;
  if (m == 0) {
    VecX a(1), b(1);
    a << 1.0;
    b << -1.0;
    q.points = {a, b};
    q.weights = {1.0, 1.0};
    return q;
  }
  if (m == 1) {
    for (int k = 0; k < order; ++k) {
      const double th = 2.0 * kPi * k / order;
      VecX p(2);
      p << std::cos(th), std::sin(th);
      q.points.push_back(p);
      q.weights.push_back(2.0 * kPi / order);
    }
    return q;
  }
  const SphereQuadrature sub = sphere_quadrature(m - 1, order);
  const Quadrature1D gl = gauss_legendre(std::max(order / 2, 2), 0.0, kPi);
  for (std::size_t a = 0; a < gl.nodes.size(); ++a) {
    const double th = gl.nodes[a];
    const double jac = std::pow(std::sin(th), m - 1);
    for (std::size_t b = 0; b < sub.points.size(); ++b) {
      VecX p(m + 1);
      p(0) = std::cos(th);
      p.tail(m) = std::sin(th) * sub.points[b];
      q.points.push_back(p);
      q.weights.push_back(gl.weights[a] * jac * sub.weights[b]);
    }
  }
  return q;
}

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
// processed by exactly one worker, so results written per index are
// independent of the thread count.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t nt = std::max<std::size_t>(1, std::min<std::size_t>(threads > 0 ? threads : 1, count));
  if (nt <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nt);
  for (std::size_t w = 0; w < nt; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += nt) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mixray
