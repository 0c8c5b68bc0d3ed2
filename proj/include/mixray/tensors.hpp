#pragma once

#include "mixray/geometry.hpp"

#include <Eigen/Sparse>

namespace mixray {

// ---- pointwise (1,1) algebra ------------------------------------------------

struct TraceSplit {
  Eigen::MatrixXd trace_free;
  double trace = 0.0;
};

inline TraceSplit trace_split(const Eigen::MatrixXd& T) {
  if (T.rows() != T.cols()) throw DomainError("trace_split: matrix is not square");
  const auto n = T.rows();
  TraceSplit s;
  s.trace = T.trace();
  s.trace_free = T;
  s.trace_free.diagonal().array() -= s.trace / static_cast<double>(n);
  return s;
}

template <int N>
Mat<N> trace_free(const Mat<N>& T) {
  Mat<N> out = T;
  out.diagonal().array() -= T.trace() / N;
  return out;
}

inline Eigen::MatrixXd lambda_embed(double w, int n) { return w * Eigen::MatrixXd::Identity(n, n); }
inline double mu_trace(const Eigen::MatrixXd& T) { return T.trace(); }
// Frobenius pairing in chart components.
inline double pair11(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) { return (A.array() * B.array()).sum(); }

// ---- grid fields ------------------------------------------------------------

template <int N, int C>
struct GridField {
  GridSpec<N> grid;
  std::vector<double> data;  // C components per node, node-major

  GridField() = default;
  explicit GridField(const GridSpec<N>& g) : grid(g), data(g.count() * C, 0.0) {}

  static constexpr int components = C;
  std::size_t nodes() const { return grid.count(); }
  Eigen::Map<Eigen::VectorXd> vec() { return Eigen::Map<Eigen::VectorXd>(data.data(), data.size()); }
  Eigen::Map<const Eigen::VectorXd> vec() const {
    return Eigen::Map<const Eigen::VectorXd>(data.data(), data.size());
  }
  std::vector<bool> boundary_mask() const {
    std::vector<bool> m(grid.count());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = grid.is_boundary(k);
    return m;
  }
};

template <int N>
struct VectorField : GridField<N, N> {
  using GridField<N, N>::GridField;
  Vec<N> at(std::size_t k) const { return Eigen::Map<const Vec<N>>(this->data.data() + k * N); }
  void set(std::size_t k, const Vec<N>& v) { Eigen::Map<Vec<N>>(this->data.data() + k * N) = v; }
  // Multilinear interpolation, zero outside the grid box.
  Vec<N> operator()(const Vec<N>& p) const {
    std::size_t idx[1 << N];
    double w[1 << N];
    const int m = this->grid.corners(p, idx, w);
    Vec<N> out = Vec<N>::Zero();
    for (int c = 0; c < m; ++c) out += w[c] * at(idx[c]);
    return out;
  }
};

// Row-major per node: component (i, j) = f^i_j at offset i * N + j.
template <int N>
struct TensorField11 : GridField<N, N * N> {
  using GridField<N, N * N>::GridField;
  Mat<N> at(std::size_t k) const {
    return Eigen::Map<const Eigen::Matrix<double, N, N, Eigen::RowMajor>>(this->data.data() + k * N * N);
  }
  void set(std::size_t k, const Mat<N>& T) {
    Eigen::Map<Eigen::Matrix<double, N, N, Eigen::RowMajor>>(this->data.data() + k * N * N) = T;
  }
  Mat<N> operator()(const Vec<N>& p) const {
    std::size_t idx[1 << N];
    double w[1 << N];
    const int m = this->grid.corners(p, idx, w);
    Mat<N> out = Mat<N>::Zero();
    for (int c = 0; c < m; ++c) out += w[c] * at(idx[c]);
    return out;
  }
  double max_abs_trace() const {
    double t = 0.0;
    for (std::size_t k = 0; k < this->nodes(); ++k) t = std::max(t, std::abs(at(k).trace()));
    return t;
  }
};

template <int N, class Fn>
VectorField<N> sample_vector_field(const GridSpec<N>& grid, Fn&& fn) {
  VectorField<N> f(grid);
  for (std::size_t k = 0; k < grid.count(); ++k) f.set(k, fn(grid.point(k)));
  return f;
}

template <int N, class Fn>
TensorField11<N> sample_tensor_field(const GridSpec<N>& grid, Fn&& fn) {
  TensorField11<N> f(grid);
  for (std::size_t k = 0; k < grid.count(); ++k) f.set(k, fn(grid.point(k)));
  return f;
}

// ---- discrete d^B_F and its adjoint ----------------------------------------

enum class VolumeWeight { Scattering, Chart };

inline std::string to_string(VolumeWeight w) { return w == VolumeWeight::Scattering ? "scattering" : "chart"; }

using SpMat = Eigen::SparseMatrix<double>;

namespace detail {

// Five-point first-derivative stencil at index i of an axis with n nodes:
// central where possible, one-sided at the two nodes nearest each edge.
inline void fd_stencil(int i, int n, int& first, double c[5]) {
  static const double central[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
  static const double edge0[5] = {-25.0 / 12, 48.0 / 12, -36.0 / 12, 16.0 / 12, -3.0 / 12};
  static const double edge1[5] = {-3.0 / 12, -10.0 / 12, 18.0 / 12, -6.0 / 12, 1.0 / 12};
  const double* src;
  bool flip = false;
  if (i == 0) {
    src = edge0;
    first = 0;
  } else if (i == 1) {
    src = edge1;
    first = 0;
  } else if (i == n - 1) {
    src = edge0;
    first = n - 5;
    flip = true;
  } else if (i == n - 2) {
    src = edge1;
    first = n - 5;
    flip = true;
  } else {
    src = central;
    first = i - 2;
  }
  for (int q = 0; q < 5; ++q) c[q] = flip ? -src[4 - q] : src[q];
}

}  // namespace detail

// The discrete operator d^B_F on a grid, as a sparse matrix from stacked
// vector fields (N per node) to stacked (1,1) fields (N^2 per node), together
// with the block-diagonal inner products used for adjoints.
template <int N>
class DiscreteDB {
 public:
  GridSpec<N> grid;
  double F = 0.0;
  int sigma = 1;
  VolumeWeight weight = VolumeWeight::Scattering;
  SpMat D;   // d^B_F
  SpMat Wt;  // tensor inner product
  SpMat Wv;  // vector inner product
  SpMat Wv_inv;

  DiscreteDB(const MetricChart<N>& chart, const GridSpec<N>& g, double F_, int sigma_ = 1,
             VolumeWeight w = VolumeWeight::Scattering)
      : grid(g), F(F_), sigma(sigma_), weight(w) {
    if (grid.min_nodes() < 5) throw DomainError("covariant_dB: grid needs at least 5 nodes per axis");
    if (F < 0) throw DomainError("covariant_dB: F must be non-negative");
    for (int a = 0; a < N; ++a)
      if (grid.box.lo[a] < chart.box.lo[a] - 1e-12 || grid.box.hi[a] > chart.box.hi[a] + 1e-12)
        throw DomainError("covariant_dB: grid box exceeds chart box");
    build(chart);
  }

  std::size_t vector_size() const { return grid.count() * N; }
  std::size_t tensor_size() const { return grid.count() * N * N; }

  TensorField11<N> apply(const VectorField<N>& v) const {
    TensorField11<N> out(grid);
    out.vec() = D * v.vec();
    return out;
  }
  // Negative adjoint of d^B_F under the weighted inner products.
  VectorField<N> delta(const TensorField11<N>& T, double trace_tol = 1e-10) const {
    if (T.max_abs_trace() > trace_tol) throw DomainError("delta_B: tensor field is not trace-free");
    VectorField<N> out(grid);
    out.vec() = -(Wv_inv * (D.transpose() * (Wt * T.vec())));
    return out;
  }
  double inner_vector(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return a.dot(Wv * b); }
  double inner_tensor(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return a.dot(Wt * b); }

 private:
  void build(const MetricChart<N>& chart) {
    const std::size_t nn = grid.count();
    std::vector<Eigen::Triplet<double>> trip, wt, wv, wvi;
    trip.reserve(nn * N * N * (5 * N + N) * 2);
    std::array<double, N> h;
    for (int a = 0; a < N; ++a) h[a] = grid.spacing(a);
    std::vector<std::vector<std::pair<std::size_t, double>>> raw(N * N);
    for (std::size_t k = 0; k < nn; ++k) {
      const auto m = grid.multi(k);
      const Vec<N> p = grid.point(k);
      const double x = chart.bdf(p);
      const Christoffel<N> G = detail::christoffel_unchecked(chart, p);
      for (auto& r : raw) r.clear();
      for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
          auto& row = raw[i * N + j];
          int first;
          double c[5];
          detail::fd_stencil(m[j], grid.nodes[j], first, c);
          for (int q = 0; q < 5; ++q) {
            if (c[q] == 0.0) continue;
            auto mm = m;
            mm[j] = first + q;
            row.emplace_back(grid.index(mm) * N + i, c[q] / h[j]);
          }
          for (int l = 0; l < N; ++l) {
            const double gam = G[i](j, l);
            if (gam != 0.0) row.emplace_back(k * N + l, gam);
          }
          if (j == 0 && F != 0.0) {
            if (x <= 0) throw DomainError("covariant_dB: x must be positive on the grid when F > 0");
            row.emplace_back(k * N + i, -sigma * F / (x * x));
          }
        }
      }
      // trace-free projection
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
          const std::size_t r = k * N * N + i * N + j;
          for (const auto& e : raw[i * N + j]) trip.emplace_back(r, e.first, e.second);
          if (i == j)
            for (int l = 0; l < N; ++l)
              for (const auto& e : raw[l * N + l]) trip.emplace_back(r, e.first, -e.second / N);
        }
      // inner-product blocks
      double vol = 1.0;
      for (int a = 0; a < N; ++a) vol *= (m[a] == 0 || m[a] == grid.nodes[a] - 1) ? 0.5 * h[a] : h[a];
      const Mat<N> g = chart.metric(p);
      Mat<N> Gp = g;
      double dens = std::sqrt(g.determinant());
      if (weight == VolumeWeight::Scattering) {
        if (x <= 0) throw DomainError("scattering volume weight needs x > 0 on the grid");
        Vec<N> s = Vec<N>::Constant(1.0 / x);
        s[0] = 1.0 / (x * x);
        Gp = s.asDiagonal() * g * s.asDiagonal();
        dens *= std::pow(x, -(N + 1));
      }
      const Mat<N> Gi = Gp.inverse();
      const double c = vol * dens;
      const Mat<N> Wvb = c * Gp;
      const Mat<N> Wvib = Wvb.inverse();
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
          wv.emplace_back(k * N + i, k * N + j, Wvb(i, j));
          wvi.emplace_back(k * N + i, k * N + j, Wvib(i, j));
          for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
              wt.emplace_back(k * N * N + i * N + j, k * N * N + a * N + b, c * Gp(i, a) * Gi(j, b));
        }
    }
    D.resize(nn * N * N, nn * N);
    D.setFromTriplets(trip.begin(), trip.end());
    D.prune(0.0);
    Wt.resize(nn * N * N, nn * N * N);
    Wt.setFromTriplets(wt.begin(), wt.end());
    Wv.resize(nn * N, nn * N);
    Wv.setFromTriplets(wv.begin(), wv.end());
    Wv_inv.resize(nn * N, nn * N);
    Wv_inv.setFromTriplets(wvi.begin(), wvi.end());
  }
};

// Pointwise d^B_F v for a vector field given as a callable: central
// differences of step h, the Christoffel term and -sigma F x^-2 dx (x) v,
// followed by the trace-free projection.
template <int N, class VField>
Mat<N> covariant_dB_at(const MetricChart<N>& chart, VField&& v, const Vec<N>& p, double F = 0.0, int sigma = 1,
                       double h = 1e-5) {
  const Vec<N> v0 = v(p);
  Mat<N> out;
  for (int j = 0; j < N; ++j) {
    Vec<N> e = Vec<N>::Zero();
    e[j] = h;
    out.col(j) = (Vec<N>(v(Vec<N>(p + e))) - Vec<N>(v(Vec<N>(p - e)))) / (2.0 * h);
  }
  const Christoffel<N> G = detail::christoffel_unchecked(chart, p);
  for (int i = 0; i < N; ++i) out.row(i) += (G[i] * v0).transpose();
  if (F != 0.0) {
    const double x = chart.bdf(p);
    if (x <= 0) throw DomainError("covariant_dB_at: x must be positive when F > 0");
    out.col(0) -= sigma * F / (x * x) * v0;
  }
  return trace_free<N>(out);
}

template <int N>
TensorField11<N> covariant_dB(const MetricChart<N>& chart, const VectorField<N>& v, double F, int sigma = 1,
                              VolumeWeight w = VolumeWeight::Scattering) {
  return DiscreteDB<N>(chart, v.grid, F, sigma, w).apply(v);
}

template <int N>
VectorField<N> delta_B(const MetricChart<N>& chart, const TensorField11<N>& T, double F, int sigma = 1,
                       VolumeWeight w = VolumeWeight::Scattering) {
  return DiscreteDB<N>(chart, T.grid, F, sigma, w).delta(T);
}

}  // namespace mixray
