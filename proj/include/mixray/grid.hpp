#pragma once

#include "mixray/core.hpp"

#include <array>

namespace mixray {

template <int N>
struct Box {
  Vec<N> lo = Vec<N>::Zero();
  Vec<N> hi = Vec<N>::Ones();

  bool contains(const Vec<N>& p, double tol = 0.0) const {
    for (int a = 0; a < N; ++a)
      if (p[a] < lo[a] - tol || p[a] > hi[a] + tol) return false;
    return true;
  }
};

// Tensor-product grid of nodes over a box. Node index is row-major with
// axis 0 slowest.
template <int N>
struct GridSpec {
  std::array<int, N> nodes{};
  Box<N> box;

  GridSpec() { nodes.fill(2); }
  GridSpec(const std::array<int, N>& n, const Box<N>& b) : nodes(n), box(b) {}

  std::size_t count() const {
    std::size_t c = 1;
    for (int a = 0; a < N; ++a) c *= static_cast<std::size_t>(nodes[a]);
    return c;
  }
  double spacing(int a) const { return (box.hi[a] - box.lo[a]) / (nodes[a] - 1); }
  int min_nodes() const { return *std::min_element(nodes.begin(), nodes.end()); }

  std::size_t index(const std::array<int, N>& m) const {
    std::size_t k = 0;
    for (int a = 0; a < N; ++a) k = k * nodes[a] + m[a];
    return k;
  }
  std::array<int, N> multi(std::size_t k) const {
    std::array<int, N> m{};
    for (int a = N - 1; a >= 0; --a) {
      m[a] = static_cast<int>(k % nodes[a]);
      k /= nodes[a];
    }
    return m;
  }
  Vec<N> point(std::size_t k) const {
    const auto m = multi(k);
    Vec<N> p;
    for (int a = 0; a < N; ++a) p[a] = box.lo[a] + m[a] * spacing(a);
    return p;
  }
  bool is_boundary(std::size_t k) const {
    const auto m = multi(k);
    for (int a = 0; a < N; ++a)
      if (m[a] == 0 || m[a] == nodes[a] - 1) return true;
    return false;
  }
  bool operator==(const GridSpec& o) const {
    return nodes == o.nodes && box.lo == o.box.lo && box.hi == o.box.hi;
  }

  // Multilinear interpolation stencil. Writes up to 2^N node indices and
  // weights; returns the number written (0 outside the box).
  int corners(const Vec<N>& p, std::size_t* idx, double* w) const {
    std::array<int, N> base{};
    std::array<double, N> frac{};
    for (int a = 0; a < N; ++a) {
      const double h = spacing(a);
      const double u = (p[a] - box.lo[a]) / h;
      if (u < -1e-12 || u > nodes[a] - 1 + 1e-12) return 0;
      int i = static_cast<int>(std::floor(u));
      i = std::clamp(i, 0, nodes[a] - 2);
      base[a] = i;
      frac[a] = std::clamp(u - i, 0.0, 1.0);
    }
    int count = 0;
    for (int c = 0; c < (1 << N); ++c) {
      double wc = 1.0;
      std::array<int, N> m{};
      for (int a = 0; a < N; ++a) {
        const int bit = (c >> (N - 1 - a)) & 1;
        m[a] = base[a] + bit;
        wc *= bit ? frac[a] : 1.0 - frac[a];
      }
      if (wc == 0.0) continue;
      idx[count] = index(m);
      w[count] = wc;
      ++count;
    }
    return count;
  }
};

}  // namespace mixray
