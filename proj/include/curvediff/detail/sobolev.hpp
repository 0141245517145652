#pragma once

// Scalar-generic transcription of the discrete metric g^m. Instantiated with
// double for evaluation and with Dual<double> for exact derivatives.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "curvediff/curve.hpp"
#include "curvediff/dual.hpp"

namespace curvediff::detail {

template <class T>
struct EdgeGeometry {
  std::vector<T> length;  // |e_i|
  T total{};              // l
};

template <class T>
EdgeGeometry<T> edge_geometry(std::span<const T> coords, std::size_t d, std::size_t n) {
  using std::sqrt;
  EdgeGeometry<T> g;
  g.length.resize(n);
  g.total = T(0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    T s(0);
    for (std::size_t a = 0; a < d; ++a) {
      const T diff = coords[j * d + a] - coords[i * d + a];
      s += diff * diff;
    }
    g.length[i] = sqrt(s);
    g.total += g.length[i];
  }
  return g;
}

/// (|e_i| + |e_{i-1}|) / 2
template <class T>
T vertex_weight(const EdgeGeometry<T>& g, std::size_t i) {
  const std::size_t n = g.length.size();
  return (g.length[i] + g.length[(i + n - 1) % n]) / T(2);
}

template <class T>
T mu_weight(const EdgeGeometry<T>& g, std::size_t i, int m, MuRule rule) {
  bool odd = (m % 2) == 1;
  if (rule == MuRule::Flipped) odd = !odd;
  return odd ? g.length[i] : vertex_weight(g, i);
}

/// Applies D_s^m in place to a field with `channels` values per vertex,
/// stored vertex-major (field[i * channels + c]).
template <class T, class F>
void apply_arc_derivative(const EdgeGeometry<T>& g, int m, std::vector<F>& field, std::size_t channels) {
  const std::size_t n = g.length.size();
  std::vector<F> next(field.size());
  for (int step = 1; step <= m; ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      if (step % 2 == 1) {
        const std::size_t ip = (i + 1) % n;
        const T inv = T(1) / g.length[i];
        for (std::size_t c = 0; c < channels; ++c)
          next[i * channels + c] = (field[ip * channels + c] - field[i * channels + c]) * inv;
      } else {
        const std::size_t im = (i + n - 1) % n;
        const T inv = T(1) / vertex_weight(g, i);
        for (std::size_t c = 0; c < channels; ++c)
          next[i * channels + c] = (field[i * channels + c] - field[im * channels + c]) * inv;
      }
    }
    field.swap(next);
  }
}

template <class T>
T metric_value(const EdgeGeometry<T>& g, int m, std::span<const double> h, std::span<const double> k,
               std::size_t d, MuRule rule) {
  const std::size_t n = g.length.size();
  std::vector<T> dh(h.begin(), h.end());
  std::vector<T> dk(k.begin(), k.end());
  apply_arc_derivative(g, m, dh, d);
  apply_arc_derivative(g, m, dk, d);

  T low(0), high(0);
  for (std::size_t i = 0; i < n; ++i) {
    T hk(0), dhdk(0);
    for (std::size_t a = 0; a < d; ++a) {
      hk += T(h[i * d + a] * k[i * d + a]);
      dhdk += dh[i * d + a] * dk[i * d + a];
    }
    low += hk * vertex_weight(g, i);
    high += dhdk * mu_weight(g, i, m, rule);
  }
  return low / ipow(g.total, 3) + high / ipow(g.total, 3 - 2 * m);
}

/// Scalar block A (row-major n×n): A_jk = g^m(b_j, b_k) for scalar basis
/// fields b_j. Uses the finite stencil of D_s^m to skip structural zeros.
template <class T>
std::vector<T> metric_block(const EdgeGeometry<T>& g, int m, MuRule rule) {
  const std::size_t n = g.length.size();
  // Column j of the n×n field is D_s^m applied to the j-th basis field.
  std::vector<T> field(n * n, T(0));
  for (std::size_t j = 0; j < n; ++j) field[j * n + j] = T(1);
  apply_arc_derivative(g, m, field, n);

  const T low_scale = T(1) / ipow(g.total, 3);
  const T high_scale = T(1) / ipow(g.total, 3 - 2 * m);

  std::vector<T> a(n * n, T(0));
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = vertex_weight(g, i) * low_scale;

  std::vector<std::size_t> support;
  support.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    support.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (!structurally_zero(field[i * n + j])) support.push_back(j);
    const T w = mu_weight(g, i, m, rule) * high_scale;
    // Upper pairs only, mirrored, so A is exactly symmetric.
    for (std::size_t s = 0; s < support.size(); ++s) {
      const std::size_t p = support[s];
      const T fp = field[i * n + p] * w;
      for (std::size_t t = s; t < support.size(); ++t) {
        const std::size_t q = support[t];
        const T v = fp * field[i * n + q];
        a[p * n + q] += v;
        if (q != p) a[q * n + p] += v;
      }
    }
  }
  return a;
}

}  // namespace curvediff::detail
