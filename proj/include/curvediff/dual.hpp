#pragma once

#include <cmath>
#include <type_traits>

namespace curvediff {

/// First-order forward-mode dual number: value + eps·derivative.
template <class T>
struct Dual {
  T val{};
  T eps{};

  constexpr Dual() = default;
  constexpr Dual(T v) : val(v) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(T v, T e) : val(v), eps(e) {}

  static constexpr Dual variable(T v) { return {v, T(1)}; }

  constexpr Dual& operator+=(const Dual& o) { val += o.val; eps += o.eps; return *this; }
  constexpr Dual& operator-=(const Dual& o) { val -= o.val; eps -= o.eps; return *this; }
  constexpr Dual& operator*=(const Dual& o) { eps = eps * o.val + val * o.eps; val *= o.val; return *this; }
  constexpr Dual& operator/=(const Dual& o) {
    eps = (eps * o.val - val * o.eps) / (o.val * o.val);
    val /= o.val;
    return *this;
  }

  friend constexpr Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend constexpr Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend constexpr Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend constexpr Dual operator/(Dual a, const Dual& b) { return a /= b; }
  friend constexpr Dual operator-(const Dual& a) { return {-a.val, -a.eps}; }

  friend constexpr bool operator<(const Dual& a, const Dual& b) { return a.val < b.val; }
  friend constexpr bool operator>(const Dual& a, const Dual& b) { return a.val > b.val; }
  friend constexpr bool operator==(const Dual& a, const Dual& b) { return a.val == b.val && a.eps == b.eps; }
};

template <class T>
Dual<T> sqrt(const Dual<T>& x) {
  using std::sqrt;
  const T s = sqrt(x.val);
  return {s, x.eps / (T(2) * s)};
}

template <class T>
Dual<T> log(const Dual<T>& x) {
  using std::log;
  return {log(x.val), x.eps / x.val};
}

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

template <class T>
constexpr auto value_of(const T& x) {
  if constexpr (is_dual<T>::value) return value_of(x.val);
  else return x;
}

/// True when x is exactly zero including all derivative parts.
template <class T>
constexpr bool structurally_zero(const T& x) {
  if constexpr (is_dual<T>::value) return structurally_zero(x.val) && structurally_zero(x.eps);
  else return x == T(0);
}

/// x^k for integer k (negative allowed).
template <class T>
T ipow(const T& x, int k) {
  T r(1);
  const bool inv = k < 0;
  unsigned e = inv ? static_cast<unsigned>(-k) : static_cast<unsigned>(k);
  T b = x;
  while (e) {
    if (e & 1u) r = r * b;
    b = b * b;
    e >>= 1u;
  }
  return inv ? T(1) / r : r;
}

}  // namespace curvediff
