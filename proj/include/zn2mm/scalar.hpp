#pragma once

#include <gmpxx.h>

#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <string>
#include <type_traits>

namespace zn2mm {

using Rational = mpq_class;
using Complex = std::complex<double>;

inline Rational make_rational(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

// Numeric-mode dispatch. Exact scalars (rationals, polynomials) never compare
// against tolerances; floating scalars pivot on magnitude.
template <typename T>
struct scalar_traits;

template <>
struct scalar_traits<long> {
  static constexpr bool is_exact = true;
  static constexpr bool is_field = false;
  static long from_int(long v) { return v; }
  static double magnitude(long v) { return std::abs(static_cast<double>(v)); }
  static bool is_zero(long v) { return v == 0; }
};

template <>
struct scalar_traits<double> {
  static constexpr bool is_exact = false;
  static constexpr bool is_field = true;
  static double from_int(long v) { return static_cast<double>(v); }
  static double magnitude(double v) { return std::abs(v); }
  static bool is_zero(double v) { return v == 0.0; }
};

template <>
struct scalar_traits<Complex> {
  static constexpr bool is_exact = false;
  static constexpr bool is_field = true;
  static Complex from_int(long v) { return Complex(static_cast<double>(v), 0.0); }
  static double magnitude(const Complex& v) { return std::abs(v); }
  static bool is_zero(const Complex& v) { return v == Complex(0.0, 0.0); }
};

template <>
struct scalar_traits<Rational> {
  static constexpr bool is_exact = true;
  static constexpr bool is_field = true;
  static Rational from_int(long v) { return Rational(v); }
  static double magnitude(const Rational& v) { return std::abs(v.get_d()); }
  static bool is_zero(const Rational& v) { return sgn(v) == 0; }
};

template <typename T>
T zero() {
  return scalar_traits<T>::from_int(0);
}

template <typename T>
T one() {
  return scalar_traits<T>::from_int(1);
}

template <typename T>
T from_int(long v) {
  return scalar_traits<T>::from_int(v);
}

template <typename T>
bool is_zero(const T& v) {
  return scalar_traits<T>::is_zero(v);
}

/// Division by a nonzero integer; the only division the symmetric-function
/// recurrences need, so ring-valued scalars (polynomials) can implement it.
template <typename T>
T div_int(const T& v, long k) {
  if constexpr (std::is_same_v<T, Rational>) {
    Rational r = v / Rational(k);
    r.canonicalize();
    return r;
  } else if constexpr (scalar_traits<T>::is_field) {
    return v / from_int<T>(k);
  } else {
    return v.div_int(k);
  }
}

template <typename T>
T sign_power(long exponent) {
  return (exponent % 2 == 0) ? one<T>() : from_int<T>(-1);
}

template <typename T>
T int_power(const T& base, int e) {
  T r = one<T>();
  T b = base;
  unsigned u = static_cast<unsigned>(e < 0 ? -e : e);
  while (u) {
    if (u & 1u) r = r * b;
    u >>= 1u;
    if (u) b = b * b;
  }
  if (e < 0) {
    if constexpr (scalar_traits<T>::is_field) {
      return one<T>() / r;
    } else {
      return r.inverse_monomial();
    }
  }
  return r;
}

inline Complex to_complex(double v) { return Complex(v, 0.0); }
inline Complex to_complex(const Complex& v) { return v; }
inline Complex to_complex(const Rational& v) { return Complex(v.get_d(), 0.0); }

template <typename T>
T from_complex(const Complex& c);

template <>
inline Complex from_complex<Complex>(const Complex& c) {
  return c;
}

template <>
inline double from_complex<double>(const Complex& c) {
  return c.real();
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace zn2mm
