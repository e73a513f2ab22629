#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"
#include "matrix.hpp"
#include "partitions.hpp"
#include "polynomial.hpp"
#include "scalar.hpp"

namespace zn2mm {

/// Finitely supported time sequence (t_1, t_2, ...); absent entries read 0.
template <typename T>
class TimeSequence {
 public:
  TimeSequence() = default;
  explicit TimeSequence(std::vector<T> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  /// t_k for k >= 1.
  T at(int k) const {
    if (k < 1 || k > static_cast<int>(coeffs_.size())) return zero<T>();
    return coeffs_[k - 1];
  }
  void set(int k, const T& v) {
    if (k < 1) fail(ErrorCode::InvalidArgument, "time index must be >= 1");
    if (k > static_cast<int>(coeffs_.size())) coeffs_.resize(k, zero<T>());
    coeffs_[k - 1] = v;
    trim();
  }
  /// Largest k with t_k != 0 (0 for the zero sequence).
  int degree() const { return static_cast<int>(coeffs_.size()); }
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<T>& coeffs() const { return coeffs_; }

  TimeSequence operator-() const {
    TimeSequence r = *this;
    for (auto& c : r.coeffs_) c = -c;
    return r;
  }

  /// Formal sequence (t_1, ..., t_d) of the given variable family.
  static TimeSequence formal(VarFamily family, int d)
    requires std::is_same_v<T, Polynomial>
  {
    std::vector<Polynomial> c;
    for (int k = 1; k <= d; ++k) c.push_back(Polynomial::variable(family, k));
    return TimeSequence(std::move(c));
  }

 private:
  void trim() {
    while (!coeffs_.empty() && is_zero_value(coeffs_.back())) coeffs_.pop_back();
  }
  static bool is_zero_value(const T& v) { return scalar_traits<T>::is_zero(v); }

  std::vector<T> coeffs_;
};

/// s_0 .. s_max of a time sequence: coefficients of x^k in exp(sum_m t_m x^m),
/// from k s_k = sum_{j=1}^k j t_j s_{k-j}.
template <typename T>
std::vector<T> elementary_schur_table(const TimeSequence<T>& t, int max_k) {
  std::vector<T> s(std::max(0, max_k) + 1, zero<T>());
  s[0] = one<T>();
  for (int k = 1; k <= max_k; ++k) {
    T acc = zero<T>();
    for (int j = 1; j <= std::min(k, t.degree()); ++j) {
      const T tj = t.at(j);
      if (scalar_traits<T>::is_zero(tj)) continue;
      acc = acc + from_int<T>(j) * tj * s[k - j];
    }
    s[k] = div_int(acc, k);
  }
  return s;
}

template <typename T>
T elementary_schur(int k, const TimeSequence<T>& t) {
  if (k < 0) return zero<T>();
  return elementary_schur_table(t, k)[k];
}

/// Jacobi-Trudy determinant det(s_{lambda_i - i + j}(t)) given s_0..s_max.
template <typename T>
T schur_from_elementary(const Partition& lambda, std::span<const T> s) {
  const int l = lambda.length();
  Matrix<T> m(l, l);
  for (int i = 1; i <= l; ++i)
    for (int j = 1; j <= l; ++j) {
      const int k = lambda.part(i) - i + j;
      m(i - 1, j - 1) = (k < 0 || k >= static_cast<int>(s.size())) ? zero<T>() : s[k];
    }
  return determinant(m);
}

template <typename T>
T schur_in_times(const Partition& lambda, const TimeSequence<T>& t) {
  if (lambda.empty()) return one<T>();
  const auto s = elementary_schur_table(t, lambda.part(1) + lambda.length());
  return schur_from_elementary<T>(lambda, s);
}

/// Evaluates many Schur functions on one time sequence, sharing the
/// elementary table. Partitions longer than nothing are all supported.
template <typename T>
class SchurEvaluator {
 public:
  SchurEvaluator(TimeSequence<T> t, int max_index) : t_(std::move(t)), s_(elementary_schur_table(t_, max_index)) {}

  T operator()(const Partition& lambda) const {
    if (lambda.empty()) return one<T>();
    if (lambda.part(1) + lambda.length() >= static_cast<int>(s_.size()))
      return schur_in_times(lambda, t_);
    return schur_from_elementary<T>(lambda, s_);
  }
  bool vanishes_beyond_empty() const { return t_.is_zero(); }

 private:
  TimeSequence<T> t_;
  std::vector<T> s_;
};

/// ([x])_k = (1/k) sum_a x_a^k, or with x_a^{-1} when inverse is set; k = 1..d.
template <typename T>
TimeSequence<T> power_sum_times(std::span<const T> x, int d, bool inverse = false) {
  if (d < 1) fail(ErrorCode::InvalidArgument, "power-sum truncation degree must be >= 1");
  std::vector<T> base(x.begin(), x.end());
  if (inverse) {
    for (auto& v : base) {
      if (scalar_traits<T>::is_zero(v)) fail(ErrorCode::ZeroVariableForInverse, "x_a = 0 in inverse power sums");
      if constexpr (scalar_traits<T>::is_field)
        v = one<T>() / v;
      else
        v = v.inverse_monomial();
    }
  }
  std::vector<T> coeffs(d, zero<T>());
  std::vector<T> powers(base.size(), one<T>());
  for (int k = 1; k <= d; ++k) {
    T sum = zero<T>();
    for (std::size_t a = 0; a < base.size(); ++a) {
      powers[a] = powers[a] * base[a];
      sum = sum + powers[a];
    }
    coeffs[k - 1] = div_int(sum, k);
  }
  return TimeSequence<T>(std::move(coeffs));
}

/// Relative separation below which two floating variables count as repeated.
inline constexpr double kRepeatedVariableSeparation = 1e-8;

template <typename T>
T vandermonde(std::span<const T> x) {
  T d = one<T>();
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) d = d * (x[i] - x[j]);
  return d;
}

/// det(x_i^{lambda_j - j + N}) / Delta_N(x) for N = x.size().
template <typename T>
T schur_bialternant(const Partition& lambda, std::span<const T> x) {
  const int N = static_cast<int>(x.size());
  const auto h = shifted_labels(lambda, N);
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      if constexpr (scalar_traits<T>::is_exact) {
        if (x[i] == x[j]) fail(ErrorCode::RepeatedVariable, "bialternant needs distinct variables");
      } else {
        const double scale = std::max({1.0, scalar_traits<T>::magnitude(x[i]), scalar_traits<T>::magnitude(x[j])});
        if (scalar_traits<T>::magnitude(x[i] - x[j]) < kRepeatedVariableSeparation * scale)
          fail(ErrorCode::RepeatedVariable, "bialternant variables closer than the separation threshold");
      }
    }
  Matrix<T> m(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) m(i, j) = int_power(x[i], h[j]);
  const T num = determinant(m);
  const T den = vandermonde(x);
  if constexpr (scalar_traits<T>::is_field) {
    return num / den;
  } else {
    fail(ErrorCode::InvalidArgument, "bialternant needs a field scalar");
  }
}

/// Content function r(j); std::nullopt marks a pole.
template <typename T>
using ContentFunction = std::function<std::optional<T>(int)>;

/// r_lambda(N) = prod over nodes (i,j) of r(N + j - i).
template <typename T>
T content_product(const Partition& lambda, int N, const ContentFunction<T>& r) {
  T acc = one<T>();
  for (int i = 1; i <= lambda.length(); ++i)
    for (int j = 1; j <= lambda.part(i); ++j) {
      const auto v = r(N + j - i);
      if (!v) fail(ErrorCode::SingularContent, "r(" + std::to_string(N + j - i) + ") is undefined");
      acc = acc * *v;
    }
  return acc;
}

inline int hook_length(const Partition& lambda, const Partition& conj, int i, int j) {
  return lambda.part(i) - j + conj.part(j) - i + 1;
}

/// Dimension of the GL(N) irreducible of type lambda, by hook-content formula.
inline Rational gl_dimension(const Partition& lambda, int N) {
  if (lambda.length() > N) fail(ErrorCode::LengthExceedsN, "gl_dimension needs length <= N");
  const Partition conj = lambda.conjugate();
  Rational acc(1);
  for (int i = 1; i <= lambda.length(); ++i)
    for (int j = 1; j <= lambda.part(i); ++j) acc *= Rational(N + j - i, hook_length(lambda, conj, i, j));
  acc.canonicalize();
  return acc;
}

/// Both sides of the truncated Cauchy-Littlewood identity:
/// sum_{|lambda| <= d} s_lambda(t) s_lambda(t') and the weight <= d part of
/// exp(sum_k k t_k t'_k).
template <typename T>
std::pair<T, T> cauchy_truncated(const TimeSequence<T>& t, const TimeSequence<T>& tp, int d) {
  T lhs = zero<T>();
  const SchurEvaluator<T> st(t, 2 * d + 1), stp(tp, 2 * d + 1);
  for (const auto& lambda : enumerate_partitions(d, d)) lhs = lhs + st(lambda) * stp(lambda);
  // The weight-k part of exp(sum k t_k t'_k) is the elementary Schur value of
  // the sequence u_k = k t_k t'_k.
  std::vector<T> u;
  for (int k = 1; k <= d; ++k) u.push_back(from_int<T>(k) * t.at(k) * tp.at(k));
  const auto e = elementary_schur_table(TimeSequence<T>(std::move(u)), d);
  T rhs = zero<T>();
  for (int k = 0; k <= d; ++k) rhs = rhs + e[k];
  return {lhs, rhs};
}

/// s_lambda(t) == (-1)^{|lambda|} s_{lambda^tr}(-t).
template <typename T>
bool transpose_sign_check(const Partition& lambda, const TimeSequence<T>& t) {
  const T lhs = schur_in_times(lambda, t);
  const T rhs = sign_power<T>(lambda.weight()) * schur_in_times(lambda.conjugate(), -t);
  return lhs == rhs;
}

/// Truncated Schur series keyed by partition tuples of fixed arity.
template <typename T>
struct SchurSeries {
  std::map<std::vector<Partition>, T> terms;
  int arity = 1;
  int max_weight = 0;

  void add(const std::vector<Partition>& key, const T& value) {
    if (scalar_traits<T>::is_zero(value)) return;
    auto [it, inserted] = terms.try_emplace(key, value);
    if (!inserted) {
      it->second = it->second + value;
      if (scalar_traits<T>::is_zero(it->second)) terms.erase(it);
    }
  }
};

}  // namespace zn2mm
