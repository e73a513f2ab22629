#pragma once

#include <cstddef>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"
#include "scalar.hpp"

namespace zn2mm {

/// Small dense row-major matrix. The determinants here never exceed a few
/// dozen rows, so no blocking or expression templates.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, zero<T>()) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

namespace detail {

template <typename T>
T det_partial_pivot(Matrix<T> a) {
  const std::size_t n = a.rows();
  T det = one<T>();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = scalar_traits<T>::magnitude(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = scalar_traits<T>::magnitude(a(i, k));
      if (m > best) {
        best = m;
        piv = i;
      }
    }
    if (best == 0.0) return zero<T>();
    if (piv != k) {
      a.swap_rows(piv, k);
      det = -det;
    }
    const T pivot = a(k, k);
    det = det * pivot;
    for (std::size_t i = k + 1; i < n; ++i) {
      const T factor = a(i, k) / pivot;
      if (scalar_traits<T>::is_zero(factor)) continue;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) = a(i, j) - factor * a(k, j);
    }
  }
  return det;
}

// Bareiss elimination: every division is exact, so intermediate rationals
// stay as small as the minors they represent.
inline Rational det_bareiss(Matrix<Rational> a) {
  const std::size_t n = a.rows();
  if (n == 0) return Rational(1);
  Rational prev(1);
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (sgn(a(k, k)) == 0) {
      std::size_t piv = k + 1;
      while (piv < n && sgn(a(piv, k)) == 0) ++piv;
      if (piv == n) return Rational(0);
      a.swap_rows(piv, k);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        Rational v = a(i, j) * a(k, k) - a(i, k) * a(k, j);
        v /= prev;
        v.canonicalize();
        a(i, j) = v;
      }
    }
    prev = a(k, k);
  }
  Rational d = a(n - 1, n - 1);
  if (sign < 0) d = -d;
  return d;
}

// Division-free expansion over column subsets, O(n 2^n) ring operations.
template <typename T>
T det_subset_expansion(const Matrix<T>& a) {
  const std::size_t n = a.rows();
  if (n == 0) return one<T>();
  if (n > 20) fail(ErrorCode::BoundExceeded, "subset-expansion determinant limited to 20 rows");
  // minors[mask] = determinant of rows [n - popcount(mask), n) on columns in mask.
  std::vector<T> minors(std::size_t{1} << n, zero<T>());
  minors[0] = one<T>();
  for (std::size_t mask = 1; mask < minors.size(); ++mask) {
    const int count = __builtin_popcountll(mask);
    const std::size_t row = n - static_cast<std::size_t>(count);
    T acc = zero<T>();
    int position = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(mask & (std::size_t{1} << j))) continue;
      const T& entry = a(row, j);
      if (!scalar_traits<T>::is_zero(entry)) {
        const T& minor = minors[mask & ~(std::size_t{1} << j)];
        if (!scalar_traits<T>::is_zero(minor)) {
          T term = entry * minor;
          if (position % 2 == 0)
            acc = acc + term;
          else
            acc = acc - term;
        }
      }
      ++position;
    }
    minors[mask] = acc;
  }
  return minors.back();
}

}  // namespace detail

/// Determinant with the algorithm suited to the scalar: partial pivoting for
/// floating point, Bareiss for rationals, subset expansion for polynomial rings.
/// The empty matrix has determinant 1.
template <typename T>
T determinant(const Matrix<T>& a) {
  if (a.rows() != a.cols()) fail(ErrorCode::InvalidArgument, "determinant of a non-square matrix");
  if (a.rows() == 0) return one<T>();
  if constexpr (std::is_same_v<T, Rational>) {
    return detail::det_bareiss(a);
  } else if constexpr (scalar_traits<T>::is_field) {
    return detail::det_partial_pivot(a);
  } else {
    return detail::det_subset_expansion(a);
  }
}

}  // namespace zn2mm
