#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "scalar.hpp"

namespace zn2mm {

/// Formal variable families used by the symbolic oracles. A variable is the
/// pair (family, index); the printed names are t_k, t1_k, t2_k, tb1_k, tb2_k,
/// x_k and y_k.
enum class VarFamily : int { T = 0, T1 = 1, T2 = 2, TBar1 = 3, TBar2 = 4, X = 5, Y = 6 };

inline int var_id(VarFamily f, int index) { return static_cast<int>(f) * 1000 + index; }

inline std::string var_name(int id) {
  static const char* names[] = {"t", "t1_", "t2_", "tb1_", "tb2_", "x", "y"};
  const int family = id / 1000;
  const int index = id % 1000;
  std::string base = (family >= 0 && family < 7) ? names[family] : "v";
  if (family == 0 || family == 5 || family == 6) base += "_";
  return base + std::to_string(index);
}

/// Sparse multivariate Laurent polynomial with exact rational coefficients.
/// Monomials are sorted (variable, exponent) lists with nonzero exponents;
/// zero coefficients are never stored.
class Polynomial {
 public:
  using Monomial = std::vector<std::pair<int, int>>;
  using Terms = std::map<Monomial, Rational>;

  Polynomial() = default;
  Polynomial(long c) {  // NOLINT: integers embed as constants
    if (c != 0) terms_[Monomial{}] = Rational(c);
  }
  explicit Polynomial(const Rational& c) {
    if (sgn(c) != 0) terms_[Monomial{}] = c;
  }

  static Polynomial variable(int id, int exponent = 1) {
    Polynomial p;
    p.terms_[Monomial{{id, exponent}}] = Rational(1);
    return p;
  }
  static Polynomial variable(VarFamily f, int index, int exponent = 1) {
    return variable(var_id(f, index), exponent);
  }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  Rational coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  Polynomial& operator+=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial operator-() const {
    Polynomial r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial r;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.add_term(multiply(ma, mb), ca * cb);
    return r;
  }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  Polynomial scaled(const Rational& s) const {
    Polynomial r;
    if (sgn(s) == 0) return r;
    for (const auto& [m, c] : terms_) r.terms_[m] = c * s;
    return r;
  }

  Polynomial div_int(long k) const {
    if (k == 0) fail(ErrorCode::InvalidArgument, "polynomial division by zero");
    return scaled(Rational(1, 1) / Rational(k));
  }

  /// Inverse of a single monomial term (Laurent exponents).
  Polynomial inverse_monomial() const {
    if (terms_.size() != 1) fail(ErrorCode::InvalidArgument, "only monomials are invertible");
    const auto& [m, c] = *terms_.begin();
    Monomial inv = m;
    for (auto& [v, e] : inv) e = -e;
    Polynomial r;
    Rational ic = Rational(1) / c;
    ic.canonicalize();
    r.terms_[inv] = ic;
    return r;
  }

  /// Drops every monomial whose weighted degree exceeds max_degree.
  Polynomial truncated(const std::function<int(const Monomial&)>& degree, int max_degree) const {
    Polynomial r;
    for (const auto& [m, c] : terms_)
      if (degree(m) <= max_degree) r.terms_[m] = c;
    return r;
  }

  /// Substitutes rational values for every variable.
  Rational evaluate(const std::function<Rational(int)>& value) const {
    Rational total(0);
    for (const auto& [m, c] : terms_) {
      Rational term = c;
      for (const auto& [v, e] : m) term *= int_power(value(v), e);
      total += term;
    }
    total.canonicalize();
    return total;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

  /// Canonical text: monomials ordered by total degree, then lexicographically.
  std::string str() const {
    if (terms_.empty()) return "0";
    std::vector<std::pair<Monomial, Rational>> ordered(terms_.begin(), terms_.end());
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
      return total_degree(a.first) < total_degree(b.first);
    });
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : ordered) {
      Rational coeff = c;
      if (first) {
        if (sgn(coeff) < 0) {
          os << "-";
          coeff = -coeff;
        }
      } else {
        os << (sgn(coeff) < 0 ? " - " : " + ");
        if (sgn(coeff) < 0) coeff = -coeff;
      }
      first = false;
      const bool unit = (coeff == 1);
      if (!unit || m.empty()) os << coeff.get_str();
      bool need_star = !unit;
      for (const auto& [v, e] : m) {
        if (need_star) os << "*";
        os << var_name(v);
        if (e != 1) os << "^" << e;
        need_star = true;
      }
    }
    return os.str();
  }

  static int total_degree(const Monomial& m) {
    int d = 0;
    for (const auto& [v, e] : m) d += e;
    return d;
  }

 private:
  void add_term(const Monomial& m, const Rational& c) {
    if (sgn(c) == 0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (sgn(it->second) == 0) terms_.erase(it);
    }
  }

  static Monomial multiply(const Monomial& a, const Monomial& b) {
    Monomial r;
    r.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
      if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
        r.push_back(a[i++]);
      } else if (i == a.size() || b[j].first < a[i].first) {
        r.push_back(b[j++]);
      } else {
        const int e = a[i].second + b[j].second;
        if (e != 0) r.emplace_back(a[i].first, e);
        ++i;
        ++j;
      }
    }
    return r;
  }

  Terms terms_;
};

template <>
struct scalar_traits<Polynomial> {
  static constexpr bool is_exact = true;
  static constexpr bool is_field = false;
  static Polynomial from_int(long v) { return Polynomial(v); }
  static double magnitude(const Polynomial& v) { return v.is_zero() ? 0.0 : 1.0; }
  static bool is_zero(const Polynomial& v) { return v.is_zero(); }
};

}  // namespace zn2mm
