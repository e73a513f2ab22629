#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "matrix.hpp"
#include "quadrature.hpp"
#include "scalar.hpp"
#include "schur.hpp"

namespace zn2mm {

using json = nlohmann::json;
using CTimes = TimeSequence<Complex>;

// ---------------------------------------------------------------------------
// Specifications

/// exp(-x^2/2 - y^2/2 + c x y + V1(x) + V2(y)) dx dy on R^2; V_a[k] is the
/// coefficient of x^k.
struct GaussianCoupled {
  double c = 0.0;
  std::vector<double> v1, v2;
};

/// One straight piece of an integration contour.
struct ContourPiece {
  enum class Kind { Ray, Line, Segment };
  Kind kind = Kind::Ray;
  double angle = 0.0;   // ray and line direction
  int orientation = 1;  // ray: +1 outward from 0, -1 inward
  Complex a, b;         // segment endpoints
};
using Contour = std::vector<ContourPiece>;

/// sum_{a,b} kappa_ab int_{gamma_a} int_{Gamma_b} exp(-sum_i u_i x^i / i
/// - sum_i v_i y^i / i + x y) dx dy; u[i-1] holds u_i, the last entry leads.
struct ContourPolynomial {
  std::vector<Complex> u, v;
  std::vector<Contour> gammas, Gammas;
  std::vector<std::vector<Complex>> kappa;
};

/// w1(x) w2(y) tau(1/(x y)) dx/(ix) dy/(iy) on the product of unit circles,
/// with w(x) = exp(sum_k pos_k x^k + sum_k neg_k x^{-k}) and
/// tau(z) = sum_k kernel[k] z^k.
struct CircleProduct {
  std::vector<Complex> w1_pos, w1_neg, w2_pos, w2_neg;
  std::vector<Complex> kernel{Complex(1.0)};
  json kernel_source = json{{"type", "none"}};
};

/// exp(calV(|z|^2)) d^2z on the plane with x = z, y = conj(z);
/// calV(X) = sum_k potential[k] X^k.
struct RadialPlanar {
  std::vector<double> potential{0.0, -1.0};
};

using MeasureSpec = std::variant<GaussianCoupled, ContourPolynomial, CircleProduct, RadialPlanar>;

inline std::string measure_kind(const MeasureSpec& s) {
  switch (s.index()) {
    case 0: return "gaussian_coupled";
    case 1: return "contour_polynomial";
    case 2: return "circle_product";
    default: return "radial_planar";
  }
}

inline bool allows_negative_indices(const MeasureSpec& s) { return std::holds_alternative<CircleProduct>(s); }

/// tau_r(1, z) coefficients prod_{j<=k} r(j) for r(j) = g / j, i.e. exp(g z),
/// cut once the terms drop below 1e-20 of the running sum.
inline std::vector<Complex> kernel_exponential(Complex g) {
  std::vector<Complex> c{Complex(1.0)};
  double total = 1.0;
  for (int k = 1; k < 400; ++k) {
    c.push_back(c.back() * g / static_cast<double>(k));
    total += std::abs(c.back());
    if (k > std::abs(g) && std::abs(c.back()) < 1e-20 * total) return c;
  }
  fail(ErrorCode::Divergent, "exponential kernel coefficients do not decay");
}

/// tau_r(1, z) = 1 + sum_k r(1)...r(k) z^k for a finite list r(1..K).
inline std::vector<Complex> kernel_from_content(const std::vector<Complex>& r) {
  std::vector<Complex> c{Complex(1.0)};
  for (const auto& rj : r) c.push_back(c.back() * rj);
  return c;
}

// ---------------------------------------------------------------------------
// Deformations

/// Time deformations t^(1), t^(2), tbar^(1), tbar^(2) and the monomial powers n, m.
struct DeformationParams {
  CTimes t1, t2, tb1, tb2;
  int n = 0;
  int m = 0;

  bool has_bar() const { return !tb1.is_zero() || !tb2.is_zero(); }
  bool times_zero() const { return t1.is_zero() && t2.is_zero() && !has_bar(); }

  /// Same times with selected sequences zeroed (n, m kept).
  DeformationParams restricted(bool keep_t1, bool keep_t2, bool keep_tb1, bool keep_tb2) const {
    DeformationParams d = *this;
    if (!keep_t1) d.t1 = CTimes();
    if (!keep_t2) d.t2 = CTimes();
    if (!keep_tb1) d.tb1 = CTimes();
    if (!keep_tb2) d.tb2 = CTimes();
    return d;
  }

  /// Exponent V(x, t1) + V(y, t2) + V(1/x, tb1) + V(1/y, tb2).
  Complex exponent(Complex x, Complex y) const {
    Complex e(0.0);
    auto add = [&](const CTimes& t, Complex z) {
      Complex p(1.0);
      for (int k = 1; k <= t.degree(); ++k) {
        p *= z;
        e += t.at(k) * p;
      }
    };
    add(t1, x);
    add(t2, y);
    if (has_bar()) {
      add(tb1, Complex(1.0) / x);
      add(tb2, Complex(1.0) / y);
    }
    return e;
  }
};

/// c(t, tbar) = exp(-sum_a sum_k k t_k^(a) tbar_k^(a)).
inline Complex tau_normalization(const DeformationParams& d) {
  Complex s(0.0);
  for (int k = 1; k <= std::max(d.t1.degree(), d.tb1.degree()); ++k)
    s += static_cast<double>(k) * d.t1.at(k) * d.tb1.at(k);
  for (int k = 1; k <= std::max(d.t2.degree(), d.tb2.degree()); ++k)
    s += static_cast<double>(k) * d.t2.at(k) * d.tb2.at(k);
  return std::exp(-s);
}

namespace detail {

inline int leading_degree(const std::vector<double>& p) {
  for (int k = static_cast<int>(p.size()) - 1; k >= 0; --k)
    if (p[k] != 0.0) return k;
  return -1;
}

inline int leading_degree(const std::vector<Complex>& p) {
  for (int k = static_cast<int>(p.size()) - 1; k >= 0; --k)
    if (p[k] != Complex(0.0)) return k;
  return -1;
}

// Degree of the confining term along one Gaussian axis: the potential's
// leading degree if it is even with a negative coefficient, otherwise 2.
inline int gaussian_confinement(const std::vector<double>& v) {
  const int d = leading_degree(v);
  if (d > 2 && d % 2 == 0 && v[d] < 0.0) return d;
  return 2;
}

}  // namespace detail

/// Rejects deformations whose integrals diverge or need negative moments.
inline void validate_deformation(const MeasureSpec& spec, const DeformationParams& d) {
  if (d.has_bar() && !allows_negative_indices(spec))
    fail(ErrorCode::NegativeIndexUnsupported, "tbar deformations need negative moments; only circle_product measures allow them");
  if ((d.n < 0 || d.m < 0) && !allows_negative_indices(spec))
    fail(ErrorCode::NegativeIndexUnsupported, "negative n or m needs a circle_product measure");
  if (const auto* g = std::get_if<GaussianCoupled>(&spec)) {
    if (std::abs(g->c) >= 1.0 && detail::leading_degree(g->v1) <= 2 && detail::leading_degree(g->v2) <= 2)
      fail(ErrorCode::Divergent, "gaussian coupling needs |c| < 1");
    if (d.t1.degree() >= detail::gaussian_confinement(g->v1) || d.t2.degree() >= detail::gaussian_confinement(g->v2))
      fail(ErrorCode::DivergentDeformation, "time deformation degree must stay below the confining potential degree");
  } else if (const auto* r = std::get_if<RadialPlanar>(&spec)) {
    const int deg = 2 * detail::leading_degree(r->potential);
    if (d.t1.degree() >= deg || d.t2.degree() >= deg)
      fail(ErrorCode::DivergentDeformation, "time deformation degree must stay below twice the radial potential degree");
  } else if (const auto* c = std::get_if<ContourPolynomial>(&spec)) {
    if (d.t1.degree() >= detail::leading_degree(c->u) + 1 || d.t2.degree() >= detail::leading_degree(c->v) + 1)
      fail(ErrorCode::DivergentDeformation, "time deformation degree must stay below the potential degree");
  }
}

// ---------------------------------------------------------------------------
// Quadrature

enum class Scheme { GaussHermite, GaussLegendreMapped, CircleTrapezoid, RadialLaguerreAngularTrapezoid };

inline std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::GaussHermite: return "gauss_hermite";
    case Scheme::GaussLegendreMapped: return "gauss_legendre_mapped";
    case Scheme::CircleTrapezoid: return "circle_trapezoid";
    case Scheme::RadialLaguerreAngularTrapezoid: return "radial_laguerre_angular_trapezoid";
  }
  return "?";
}

inline Scheme scheme_for(const MeasureSpec& s) {
  switch (s.index()) {
    case 0: return Scheme::GaussHermite;
    case 1: return Scheme::GaussLegendreMapped;
    case 2: return Scheme::CircleTrapezoid;
    default: return Scheme::RadialLaguerreAngularTrapezoid;
  }
}

/// Points per axis to start from, the doubling budget and the relative target.
/// With certify off the first point count is used as is.
struct QuadratureSpec {
  int points = 0;
  int max_points = 0;
  double target = 1e-12;
  bool certify = true;
};

inline int default_points(const MeasureSpec& s) {
  switch (s.index()) {
    case 0: return 48;
    case 1: return 48;
    case 2: return 32;
    default: return 48;
  }
}

inline int default_max_points(const MeasureSpec& s) {
  switch (s.index()) {
    case 0: return 384;
    case 1: return 768;
    case 2: return 1024;
    default: return 768;
  }
}

inline QuadratureSpec resolved(const QuadratureSpec& q, const MeasureSpec& s) {
  QuadratureSpec r = q;
  if (r.points <= 0) r.points = default_points(s);
  if (r.max_points <= 0) r.max_points = std::max(r.points, default_max_points(s));
  return r;
}

/// Weighted node (x, y, w) of a two-dimensional rule for dmu.
struct PairNode {
  Complex x, y, w;
};

struct PairRule {
  std::vector<PairNode> nodes;
  int points = 0;
};

namespace detail {

inline Complex poly_eval(const std::vector<Complex>& c, Complex x) {
  Complex r(0.0);
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
  return r;
}

inline double poly_eval(const std::vector<double>& c, double x) {
  double r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
  return r;
}

// exp(sum_k pos_k x^k + sum_k neg_k x^{-k}).
inline Complex laurent_weight(const std::vector<Complex>& pos, const std::vector<Complex>& neg, Complex x) {
  Complex e(0.0), p(1.0), q(1.0);
  const Complex xi = Complex(1.0) / x;
  for (const auto& c : pos) {
    p *= x;
    e += c * p;
  }
  for (const auto& c : neg) {
    q *= xi;
    e += c * q;
  }
  return std::exp(e);
}

// -sum_i u_i x^i / i.
inline Complex contour_potential(const std::vector<Complex>& u, Complex x) {
  Complex e(0.0), p(1.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    p *= x;
    e -= u[i] * p / static_cast<double>(i + 1);
  }
  return e;
}

// Upper bound of |sum c_k x^k| on |x| <= r for the sub-leading terms.
inline double subleading_bound(const std::vector<Complex>& u, int lead, double r) {
  double b = 0.0;
  for (int i = 0; i < lead; ++i) b += std::abs(u[i]) * std::pow(r, i + 1) / static_cast<double>(i + 1);
  return b;
}

// Decay rate of exp(-u_{p+1} x^{p+1}/(p+1)) along direction theta.
inline double decay_rate(const std::vector<Complex>& u, double theta) {
  const int lead = leading_degree(u);
  const int p1 = lead + 1;
  return (u[lead] * std::polar(1.0, p1 * theta)).real() / static_cast<double>(p1);
}

struct AxisData {
  int lead = 0;  // exponent p+1 of the confining term
  double rate = 0.0;
  std::vector<Complex> u;
  CTimes t;
};

// Cutoff radii R_x, R_y beyond which the integrand is below exp(-60) of its
// scale for index budgets up to 40: rate R^{p+1} - R R_other - lower terms
// - 40 log(1+R) >= 60, iterated to a joint fixed point.
inline std::pair<double, double> contour_cutoffs(const AxisData& ax, const AxisData& ay) {
  auto solve = [](const AxisData& a, double other) {
    auto excess = [&](double r) {
      double lower = subleading_bound(a.u, a.lead - 1, r);
      for (int k = 1; k <= a.t.degree(); ++k) lower += std::abs(a.t.at(k)) * std::pow(r, k);
      return a.rate * std::pow(r, a.lead) - r * other - lower - 40.0 * std::log1p(r) - 60.0;
    };
    double r = 1.0;
    while (excess(r) < 0.0) {
      r *= 1.1;
      if (r > 1e4) fail(ErrorCode::Divergent, "contour integrand does not decay fast enough to bound the cutoff");
    }
    return r;
  };
  double rx = 1.0, ry = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double nx = solve(ax, ry), ny = solve(ay, nx);
    if (std::abs(nx - rx) < 1e-9 * nx && std::abs(ny - ry) < 1e-9 * ny) break;
    rx = nx;
    ry = ny;
  }
  return {rx, ry};
}

struct LineNode {
  Complex z, w;
};

inline std::vector<LineNode> contour_rule(const Contour& c, int q, double R) {
  std::vector<LineNode> out;
  for (const auto& piece : c) {
    switch (piece.kind) {
      case ContourPiece::Kind::Ray: {
        const Complex dir = std::polar(1.0, piece.angle);
        const auto& g = quadrature::legendre(q, 0.0, R);
        for (std::size_t i = 0; i < g.nodes.size(); ++i)
          out.push_back({g.nodes[i] * dir, static_cast<double>(piece.orientation) * g.weights[i] * dir});
        break;
      }
      case ContourPiece::Kind::Line: {
        const Complex dir = std::polar(1.0, piece.angle);
        const auto& g = quadrature::legendre(2 * q, -R, R);
        for (std::size_t i = 0; i < g.nodes.size(); ++i) out.push_back({g.nodes[i] * dir, g.weights[i] * dir});
        break;
      }
      case ContourPiece::Kind::Segment: {
        const auto& g = quadrature::legendre(q, 0.0, 1.0);
        for (std::size_t i = 0; i < g.nodes.size(); ++i)
          out.push_back({piece.a + (piece.b - piece.a) * g.nodes[i], (piece.b - piece.a) * g.weights[i]});
        break;
      }
    }
  }
  return out;
}

inline void require_decay(const std::vector<Complex>& u, const Contour& c, const char* axis) {
  const int lead = leading_degree(u);
  if (lead + 1 < 3) fail(ErrorCode::ConfigError, std::string("contour_polynomial needs potential degree >= 3 on ") + axis);
  for (const auto& piece : c) {
    if (piece.kind == ContourPiece::Kind::Segment) continue;
    const bool ok = decay_rate(u, piece.angle) > 0.0 &&
                    (piece.kind == ContourPiece::Kind::Ray || decay_rate(u, piece.angle + std::numbers::pi) > 0.0);
    if (!ok) fail(ErrorCode::Divergent, std::string("contour piece on ") + axis + " runs in a non-decaying direction");
  }
}

inline double min_rate(const std::vector<Complex>& u, const std::vector<Contour>& cs) {
  double r = INFINITY;
  for (const auto& c : cs)
    for (const auto& piece : c) {
      if (piece.kind == ContourPiece::Kind::Segment) continue;
      r = std::min(r, decay_rate(u, piece.angle));
      if (piece.kind == ContourPiece::Kind::Line) r = std::min(r, decay_rate(u, piece.angle + std::numbers::pi));
    }
  return std::isfinite(r) ? r : 1.0;
}

}  // namespace detail

/// Two-dimensional rule for the time-deformed measure
/// exp(V(x,t1) + V(y,t2) + V(1/x,tb1) + V(1/y,tb2)) dmu(x, y) with q points
/// per axis. The monomial factor x^n y^m is not included.
inline PairRule build_pair_rule(const MeasureSpec& spec, const DeformationParams& d, int q) {
  PairRule rule;
  rule.points = q;
  if (const auto* g = std::get_if<GaussianCoupled>(&spec)) {
    const auto& h = quadrature::hermite(q);
    rule.nodes.reserve(static_cast<std::size_t>(q) * q);
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) {
        const double x = h.nodes[a], y = h.nodes[b];
        const Complex e = std::log(h.weights[a]) + std::log(h.weights[b]) + g->c * x * y +
                          detail::poly_eval(g->v1, x) + detail::poly_eval(g->v2, y) + d.exponent(x, y);
        rule.nodes.push_back({Complex(x), Complex(y), std::exp(e)});
      }
  } else if (const auto* c = std::get_if<CircleProduct>(&spec)) {
    const auto tr = quadrature::trapezoid_circle(q);
    std::vector<Complex> pts(q), w1(q), w2(q);
    for (int a = 0; a < q; ++a) {
      pts[a] = std::polar(1.0, tr.nodes[a]);
      w1[a] = detail::laurent_weight(c->w1_pos, c->w1_neg, pts[a]);
      w2[a] = detail::laurent_weight(c->w2_pos, c->w2_neg, pts[a]);
    }
    rule.nodes.reserve(static_cast<std::size_t>(q) * q);
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) {
        const Complex x = pts[a], y = pts[b];
        const Complex kern = detail::poly_eval(c->kernel, Complex(1.0) / (x * y));
        rule.nodes.push_back({x, y, tr.weights[a] * tr.weights[b] * w1[a] * w2[b] * kern * std::exp(d.exponent(x, y))});
      }
  } else if (const auto* r = std::get_if<RadialPlanar>(&spec)) {
    const auto& lag = quadrature::laguerre(q);
    const auto tr = quadrature::trapezoid_circle(q);
    rule.nodes.reserve(static_cast<std::size_t>(q) * q);
    for (int a = 0; a < q; ++a) {
      const double X = lag.nodes[a];
      const double radial = std::log(lag.weights[a]) + X + detail::poly_eval(r->potential, X);
      for (int b = 0; b < q; ++b) {
        const Complex z = std::polar(std::sqrt(X), tr.nodes[b]);
        const Complex y = std::conj(z);
        // d^2 z = (1/2) dX dtheta
        rule.nodes.push_back({z, y, 0.5 * tr.weights[b] * std::exp(radial + d.exponent(z, y))});
      }
    }
  } else {
    const auto& cp = std::get<ContourPolynomial>(spec);
    for (const auto& c : cp.gammas) detail::require_decay(cp.u, c, "x");
    for (const auto& c : cp.Gammas) detail::require_decay(cp.v, c, "y");
    detail::AxisData ax{detail::leading_degree(cp.u) + 1, detail::min_rate(cp.u, cp.gammas), cp.u, d.t1};
    detail::AxisData ay{detail::leading_degree(cp.v) + 1, detail::min_rate(cp.v, cp.Gammas), cp.v, d.t2};
    const auto [Rx, Ry] = detail::contour_cutoffs(ax, ay);
    if (cp.kappa.size() != cp.gammas.size())
      fail(ErrorCode::ConfigError, "kappa needs one row per gamma contour");
    for (std::size_t a = 0; a < cp.gammas.size(); ++a) {
      if (cp.kappa[a].size() != cp.Gammas.size()) fail(ErrorCode::ConfigError, "kappa needs one column per Gamma contour");
      const auto xs = detail::contour_rule(cp.gammas[a], q, Rx);
      for (std::size_t b = 0; b < cp.Gammas.size(); ++b) {
        if (cp.kappa[a][b] == Complex(0.0)) continue;
        const auto ys = detail::contour_rule(cp.Gammas[b], q, Ry);
        for (const auto& xn : xs)
          for (const auto& yn : ys) {
            const Complex e = detail::contour_potential(cp.u, xn.z) + detail::contour_potential(cp.v, yn.z) +
                              xn.z * yn.z + d.exponent(xn.z, yn.z);
            rule.nodes.push_back({xn.z, yn.z, cp.kappa[a][b] * xn.w * yn.w * std::exp(e)});
          }
      }
    }
  }
  return rule;
}

/// Index rectangle [i_lo..i_hi] x [k_lo..k_hi].
struct IndexRect {
  int i_lo = 0, i_hi = 0, k_lo = 0, k_hi = 0;

  int rows() const { return i_hi - i_lo + 1; }
  int cols() const { return k_hi - k_lo + 1; }
  bool contains(int i, int k) const { return i >= i_lo && i <= i_hi && k >= k_lo && k <= k_hi; }
  bool contains(const IndexRect& o) const { return contains(o.i_lo, o.k_lo) && contains(o.i_hi, o.k_hi); }
  friend bool operator==(const IndexRect&, const IndexRect&) = default;
  friend auto operator<=>(const IndexRect&, const IndexRect&) = default;
};

/// Rectangular block of (deformed) bimoments with provenance.
template <typename T>
struct BimomentWindowT {
  IndexRect rect;
  Matrix<T> values;
  DeformationParams deform;
  std::string provenance = "quadrature";  // or "analytic", "file"
  int points = 0;
  double max_change = 0.0;  // largest certified difference between the last two point counts
  json measure;

  const T& at(int i, int k) const {
    if (!rect.contains(i, k))
      fail(ErrorCode::WindowTooSmall,
           "bimoment B_{" + std::to_string(i) + "," + std::to_string(k) + "} lies outside the window");
    return values(static_cast<std::size_t>(i - rect.i_lo), static_cast<std::size_t>(k - rect.k_lo));
  }
  bool covers(const IndexRect& r) const { return rect.contains(r); }
};

using BimomentWindow = BimomentWindowT<Complex>;

namespace detail {

inline void check_rect(const MeasureSpec& spec, const IndexRect& r) {
  if (r.i_hi < r.i_lo || r.k_hi < r.k_lo) fail(ErrorCode::InvalidArgument, "empty bimoment rectangle");
  if ((r.i_lo < 0 || r.k_lo < 0) && !allows_negative_indices(spec))
    fail(ErrorCode::NegativeIndexUnsupported,
         "negative bimoment indices need a circle_product measure (" + measure_kind(spec) + " given)");
}

struct RawWindow {
  Matrix<Complex> values, abs_sums;
};

// Plain fixed-order sums over the rule nodes. The node power uses the same
// int_power call for windows and single entries, so results agree bit for bit.
inline RawWindow sum_window(const PairRule& rule, const IndexRect& r) {
  RawWindow out{Matrix<Complex>(r.rows(), r.cols()), Matrix<Complex>(r.rows(), r.cols())};
  std::vector<Complex> xp(r.rows()), yp(r.cols());
  for (const auto& node : rule.nodes) {
    if (node.w == Complex(0.0)) continue;
    for (int i = 0; i < r.rows(); ++i) xp[i] = int_power(node.x, r.i_lo + i);
    for (int k = 0; k < r.cols(); ++k) yp[k] = int_power(node.y, r.k_lo + k);
    for (int i = 0; i < r.rows(); ++i) {
      const Complex wx = node.w * xp[i];
      for (int k = 0; k < r.cols(); ++k) {
        const Complex term = wx * yp[k];
        out.values(i, k) += term;
        out.abs_sums(i, k) += std::abs(term);
      }
    }
  }
  return out;
}

}  // namespace detail

/// Window of deformed bimoments, certified by point doubling: the result at
/// 2q is accepted once every entry moved by at most
/// max(target |B|, 100 eps sum|terms|) between q and 2q.
inline BimomentWindow bimoment_window_uncached(const MeasureSpec& spec, const IndexRect& rect,
                                               const DeformationParams& deform, const QuadratureSpec& quad_in) {
  detail::check_rect(spec, rect);
  validate_deformation(spec, deform);
  const QuadratureSpec quad = resolved(quad_in, spec);
  BimomentWindow w;
  w.rect = rect;
  w.deform = deform;
  w.provenance = "quadrature";
  int q = quad.points;
  auto coarse = detail::sum_window(build_pair_rule(spec, deform, q), rect);
  if (!quad.certify) {
    w.values = coarse.values;
    w.points = q;
    return w;
  }
  while (true) {
    const int q2 = 2 * q;
    if (q2 > quad.max_points)
      fail(ErrorCode::QuadratureNotConverged, "bimoments not certified within " + std::to_string(quad.max_points) +
                                                  " points per axis (target " + std::to_string(quad.target) + ")");
    auto fine = detail::sum_window(build_pair_rule(spec, deform, q2), rect);
    bool ok = true;
    double worst = 0.0;
    for (int i = 0; i < rect.rows(); ++i)
      for (int k = 0; k < rect.cols(); ++k) {
        const double diff = std::abs(fine.values(i, k) - coarse.values(i, k));
        const double tol = std::max(quad.target * std::abs(fine.values(i, k)), 100.0 * DBL_EPSILON * fine.abs_sums(i, k).real());
        worst = std::max(worst, diff);
        if (!(diff <= tol)) ok = false;
      }
    if (ok) {
      w.values = fine.values;
      w.points = q2;
      w.max_change = worst;
      return w;
    }
    q = q2;
    coarse = std::move(fine);
  }
}

// ---------------------------------------------------------------------------
// Closed forms

/// int x^i y^k exp(-x^2/2 - y^2/2 + c x y) dx dy via Isserlis with covariance
/// (1/(1-c^2)) [[1, c], [c, 1]].
inline double gaussian_bimoment_closed_form(double c, int i, int k) {
  if (i < 0 || k < 0) fail(ErrorCode::NegativeIndexUnsupported, "gaussian bimoments need non-negative indices");
  if (std::abs(c) >= 1.0) fail(ErrorCode::Divergent, "gaussian coupling needs |c| < 1");
  const double det = 1.0 - c * c;
  const double sxx = 1.0 / det, sxy = c / det;
  auto dfact = [](int n) {  // (n-1)!! for even n >= 0
    double r = 1.0;
    for (int j = n - 1; j > 1; j -= 2) r *= j;
    return r;
  };
  double total = 0.0;
  for (int r = 0; r <= std::min(i, k); ++r) {
    if ((i - r) % 2 || (k - r) % 2) continue;
    const double binoms = std::tgamma(i + 1.0) / (std::tgamma(r + 1.0) * std::tgamma(i - r + 1.0)) *
                          std::tgamma(k + 1.0) / (std::tgamma(r + 1.0) * std::tgamma(k - r + 1.0));
    total += binoms * std::tgamma(r + 1.0) * std::pow(sxy, r) * dfact(i - r) * std::pow(sxx, (i - r) / 2.0) *
             dfact(k - r) * std::pow(sxx, (k - r) / 2.0);
  }
  return 2.0 * std::numbers::pi / std::sqrt(det) * total;
}

/// int_0^inf exp(calV(X)) X^j dX; exact for linear potentials, otherwise
/// Gauss-Laguerre with point doubling.
inline double radial_moment(const RadialPlanar& spec, int j, double target = 1e-13) {
  if (j < 0) fail(ErrorCode::NegativeIndexUnsupported, "radial moments need j >= 0");
  const int deg = detail::leading_degree(spec.potential);
  if (deg < 1 || spec.potential[deg] >= 0.0)
    fail(ErrorCode::Divergent, "radial potential must have a negative leading coefficient");
  if (deg == 1) {
    const double a = -spec.potential[1];
    return std::exp(spec.potential[0]) * std::tgamma(j + 1.0) / std::pow(a, j + 1);
  }
  auto eval = [&](int q) {
    const auto& lag = quadrature::laguerre(q);
    double s = 0.0;
    for (int a = 0; a < q; ++a) {
      const double X = lag.nodes[a];
      s += std::exp(std::log(lag.weights[a]) + X + detail::poly_eval(spec.potential, X) + j * std::log(X));
    }
    return s;
  };
  double prev = eval(32);
  for (int q = 64; q <= 1024; q *= 2) {
    const double cur = eval(q);
    if (std::abs(cur - prev) <= target * std::abs(cur)) return cur;
    prev = cur;
  }
  fail(ErrorCode::QuadratureNotConverged, "radial moment not certified");
}

/// Closed-form undeformed bimoment when one is known: plain gaussian, circle
/// with unit weights (B_ik = (2 pi)^2 delta_ik tau_i) and the radial planar
/// measure (B_ik = delta_ik pi M(i)).
inline std::optional<Complex> analytic_bimoment(const MeasureSpec& spec, int i, int k) {
  if (const auto* g = std::get_if<GaussianCoupled>(&spec)) {
    if (detail::leading_degree(g->v1) >= 1 || detail::leading_degree(g->v2) >= 1) return std::nullopt;
    const double scale = std::exp((g->v1.empty() ? 0.0 : g->v1[0]) + (g->v2.empty() ? 0.0 : g->v2[0]));
    return Complex(scale * gaussian_bimoment_closed_form(g->c, i, k));
  }
  if (const auto* c = std::get_if<CircleProduct>(&spec)) {
    if (!c->w1_pos.empty() || !c->w1_neg.empty() || !c->w2_pos.empty() || !c->w2_neg.empty()) return std::nullopt;
    if (i != k || i < 0 || i >= static_cast<int>(c->kernel.size())) return Complex(0.0);
    return 4.0 * std::numbers::pi * std::numbers::pi * c->kernel[i];
  }
  if (const auto* r = std::get_if<RadialPlanar>(&spec)) {
    if (i < 0 || k < 0) fail(ErrorCode::NegativeIndexUnsupported, "radial bimoments need non-negative indices");
    if (i != k) return Complex(0.0);
    return Complex(std::numbers::pi * radial_moment(*r, i));
  }
  return std::nullopt;
}

inline BimomentWindow analytic_window(const MeasureSpec& spec, const IndexRect& rect) {
  detail::check_rect(spec, rect);
  BimomentWindow w;
  w.rect = rect;
  w.provenance = "analytic";
  w.values = Matrix<Complex>(rect.rows(), rect.cols());
  for (int i = rect.i_lo; i <= rect.i_hi; ++i)
    for (int k = rect.k_lo; k <= rect.k_hi; ++k) {
      const auto v = analytic_bimoment(spec, i, k);
      if (!v) fail(ErrorCode::InvalidArgument, "no closed form for this " + measure_kind(spec) + " measure");
      w.values(i - rect.i_lo, k - rect.k_lo) = *v;
    }
  return w;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline json complex_to_json(Complex z) {
  if (z.imag() == 0.0) return z.real();
  return json::array({z.real(), z.imag()});
}

inline Complex complex_from_json(const json& j) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Complex(j[0].get<double>(), j[1].get<double>());
  if (j.is_object() && j.contains("re")) return Complex(j.at("re").get<double>(), j.value("im", 0.0));
  fail(ErrorCode::ConfigError, "expected a number or [re, im], got " + j.dump());
}

inline std::vector<Complex> complex_list(const json& j) {
  std::vector<Complex> out;
  if (j.is_null()) return out;
  if (!j.is_array()) fail(ErrorCode::ConfigError, "expected a list of numbers, got " + j.dump());
  for (const auto& e : j) out.push_back(complex_from_json(e));
  return out;
}

inline json complex_list_json(const std::vector<Complex>& v) {
  json a = json::array();
  for (const auto& z : v) a.push_back(complex_to_json(z));
  return a;
}

inline std::vector<double> real_list(const json& j) {
  std::vector<double> out;
  if (j.is_null()) return out;
  if (!j.is_array()) fail(ErrorCode::ConfigError, "expected a list of numbers, got " + j.dump());
  for (const auto& e : j) {
    if (!e.is_number()) fail(ErrorCode::ConfigError, "expected a number, got " + e.dump());
    out.push_back(e.get<double>());
  }
  return out;
}

inline Contour contour_from_json(const json& j) {
  Contour c;
  if (!j.is_array()) fail(ErrorCode::ConfigError, "a contour is a list of pieces");
  for (const auto& p : j) {
    ContourPiece piece;
    const std::string type = p.value("type", "");
    if (type == "ray") {
      piece.kind = ContourPiece::Kind::Ray;
      piece.angle = p.value("angle", 0.0);
      piece.orientation = p.value("orientation", 1);
      if (piece.orientation != 1 && piece.orientation != -1) fail(ErrorCode::ConfigError, "ray orientation must be +1 or -1");
    } else if (type == "line") {
      piece.kind = ContourPiece::Kind::Line;
      piece.angle = p.value("angle", 0.0);
    } else if (type == "segment") {
      piece.kind = ContourPiece::Kind::Segment;
      piece.a = complex_from_json(p.at("from"));
      piece.b = complex_from_json(p.at("to"));
    } else {
      fail(ErrorCode::ConfigError, "unknown contour piece type '" + type + "'");
    }
    c.push_back(piece);
  }
  return c;
}

inline json contour_to_json(const Contour& c) {
  json a = json::array();
  for (const auto& p : c) {
    switch (p.kind) {
      case ContourPiece::Kind::Ray: a.push_back({{"type", "ray"}, {"angle", p.angle}, {"orientation", p.orientation}}); break;
      case ContourPiece::Kind::Line: a.push_back({{"type", "line"}, {"angle", p.angle}}); break;
      case ContourPiece::Kind::Segment:
        a.push_back({{"type", "segment"}, {"from", complex_to_json(p.a)}, {"to", complex_to_json(p.b)}});
        break;
    }
  }
  return a;
}

inline std::vector<Complex> kernel_from_json(const json& k) {
  const std::string type = k.value("type", "none");
  if (type == "none") return {Complex(1.0)};
  if (type == "exponential") return kernel_exponential(complex_from_json(k.value("scale", json(1.0))));
  if (type == "content") return kernel_from_content(complex_list(k.at("r")));
  if (type == "coefficients") return complex_list(k.at("c"));
  fail(ErrorCode::ConfigError, "unknown kernel type '" + type + "'");
}

inline void weight_from_json(const json& j, std::vector<Complex>& pos, std::vector<Complex>& neg) {
  if (j.is_null()) return;
  pos = complex_list(j.value("pos", json::array()));
  neg = complex_list(j.value("neg", json::array()));
}

}  // namespace detail

inline MeasureSpec measure_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::ConfigError, "measure must be a JSON object");
  const std::string kind = j.value("kind", "");
  if (kind == "gaussian_coupled") {
    GaussianCoupled g;
    g.c = j.value("c", 0.0);
    g.v1 = detail::real_list(j.value("V1", json::array()));
    g.v2 = detail::real_list(j.value("V2", json::array()));
    if (std::abs(g.c) >= 1.0 && detail::leading_degree(g.v1) <= 2 && detail::leading_degree(g.v2) <= 2)
      fail(ErrorCode::ConfigError, "gaussian_coupled needs |c| < 1");
    return g;
  }
  if (kind == "circle_product") {
    CircleProduct c;
    detail::weight_from_json(j.value("w1", json()), c.w1_pos, c.w1_neg);
    detail::weight_from_json(j.value("w2", json()), c.w2_pos, c.w2_neg);
    c.kernel_source = j.value("kernel", json{{"type", "none"}});
    c.kernel = detail::kernel_from_json(c.kernel_source);
    return c;
  }
  if (kind == "radial_planar") {
    RadialPlanar r;
    r.potential = detail::real_list(j.value("potential", json::array({0.0, -1.0})));
    const int deg = detail::leading_degree(r.potential);
    if (deg < 1 || r.potential[deg] >= 0.0) fail(ErrorCode::ConfigError, "radial potential needs a negative leading coefficient");
    return r;
  }
  if (kind == "contour_polynomial") {
    ContourPolynomial c;
    c.u = detail::complex_list(j.at("u"));
    c.v = detail::complex_list(j.at("v"));
    for (const auto& g : j.at("gamma")) c.gammas.push_back(detail::contour_from_json(g));
    for (const auto& g : j.at("Gamma")) c.Gammas.push_back(detail::contour_from_json(g));
    if (j.contains("kappa")) {
      for (const auto& row : j.at("kappa")) c.kappa.push_back(detail::complex_list(row));
    } else {
      c.kappa.assign(c.gammas.size(), std::vector<Complex>(c.Gammas.size(), Complex(1.0)));
    }
    return c;
  }
  fail(ErrorCode::ConfigError, "unknown measure kind '" + kind + "'");
}

inline json measure_to_json(const MeasureSpec& spec) {
  if (const auto* g = std::get_if<GaussianCoupled>(&spec))
    return {{"kind", "gaussian_coupled"}, {"c", g->c}, {"V1", g->v1}, {"V2", g->v2}};
  if (const auto* c = std::get_if<CircleProduct>(&spec))
    return {{"kind", "circle_product"},
            {"w1", {{"pos", detail::complex_list_json(c->w1_pos)}, {"neg", detail::complex_list_json(c->w1_neg)}}},
            {"w2", {{"pos", detail::complex_list_json(c->w2_pos)}, {"neg", detail::complex_list_json(c->w2_neg)}}},
            {"kernel", c->kernel_source}};
  if (const auto* r = std::get_if<RadialPlanar>(&spec)) return {{"kind", "radial_planar"}, {"potential", r->potential}};
  const auto& cp = std::get<ContourPolynomial>(spec);
  json gam = json::array(), Gam = json::array(), kap = json::array();
  for (const auto& c : cp.gammas) gam.push_back(detail::contour_to_json(c));
  for (const auto& c : cp.Gammas) Gam.push_back(detail::contour_to_json(c));
  for (const auto& row : cp.kappa) kap.push_back(detail::complex_list_json(row));
  return {{"kind", "contour_polynomial"},
          {"u", detail::complex_list_json(cp.u)},
          {"v", detail::complex_list_json(cp.v)},
          {"gamma", gam},
          {"Gamma", Gam},
          {"kappa", kap}};
}

inline CTimes times_from_json(const json& j) { return CTimes(detail::complex_list(j)); }
inline json times_to_json(const CTimes& t) { return detail::complex_list_json(t.coeffs()); }

inline DeformationParams deformation_from_json(const json& j) {
  DeformationParams d;
  if (j.is_null()) return d;
  if (!j.is_object()) fail(ErrorCode::ConfigError, "deform must be a JSON object");
  d.t1 = times_from_json(j.value("t1", json::array()));
  d.t2 = times_from_json(j.value("t2", json::array()));
  d.tb1 = times_from_json(j.value("tbar1", json::array()));
  d.tb2 = times_from_json(j.value("tbar2", json::array()));
  d.n = j.value("n", 0);
  d.m = j.value("m", 0);
  return d;
}

inline json deformation_to_json(const DeformationParams& d) {
  return {{"t1", times_to_json(d.t1)}, {"t2", times_to_json(d.t2)}, {"tbar1", times_to_json(d.tb1)},
          {"tbar2", times_to_json(d.tb2)}, {"n", d.n}, {"m", d.m}};
}

inline QuadratureSpec quadrature_from_json(const json& j) {
  QuadratureSpec q;
  if (j.is_null()) return q;
  q.points = j.value("points", 0);
  q.max_points = j.value("max_points", 0);
  q.target = j.value("target", 1e-12);
  q.certify = j.value("certify", true);
  if (q.target <= 0.0) fail(ErrorCode::ConfigError, "quadrature target must be positive");
  return q;
}

inline json quadrature_to_json(const QuadratureSpec& q) {
  return {{"points", q.points}, {"max_points", q.max_points}, {"target", q.target}, {"certify", q.certify}};
}

/// Window JSON; numbers use the shortest round-trip form, so reloading is exact.
inline json window_to_json(const BimomentWindow& w) {
  json rows = json::array();
  for (int i = 0; i < w.rect.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < w.rect.cols(); ++k) {
      const Complex z = w.values(i, k);
      row.push_back(json::array({z.real(), z.imag()}));
    }
    rows.push_back(row);
  }
  return {{"kind", "bimoment_window"},
          {"i_range", {w.rect.i_lo, w.rect.i_hi}},
          {"k_range", {w.rect.k_lo, w.rect.k_hi}},
          {"values", rows},
          {"deform", deformation_to_json(w.deform)},
          {"provenance", {{"method", w.provenance}, {"points", w.points}, {"max_change", w.max_change}}},
          {"measure", w.measure}};
}

inline BimomentWindow window_from_json(const json& j) {
  if (j.value("kind", "") != "bimoment_window") fail(ErrorCode::ConfigError, "not a bimoment_window document");
  BimomentWindow w;
  w.rect = {j.at("i_range")[0].get<int>(), j.at("i_range")[1].get<int>(), j.at("k_range")[0].get<int>(),
            j.at("k_range")[1].get<int>()};
  if (w.rect.rows() <= 0 || w.rect.cols() <= 0) fail(ErrorCode::ConfigError, "window ranges are empty");
  w.values = Matrix<Complex>(w.rect.rows(), w.rect.cols());
  const auto& rows = j.at("values");
  if (static_cast<int>(rows.size()) != w.rect.rows()) fail(ErrorCode::ConfigError, "window row count mismatch");
  for (int i = 0; i < w.rect.rows(); ++i) {
    if (static_cast<int>(rows[i].size()) != w.rect.cols()) fail(ErrorCode::ConfigError, "window column count mismatch");
    for (int k = 0; k < w.rect.cols(); ++k) w.values(i, k) = detail::complex_from_json(rows[i][k]);
  }
  w.deform = deformation_from_json(j.value("deform", json()));
  const auto prov = j.value("provenance", json::object());
  w.provenance = prov.value("method", "file");
  w.points = prov.value("points", 0);
  w.max_change = prov.value("max_change", 0.0);
  w.measure = j.value("measure", json());
  return w;
}

inline void save_window(const BimomentWindow& w, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::ConfigError, "cannot write " + path);
  out << window_to_json(w).dump(2) << "\n";
}

inline BimomentWindow load_window(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("malformed window file: ") + e.what());
  }
  return window_from_json(j);
}

// ---------------------------------------------------------------------------
// Cached entry points

namespace detail {

class WindowCache {
 public:
  static WindowCache& instance() {
    static WindowCache c;
    return c;
  }

  std::optional<BimomentWindow> find(const std::string& key, const IndexRect& r) {
    std::lock_guard lock(mutex_);
    auto range = table_.equal_range(key);
    for (auto it = range.first; it != range.second; ++it)
      if (it->second.rect == r) return it->second;
    return std::nullopt;
  }

  void insert(const std::string& key, const BimomentWindow& w) {
    std::lock_guard lock(mutex_);
    table_.emplace(key, w);
  }

  void clear() {
    std::lock_guard lock(mutex_);
    table_.clear();
  }

 private:
  std::mutex mutex_;
  std::multimap<std::string, BimomentWindow> table_;
};

inline std::string cache_key(const MeasureSpec& spec, const DeformationParams& d, const QuadratureSpec& q) {
  DeformationParams times = d;
  times.n = times.m = 0;
  return measure_to_json(spec).dump() + deformation_to_json(times).dump() + quadrature_to_json(q).dump();
}

}  // namespace detail

inline void clear_window_cache() { detail::WindowCache::instance().clear(); }

/// Certified window of B_{ik}(t1, t2, tb1, tb2); memoized per (measure,
/// times, rectangle, quadrature). n and m are not applied here: engines
/// shift indices instead.
inline BimomentWindow bimoment_window(const MeasureSpec& spec, const IndexRect& rect, const DeformationParams& deform,
                                      const QuadratureSpec& quad = {}) {
  const std::string key = detail::cache_key(spec, deform, quad);
  if (auto hit = detail::WindowCache::instance().find(key, rect)) return *hit;
  BimomentWindow w = bimoment_window_uncached(spec, rect, deform, quad);
  w.deform.n = w.deform.m = 0;
  w.measure = measure_to_json(spec);
  detail::WindowCache::instance().insert(key, w);
  return w;
}

/// B_{ik}(t1, t2, tb1, tb2).
inline Complex deformed_bimoment(const MeasureSpec& spec, int i, int k, const DeformationParams& deform,
                                 const QuadratureSpec& quad = {}) {
  return bimoment_window(spec, {i, i, k, k}, deform, quad).at(i, k);
}

/// Undeformed B_{ik} by quadrature.
inline Complex bimoment(const MeasureSpec& spec, int i, int k, const QuadratureSpec& quad = {}) {
  return deformed_bimoment(spec, i, k, DeformationParams{}, quad);
}

}  // namespace zn2mm
