#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "fermion.hpp"
#include "littlewood_richardson.hpp"
#include "matrix.hpp"
#include "measures.hpp"
#include "partitions.hpp"
#include "schur.hpp"

namespace zn2mm {

using fermion::Variant;
using fermion::variant_name;

/// Outcome of one partition-function evaluation.
struct ZResult {
  Complex value;
  std::string engine;
  int N = 0, n = 0, m = 0;
  std::string deform_fingerprint;
  int truncation = -1;          // series engines only
  double error_estimate = 0.0;  // absolute; last shell, point doubling or propagated window change
  int points = 0;               // quadrature points per axis, when used
  std::string exact;            // p/q string in rational mode
};

inline std::string deform_fingerprint(const DeformationParams& d) { return deformation_to_json(d).dump(); }

inline json zresult_to_json(const ZResult& z) {
  json j = {{"kind", "z_result"},
            {"engine", z.engine},
            {"N", z.N},
            {"n", z.n},
            {"m", z.m},
            {"value", json::array({z.value.real(), z.value.imag()})},
            {"error_estimate", z.error_estimate},
            {"deform", json::parse(z.deform_fingerprint.empty() ? "null" : z.deform_fingerprint)}};
  if (z.truncation >= 0) j["truncation"] = z.truncation;
  if (z.points > 0) j["points"] = z.points;
  if (!z.exact.empty()) j["exact"] = z.exact;
  return j;
}

inline ZResult zresult_from_json(const json& j) {
  ZResult z;
  z.engine = j.at("engine").get<std::string>();
  z.N = j.at("N").get<int>();
  z.n = j.value("n", 0);
  z.m = j.value("m", 0);
  z.value = Complex(j.at("value")[0].get<double>(), j.at("value")[1].get<double>());
  z.error_estimate = j.value("error_estimate", 0.0);
  z.deform_fingerprint = j.contains("deform") && !j["deform"].is_null() ? j["deform"].dump() : "";
  z.truncation = j.value("truncation", -1);
  z.points = j.value("points", 0);
  z.exact = j.value("exact", "");
  return z;
}

/// Coefficients g_{lambda mu} of a double series, or I_{lambda mu nu eta} of
/// the quadruple series, in summation order.
struct CoefficientTable {
  std::string kind;  // "++", "--", "+-", "-+" or "quadruple"
  struct Entry {
    std::vector<Partition> key;
    Complex value;
  };
  std::vector<Entry> entries;
  json window_provenance;
};

inline std::string table_to_csv(const CoefficientTable& t) {
  std::string out = t.kind == "quadruple" ? "lambda,mu,nu,eta,re,im\n" : "lambda,mu,re,im\n";
  char buf[64];
  for (const auto& e : t.entries) {
    for (const auto& p : e.key) out += "\"" + p.str() + "\",";
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", e.value.real(), e.value.imag());
    out += buf;
  }
  return out;
}

inline json table_to_json(const CoefficientTable& t) {
  json entries = json::array();
  for (const auto& e : t.entries) {
    json key = json::array();
    for (const auto& p : e.key) key.push_back(p.parts());
    entries.push_back({{"key", key}, {"value", json::array({e.value.real(), e.value.imag()})}});
  }
  return {{"kind", "coefficient_table"}, {"variant", t.kind}, {"entries", entries}, {"window", t.window_provenance}};
}

namespace detail {

template <typename T>
T factorial_scalar(int N) {
  T r = one<T>();
  for (int k = 2; k <= N; ++k) r = r * from_int<T>(k);
  return r;
}

inline int permutation_sign(const std::vector<int>& p) {
  int inv = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) ++inv;
  return inv % 2 ? -1 : 1;
}

inline std::vector<std::pair<std::vector<int>, int>> signed_permutations(int N) {
  std::vector<int> p(N);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::pair<std::vector<int>, int>> out;
  do out.emplace_back(p, permutation_sign(p));
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Relative size of the window change used for certification.
inline double window_relative_change(const BimomentWindow& w) {
  double big = 0.0;
  for (std::size_t i = 0; i < w.values.rows(); ++i)
    for (std::size_t k = 0; k < w.values.cols(); ++k) big = std::max(big, std::abs(w.values(i, k)));
  return big > 0.0 ? w.max_change / big : 0.0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Determinant engines on a bimoment window

/// Sum over sigma, tau in S_N of sgn(sigma) sgn(tau) prod_i B_{n+N-sigma(i), m+N-tau(i)}.
template <typename T>
T permutation_value(const BimomentWindowT<T>& w, int N, int n, int m) {
  if (N < 0) return zero<T>();
  if (N == 0) return one<T>();
  if (N > 6) fail(ErrorCode::BoundExceeded, "permutation_Z is limited to N <= 6");
  Matrix<T> a(N, N);
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q) a(p, q) = w.at(n + N - 1 - p, m + N - 1 - q);
  const auto perms = detail::signed_permutations(N);
  T total = zero<T>();
  for (const auto& [sigma, ssign] : perms)
    for (const auto& [tau, tsign] : perms) {
      T prod = from_int<T>(ssign * tsign);
      for (int i = 0; i < N; ++i) prod = prod * a(sigma[i], tau[i]);
      total = total + prod;
    }
  return total;
}

/// N! det(B_{n+i-1, m+j-1})_{i,j=1..N}.
template <typename T>
T andreief_value(const BimomentWindowT<T>& w, int N, int n, int m) {
  if (N < 0) return zero<T>();
  if (N == 0) return one<T>();
  Matrix<T> a(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) a(i, j) = w.at(n + i, m + j);
  return detail::factorial_scalar<T>(N) * determinant(a);
}

inline ZResult window_result(const BimomentWindow& w, const char* engine, Complex value, int N, int n, int m) {
  ZResult z;
  z.value = value;
  z.engine = engine;
  z.N = N;
  z.n = n;
  z.m = m;
  z.deform_fingerprint = deform_fingerprint(w.deform);
  z.points = w.points;
  z.error_estimate = std::max(N, 1) * detail::window_relative_change(w) * std::abs(value);
  return z;
}

inline ZResult permutation_Z(const BimomentWindow& w, int N, int n, int m) {
  return window_result(w, "permutation", permutation_value(w, N, n, m), N, n, m);
}

inline ZResult andreief_Z(const BimomentWindow& w, int N, int n, int m) {
  return window_result(w, "andreief", andreief_value(w, N, n, m), N, n, m);
}

/// Window rows/columns needed by permutation_Z and andreief_Z.
inline IndexRect andreief_rect(int N, int n, int m) { return {n, n + std::max(N, 1) - 1, m, m + std::max(N, 1) - 1}; }

/// andreief_Z on the fully deformed window of a measure.
inline ZResult andreief_Z(const MeasureSpec& spec, const DeformationParams& d, int N, const QuadratureSpec& quad = {}) {
  validate_deformation(spec, d);
  if (N <= 0) {
    ZResult z;
    z.value = N < 0 ? Complex(0.0) : Complex(1.0);
    z.engine = "andreief";
    z.N = N;
    z.n = d.n;
    z.m = d.m;
    z.deform_fingerprint = deform_fingerprint(d);
    return z;
  }
  const auto w = bimoment_window(spec, andreief_rect(N, d.n, d.m), d, quad);
  auto z = andreief_Z(w, N, d.n, d.m);
  z.deform_fingerprint = deform_fingerprint(d);
  return z;
}

// ---------------------------------------------------------------------------
// Direct quadrature

/// The 2N-fold integral of Delta_N(x) Delta_N(y) prod_i x_i^n y_i^m dmu_t on
/// the tensor grid of the measure's pair rule, certified by point doubling.
inline ZResult direct_Z(const MeasureSpec& spec, const DeformationParams& d, int N, const QuadratureSpec& quad_in = {}) {
  ZResult z;
  z.engine = "direct";
  z.N = N;
  z.n = d.n;
  z.m = d.m;
  z.deform_fingerprint = deform_fingerprint(d);
  if (N < 0) return z;
  if (N == 0) {
    z.value = 1.0;
    return z;
  }
  if (N > 2) fail(ErrorCode::NUnsupported, "direct_Z supports N = 1, 2; use permutation_Z or andreief_Z for N >= 3");
  validate_deformation(spec, d);
  QuadratureSpec quad = resolved(quad_in, spec);
  // q^{4} work per evaluation at N = 2
  if (N == 2 && quad_in.max_points <= 0) quad.max_points = std::min(quad.max_points, 192);

  auto evaluate = [&](int q, double& abs_sum) {
    const PairRule rule = build_pair_rule(spec, d, q);
    std::vector<Complex> u;
    u.reserve(rule.nodes.size());
    for (const auto& node : rule.nodes) u.push_back(node.w * int_power(node.x, d.n) * int_power(node.y, d.m));
    Complex total(0.0);
    abs_sum = 0.0;
    if (N == 1) {
      for (const auto& v : u) {
        total += v;
        abs_sum += std::abs(v);
      }
      return total;
    }
    const std::size_t M = u.size();
    for (std::size_t a = 0; a < M; ++a) {
      if (u[a] == Complex(0.0)) continue;
      Complex row(0.0);
      double row_abs = 0.0;
      for (std::size_t b = a + 1; b < M; ++b) {
        const Complex term = u[b] * (rule.nodes[a].x - rule.nodes[b].x) * (rule.nodes[a].y - rule.nodes[b].y);
        row += term;
        row_abs += std::abs(term);
      }
      total += u[a] * row;
      abs_sum += std::abs(u[a]) * row_abs;
    }
    abs_sum *= 2.0;
    return 2.0 * total;
  };

  int q = quad.points;
  double abs_coarse = 0.0;
  Complex coarse = evaluate(q, abs_coarse);
  if (!quad.certify) {
    z.value = coarse;
    z.points = q;
    return z;
  }
  while (true) {
    const int q2 = 2 * q;
    if (q2 > quad.max_points)
      fail(ErrorCode::QuadratureNotConverged, "direct_Z not certified within " + std::to_string(quad.max_points) + " points");
    double abs_fine = 0.0;
    const Complex fine = evaluate(q2, abs_fine);
    const double diff = std::abs(fine - coarse);
    if (diff <= std::max(quad.target * std::abs(fine), 100.0 * DBL_EPSILON * abs_fine)) {
      z.value = fine;
      z.points = q2;
      z.error_estimate = diff;
      return z;
    }
    q = q2;
    coarse = fine;
  }
}

// ---------------------------------------------------------------------------
// Coefficient determinants

/// Row labels n + h_i (+ side) or n + N - 1 - h_i (- side), and likewise for
/// columns; the mixed variants carry (-1)^{N(N-1)/2}.
inline std::pair<std::vector<int>, std::vector<int>> g_indices(Variant v, const Partition& lambda, const Partition& mu,
                                                               int N, int n, int m) {
  const auto h = shifted_labels(lambda, N);
  const auto hp = shifted_labels(mu, N);
  const bool row_plus = v == Variant::PP || v == Variant::PM;
  const bool col_plus = v == Variant::PP || v == Variant::MP;
  std::vector<int> rows(N), cols(N);
  for (int i = 0; i < N; ++i) {
    rows[i] = row_plus ? n + h[i] : n + N - 1 - h[i];
    cols[i] = col_plus ? m + hp[i] : m + N - 1 - hp[i];
  }
  return {rows, cols};
}

template <typename T>
Matrix<T> g_matrix(Variant v, const Partition& lambda, const Partition& mu, int N, int n, int m,
                   const BimomentWindowT<T>& w) {
  const auto [rows, cols] = g_indices(v, lambda, mu, N, n, m);
  Matrix<T> a(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) a(i, j) = w.at(rows[i], cols[j]);
  return a;
}

/// g^{variant}_{lambda mu}; the window must carry the coefficient-side
/// deformation of the variant.
template <typename T>
T g_value(Variant v, const Partition& lambda, const Partition& mu, int N, int n, int m, const BimomentWindowT<T>& w) {
  if (N == 0) return one<T>();
  T det = determinant(g_matrix(v, lambda, mu, N, n, m, w));
  if (v == Variant::PM || v == Variant::MP) det = sign_power<T>(static_cast<long>(N) * (N - 1) / 2) * det;
  return det;
}

template <typename T>
T g_pp(const Partition& l, const Partition& mu, int N, int n, int m, const BimomentWindowT<T>& w) {
  return g_value(Variant::PP, l, mu, N, n, m, w);
}
template <typename T>
T g_mm(const Partition& l, const Partition& mu, int N, int n, int m, const BimomentWindowT<T>& w) {
  return g_value(Variant::MM, l, mu, N, n, m, w);
}
template <typename T>
T g_pm(const Partition& l, const Partition& mu, int N, int n, int m, const BimomentWindowT<T>& w) {
  return g_value(Variant::PM, l, mu, N, n, m, w);
}
template <typename T>
T g_mp(const Partition& l, const Partition& mu, int N, int n, int m, const BimomentWindowT<T>& w) {
  return g_value(Variant::MP, l, mu, N, n, m, w);
}

/// Which of the four time sequences sit in the Schur factors of a variant;
/// the other two deform the bimoments.
struct VariantSlots {
  CTimes lambda_times, mu_times;
  DeformationParams coefficient_deform;
};

inline VariantSlots variant_slots(Variant v, const DeformationParams& d) {
  switch (v) {
    case Variant::PP: return {d.t1, d.t2, d.restricted(false, false, true, true)};
    case Variant::MM: return {d.tb1, d.tb2, d.restricted(true, true, false, false)};
    case Variant::PM: return {d.t1, d.tb2, d.restricted(false, true, true, false)};
    case Variant::MP: return {d.tb1, d.t2, d.restricted(true, false, false, true)};
  }
  fail(ErrorCode::InvalidArgument, "unknown variant");
}

struct SeriesResult {
  ZResult z;
  CoefficientTable table;
};

namespace detail {

inline SeriesResult trivial_series(const char* engine, const std::string& kind, const DeformationParams& d, int N, int trunc) {
  SeriesResult r;
  r.z.engine = engine;
  r.z.N = N;
  r.z.n = d.n;
  r.z.m = d.m;
  r.z.truncation = trunc;
  r.z.deform_fingerprint = deform_fingerprint(d);
  r.z.value = N < 0 ? Complex(0.0) : Complex(1.0);
  r.table.kind = kind;
  return r;
}

inline void check_truncation(const ZResult& z, double tol) {
  if (tol > 0.0 && z.error_estimate > tol * std::abs(z.value))
    fail(ErrorCode::TruncationNotConverged, "last series shell " + std::to_string(z.error_estimate) +
                                                " exceeds tolerance relative to |Z| = " + std::to_string(std::abs(z.value)));
}

inline std::vector<Complex> schur_values(const std::vector<Partition>& ps, const CTimes& t, int max_index) {
  SchurEvaluator<Complex> ev(t, max_index);
  std::vector<Complex> out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.push_back(ev(p));
  return out;
}

}  // namespace detail

/// N! sum_{|lambda|,|mu| <= d, l <= N} g^{variant}_{lambda mu} s_lambda s_mu,
/// summed in shells of |lambda| + |mu|. The error estimate is the total of the
/// terms with |lambda| = d or |mu| = d. A zero series-side sequence pins its
/// partition to the empty one. tol > 0 turns a large last shell into an error.
inline SeriesResult double_series_Z(Variant v, const MeasureSpec& spec, const DeformationParams& d, int N, int trunc,
                                    const QuadratureSpec& quad = {}, double tol = 0.0) {
  const std::string kind = variant_name(v);
  if (trunc < 0) fail(ErrorCode::InvalidArgument, "truncation degree must be >= 0");
  validate_deformation(spec, d);
  if (N <= 0) return detail::trivial_series("double_series", kind, d, N, trunc);
  const auto slots = variant_slots(v, d);
  const int dl = slots.lambda_times.is_zero() ? 0 : trunc;
  const int dm = slots.mu_times.is_zero() ? 0 : trunc;
  const bool row_plus = v == Variant::PP || v == Variant::PM;
  const bool col_plus = v == Variant::PP || v == Variant::MP;
  IndexRect rect;
  rect.i_lo = row_plus ? d.n : d.n - dl;
  rect.i_hi = row_plus ? d.n + dl + N - 1 : d.n + N - 1;
  rect.k_lo = col_plus ? d.m : d.m - dm;
  rect.k_hi = col_plus ? d.m + dm + N - 1 : d.m + N - 1;
  const auto w = bimoment_window(spec, rect, slots.coefficient_deform, quad);

  const auto lambdas = enumerate_partitions(dl, N);
  const auto mus = enumerate_partitions(dm, N);
  const auto sl = detail::schur_values(lambdas, slots.lambda_times, dl + N + 1);
  const auto sm = detail::schur_values(mus, slots.mu_times, dm + N + 1);
  const Complex nfact = detail::factorial_scalar<Complex>(N);

  SeriesResult r;
  r.table.kind = kind;
  r.table.window_provenance = {{"method", w.provenance}, {"points", w.points}, {"rect", {rect.i_lo, rect.i_hi, rect.k_lo, rect.k_hi}}};
  Complex total(0.0), last(0.0);
  for (int shell = 0; shell <= dl + dm; ++shell)
    for (std::size_t a = 0; a < lambdas.size(); ++a) {
      const int wl = lambdas[a].weight();
      if (wl > shell) break;
      for (std::size_t b = 0; b < mus.size(); ++b) {
        if (mus[b].weight() != shell - wl) continue;
        const Complex s = sl[a] * sm[b];
        if (s == Complex(0.0)) continue;
        const Complex g = g_value(v, lambdas[a], mus[b], N, d.n, d.m, w);
        r.table.entries.push_back({{lambdas[a], mus[b]}, g});
        const Complex term = nfact * g * s;
        total += term;
        if ((dl > 0 && wl == dl) || (dm > 0 && mus[b].weight() == dm)) last += term;
      }
    }
  r.z.value = total;
  r.z.engine = "double_series";
  r.z.N = N;
  r.z.n = d.n;
  r.z.m = d.m;
  r.z.truncation = trunc;
  r.z.points = w.points;
  r.z.deform_fingerprint = deform_fingerprint(d);
  r.z.error_estimate = std::abs(last);
  detail::check_truncation(r.z, tol);
  return r;
}

// ---------------------------------------------------------------------------
// Quadruple series

namespace detail {

inline std::vector<std::pair<Partition, long>> lr_terms(const Partition& a, const Partition& b, int N) {
  std::vector<std::pair<Partition, long>> out;
  for (const auto& [alpha, c] : schur_product(a, b))
    if (alpha.length() <= N && c != 0) out.emplace_back(alpha, c);
  return out;
}

// l_i = alpha_i - i + N - nu_1.
inline std::vector<int> quadruple_labels(const Partition& alpha, int nu1, int N) {
  std::vector<int> l(N);
  for (int i = 1; i <= N; ++i) l[i - 1] = alpha.part(i) - i + N - nu1;
  return l;
}

}  // namespace detail

/// I_{lambda mu nu eta} = sum_{alpha, beta} c^alpha_{lambda nu~} c^beta_{mu eta~}
/// N! det(B_{l_i + n, l'_j + m}) on an undeformed window.
template <typename T>
T quadruple_I(const Partition& lambda, const Partition& mu, const Partition& nu, const Partition& eta, int N, int n, int m,
              const BimomentWindowT<T>& w) {
  if (N == 0) return one<T>();
  if (lambda.length() > N || mu.length() > N)
    fail(ErrorCode::LengthExceedsN, "quadruple_I needs partitions of length <= N");
  const auto as = detail::lr_terms(lambda, tilde_transform(nu, N), N);
  const auto bs = detail::lr_terms(mu, tilde_transform(eta, N), N);
  const T nfact = detail::factorial_scalar<T>(N);
  T total = zero<T>();
  for (const auto& [alpha, ca] : as) {
    const auto l = detail::quadruple_labels(alpha, nu.part(1), N);
    for (const auto& [beta, cb] : bs) {
      const auto lp = detail::quadruple_labels(beta, eta.part(1), N);
      Matrix<T> a(N, N);
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) a(i, j) = w.at(l[i] + n, lp[j] + m);
      total = total + from_int<T>(ca * cb) * nfact * determinant(a);
    }
  }
  return total;
}

/// Sum over |lambda|, |mu|, |nu|, |eta| <= d of I s_lambda(t1) s_mu(t2)
/// s_nu(tb1) s_eta(tb2), in shells of total weight.
inline SeriesResult quadruple_series_Z(const MeasureSpec& spec, const DeformationParams& d, int N, int trunc,
                                       const QuadratureSpec& quad = {}, double tol = 0.0) {
  if (trunc < 0) fail(ErrorCode::InvalidArgument, "truncation degree must be >= 0");
  validate_deformation(spec, d);
  if (N <= 0) return detail::trivial_series("quadruple_series", "quadruple", d, N, trunc);
  const int dl = d.t1.is_zero() ? 0 : trunc, dm = d.t2.is_zero() ? 0 : trunc;
  const int dn = d.tb1.is_zero() ? 0 : trunc, de = d.tb2.is_zero() ? 0 : trunc;
  // l_1 <= lambda_1 + N - 1 - nu_N and l_N >= -nu_1
  const IndexRect rect{d.n - dn, d.n + dl + N - 1, d.m - de, d.m + dm + N - 1};
  const DeformationParams none{};
  const auto w = bimoment_window(spec, rect, none, quad);

  const auto L = enumerate_partitions(dl, N), M = enumerate_partitions(dm, N);
  const auto V = enumerate_partitions(dn, N), E = enumerate_partitions(de, N);
  const auto sL = detail::schur_values(L, d.t1, dl + N + 1), sM = detail::schur_values(M, d.t2, dm + N + 1);
  const auto sV = detail::schur_values(V, d.tb1, dn + N + 1), sE = detail::schur_values(E, d.tb2, de + N + 1);

  SeriesResult r;
  r.table.kind = "quadruple";
  r.table.window_provenance = {{"method", w.provenance}, {"points", w.points}, {"rect", {rect.i_lo, rect.i_hi, rect.k_lo, rect.k_hi}}};
  Complex total(0.0), last(0.0);
  auto on_edge = [&](int weight, int dmax) { return dmax > 0 && weight == dmax; };
  for (int shell = 0; shell <= dl + dm + dn + de; ++shell)
    for (std::size_t a = 0; a < L.size(); ++a)
      for (std::size_t b = 0; b < M.size(); ++b)
        for (std::size_t c = 0; c < V.size(); ++c) {
          const int partial = L[a].weight() + M[b].weight() + V[c].weight();
          if (partial > shell) continue;
          for (std::size_t e = 0; e < E.size(); ++e) {
            if (E[e].weight() != shell - partial) continue;
            const Complex s = sL[a] * sM[b] * sV[c] * sE[e];
            if (s == Complex(0.0)) continue;
            const Complex I = quadruple_I(L[a], M[b], V[c], E[e], N, d.n, d.m, w);
            r.table.entries.push_back({{L[a], M[b], V[c], E[e]}, I});
            total += I * s;
            if (on_edge(L[a].weight(), dl) || on_edge(M[b].weight(), dm) || on_edge(V[c].weight(), dn) ||
                on_edge(E[e].weight(), de))
              last += I * s;
          }
        }
  r.z.value = total;
  r.z.engine = "quadruple_series";
  r.z.N = N;
  r.z.n = d.n;
  r.z.m = d.m;
  r.z.truncation = trunc;
  r.z.points = w.points;
  r.z.deform_fingerprint = deform_fingerprint(d);
  r.z.error_estimate = std::abs(last);
  detail::check_truncation(r.z, tol);
  return r;
}

// ---------------------------------------------------------------------------
// Tau function normalization

/// (1/N!) (-1)^{N(N+1)/2 + m N} c(t, tbar) Z_N.
inline Complex tau_from_Z(Complex Z, int N, const DeformationParams& d) {
  if (N < 0) return 0.0;
  if (N == 0) return tau_normalization(d);
  const long e = static_cast<long>(N) * (N + 1) / 2 + static_cast<long>(d.m) * N;
  return sign_power<double>(e) * tau_normalization(d) * Z / detail::factorial_scalar<double>(N);
}

enum class TauRoute { Andreief, SeriesPP };

/// tau_value through the fully deformed window (Andreief) or the ++ double
/// series with truncation d.
inline Complex tau_value(const MeasureSpec& spec, const DeformationParams& d, int N, TauRoute route = TauRoute::Andreief,
                         int trunc = 8, const QuadratureSpec& quad = {}) {
  if (N == 0) return tau_normalization(d);
  const Complex Z = route == TauRoute::Andreief ? andreief_Z(spec, d, N, quad).value
                                                : double_series_Z(Variant::PP, spec, d, N, trunc, quad).z.value;
  return tau_from_Z(Z, N, d);
}

/// (1/N!) of the integrated two-component fermion expectation
/// <N+n, -N-m| prod_i psi1(x_i) psib2(y_i) |n, -m> over an undeformed window:
/// each monomial prod x_i^{a_i} y_i^{b_i} integrates to prod_i B_{a_i b_i}.
inline Complex tau_fermionic(const BimomentWindow& w, int N, int n, int m) {
  if (N < 0) return 0.0;
  if (N == 0) return 1.0;
  const Polynomial vev = fermion::vandermonde_vev(N, n, m);
  Complex total(0.0);
  for (const auto& [mono, coeff] : vev.terms()) {
    std::vector<int> a(N, 0), b(N, 0);
    for (const auto& [id, e] : mono) {
      const int idx = id % 1000;
      if (id / 1000 == static_cast<int>(VarFamily::X)) a[idx - 1] = e;
      else b[idx - 1] = e;
    }
    Complex prod = coeff.get_d();
    for (int i = 0; i < N; ++i) prod *= w.at(a[i], b[i]);
    total += prod;
  }
  return total / detail::factorial_scalar<double>(N);
}

// ---------------------------------------------------------------------------
// Model reductions

/// N! pi^N sum_{|lambda| <= d} prod_i M(lambda_i - i + n + N) s_lambda(t1)
/// s_{lambda + n - m}(t2) for the radial planar measure, where lambda + n - m
/// shifts all N parts and M(j) = int_0^inf e^{calV(X)} X^j dX.
inline ZResult radial_series_Z(const RadialPlanar& spec, int n, int m, const CTimes& t1, const CTimes& t2, int N, int trunc,
                               double tol = 0.0) {
  DeformationParams d;
  d.t1 = t1;
  d.t2 = t2;
  d.n = n;
  d.m = m;
  validate_deformation(MeasureSpec(spec), d);
  ZResult z;
  z.engine = "radial_series";
  z.N = N;
  z.n = n;
  z.m = m;
  z.truncation = trunc;
  z.deform_fingerprint = deform_fingerprint(d);
  if (N < 0) return z;
  if (N == 0) {
    z.value = 1.0;
    return z;
  }
  const int dl = t1.is_zero() ? 0 : trunc, dm = t2.is_zero() ? 0 : trunc;
  const auto lambdas = enumerate_partitions(dl, N);
  SchurEvaluator<Complex> s1(t1, dl + N + 1), s2(t2, dm + N + 1 + std::abs(n - m) * N);
  const double pre = detail::factorial_scalar<double>(N) * std::pow(std::numbers::pi, N);
  std::map<int, double> moments;
  auto moment = [&](int j) {
    auto it = moments.find(j);
    if (it == moments.end()) it = moments.emplace(j, radial_moment(spec, j)).first;
    return it->second;
  };
  Complex total(0.0), last(0.0);
  for (const auto& lambda : lambdas) {
    std::vector<int> mu_parts(N);
    bool ok = true;
    for (int i = 1; i <= N; ++i) {
      mu_parts[i - 1] = lambda.part(i) + n - m;
      if (mu_parts[i - 1] < 0) ok = false;
    }
    if (!ok) continue;
    const Partition mu(mu_parts);
    if (mu.weight() > dm) continue;
    const Complex s = s1(lambda) * s2(mu);
    if (s == Complex(0.0)) continue;
    double g = pre;
    for (int i = 1; i <= N; ++i) g *= moment(lambda.part(i) - i + n + N);
    total += g * s;
    if ((dl > 0 && lambda.weight() == dl) || (dm > 0 && mu.weight() == dm)) last += g * s;
  }
  z.value = total;
  z.error_estimate = std::abs(last);
  detail::check_truncation(z, tol);
  return z;
}

/// Both sides of sum_lambda r_lambda(N) s_lambda(X) s_lambda(Y) =
/// C_{N,r} det(tau_r(1, x_i y_j)) / (Delta(x) Delta(y)).
struct KernelCheck {
  double series = 0.0;
  double kernel = 0.0;
  double residual = 0.0;
};

/// tau_r(1, z) = 1 + sum_k r(1)...r(k) z^k, summed until the terms die out.
inline double content_kernel(const ContentFunction<double>& r, double z) {
  double total = 1.0, coeff = 1.0;
  for (int k = 1; k <= 2000; ++k) {
    const auto rk = r(k);
    if (!rk) fail(ErrorCode::SingularContent, "r(" + std::to_string(k) + ") is undefined");
    coeff *= *rk;
    if (coeff == 0.0) return total;
    const double term = coeff * std::pow(z, k);
    total += term;
    if (k > 8 && std::abs(term) < 1e-18 * std::max(1.0, std::abs(total))) return total;
  }
  fail(ErrorCode::Divergent, "content kernel series does not converge at this argument");
}

/// C_{N,r} det(tau_r(1, x_i y_j)) / (Delta(x) Delta(y)) with
/// C_{N,r} = 1 / prod_{k=1}^{N-1} prod_{j=1}^k r(j).
inline double kernel_side(const ContentFunction<double>& r, std::span<const double> x, std::span<const double> y) {
  const int N = static_cast<int>(x.size());
  if (static_cast<int>(y.size()) != N) fail(ErrorCode::InvalidArgument, "x and y need the same length");
  double c = 1.0, p = 1.0;
  for (int k = 1; k <= N - 1; ++k) {
    const auto rk = r(k);
    if (!rk) fail(ErrorCode::SingularContent, "r(" + std::to_string(k) + ") is undefined");
    p *= *rk;
    c *= p;
  }
  if (c == 0.0) fail(ErrorCode::SingularContent, "C_{N,r} is infinite: some r(j) with j < N vanishes");
  Matrix<double> a(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) a(i, j) = content_kernel(r, x[i] * y[j]);
  const double dx = vandermonde(x), dy = vandermonde(y);
  if (dx == 0.0 || dy == 0.0) fail(ErrorCode::RepeatedVariable, "kernel side needs distinct variables");
  return determinant(a) / (c * dx * dy);
}

inline KernelCheck coupling_kernel_check(const ContentFunction<double>& r, int N, std::span<const double> x,
                                         std::span<const double> y, int trunc) {
  if (static_cast<int>(x.size()) != N || static_cast<int>(y.size()) != N)
    fail(ErrorCode::InvalidArgument, "need N values of x and of y");
  KernelCheck k;
  for (const auto& lambda : enumerate_partitions(trunc, N))
    k.series += content_product(lambda, N, r) * schur_bialternant(lambda, x) * schur_bialternant(lambda, y);
  k.kernel = kernel_side(r, x, y);
  k.residual = std::abs(k.series - k.kernel);
  return k;
}

/// Contour-polynomial measure split into its leading terms and the time
/// deformation t_k = -u_k / k, t'_k = -v_k / k carried by the lower ones.
inline std::pair<ContourPolynomial, DeformationParams> split_potential(const ContourPolynomial& full) {
  ContourPolynomial base = full;
  DeformationParams d;
  const int lu = detail::leading_degree(full.u), lv = detail::leading_degree(full.v);
  std::vector<Complex> t1, t2;
  for (int i = 0; i < lu; ++i) {
    t1.push_back(-full.u[i] / static_cast<double>(i + 1));
    base.u[i] = 0.0;
  }
  for (int i = 0; i < lv; ++i) {
    t2.push_back(-full.v[i] / static_cast<double>(i + 1));
    base.v[i] = 0.0;
  }
  d.t1 = CTimes(t1);
  d.t2 = CTimes(t2);
  return {base, d};
}

}  // namespace zn2mm
