#pragma once

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "engines.hpp"
#include "fermion.hpp"
#include "littlewood_richardson.hpp"
#include "schur.hpp"

namespace zn2mm::verify {

/// One identity check with its outcome and a short numeric summary.
struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Report {
  std::vector<Check> checks;
  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
  void append(const Report& o) { checks.insert(checks.end(), o.checks.begin(), o.checks.end()); }
};

namespace detail {

inline std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

inline std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// Runs body, timing it; errors become failures with the message as detail.
inline Check timed(const std::string& name, const std::function<void(Check&)>& body) {
  Check c;
  c.name = name;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const Error& e) {
    c.passed = false;
    c.detail = std::string(error_name(e.code())) + ": " + e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return c;
}

inline double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline DeformationParams times(std::vector<double> t1, std::vector<double> t2, std::vector<double> tb1 = {},
                               std::vector<double> tb2 = {}) {
  auto seq = [](const std::vector<double>& v) { return CTimes(std::vector<Complex>(v.begin(), v.end())); };
  DeformationParams d;
  d.t1 = seq(t1);
  d.t2 = seq(t2);
  d.tb1 = seq(tb1);
  d.tb2 = seq(tb2);
  return d;
}

}  // namespace detail

/// exp(0.3x + 0.2/x) exp(0.25y + 0.1/y) e^{1/(xy)} on the unit torus, the
/// reference circle measure of the suites.
inline MeasureSpec reference_circle() {
  return measure_from_json({{"kind", "circle_product"},
                            {"w1", {{"pos", {0.3}}, {"neg", {0.2}}}},
                            {"w2", {{"pos", {0.25}}, {"neg", {0.1}}}},
                            {"kernel", {{"type", "exponential"}, {"scale", 1.0}}}});
}

// ---------------------------------------------------------------------------
// Symmetric functions

inline Check cauchy_identity(int d) {
  return detail::timed("cauchy_truncated d<=" + std::to_string(d), [&](Check& c) {
    c.passed = true;
    for (int k = 0; k <= d; ++k) {
      const auto [l, r] = cauchy_truncated(TimeSequence<Polynomial>::formal(VarFamily::T, k),
                                           TimeSequence<Polynomial>::formal(VarFamily::T1, k), k);
      if (l != r) {
        c.passed = false;
        c.detail = "mismatch at d=" + std::to_string(k);
        return;
      }
    }
    c.detail = "exact";
  });
}

inline Check bialternant_vs_jacobi_trudy(int weight, int max_N) {
  return detail::timed("bialternant = Jacobi-Trudy |lambda|<=" + std::to_string(weight) + " N<=" + std::to_string(max_N),
                       [&](Check& c) {
                         std::mt19937 rng(11);
                         std::uniform_int_distribution<int> num(-9, 9), den(1, 7);
                         long count = 0;
                         for (int N = 1; N <= max_N; ++N) {
                           std::vector<Rational> x;
                           while (static_cast<int>(x.size()) < N) {
                             Rational v = make_rational(num(rng), den(rng));
                             if (std::find(x.begin(), x.end(), v) == x.end()) x.push_back(v);
                           }
                           const auto px = power_sum_times<Rational>(x, weight);
                           for (const auto& lambda : enumerate_partitions(weight, N)) {
                             ++count;
                             if (schur_bialternant<Rational>(lambda, x) != schur_in_times(lambda, px)) {
                               c.detail = "mismatch at " + lambda.str();
                               return;
                             }
                           }
                         }
                         c.passed = true;
                         c.detail = std::to_string(count) + " partitions exact";
                       });
}

inline Check transpose_sign(int weight) {
  return detail::timed("transpose sign |lambda|<=" + std::to_string(weight), [&](Check& c) {
    const auto ft = TimeSequence<Polynomial>::formal(VarFamily::T, weight);
    for (const auto& lambda : enumerate_partitions(weight, weight))
      if (!transpose_sign_check(lambda, ft)) {
        c.detail = "fails at " + lambda.str();
        return;
      }
    c.passed = true;
    c.detail = "exact";
  });
}

/// LR coefficients against the symbolic product s_lambda(t) s_mu(t) expanded
/// in Schur functions of formal times.
inline Check littlewood_richardson(int total) {
  return detail::timed("Littlewood-Richardson |lambda|+|mu|<=" + std::to_string(total), [&](Check& c) {
    const auto ft = TimeSequence<Polynomial>::formal(VarFamily::T, total);
    std::map<Partition, Polynomial> s;
    for (const auto& p : enumerate_partitions(total, total)) s.emplace(p, schur_in_times(p, ft));
    long pairs = 0;
    for (const auto& l : enumerate_partitions(total, total))
      for (const auto& m : enumerate_partitions(total - l.weight(), total)) {
        if (m > l) continue;  // symmetric in lambda, mu
        ++pairs;
        Polynomial rhs;
        for (const auto& [alpha, coeff] : schur_product(l, m)) rhs += s.at(alpha).scaled(Rational(coeff));
        if (s.at(l) * s.at(m) != rhs) {
          c.detail = "expansion fails for " + l.str() + " x " + m.str();
          return;
        }
      }
    const long c321 = lr_coefficient(Partition{2, 1}, Partition{2, 1}, Partition{3, 2, 1});
    c.passed = c321 == 2;
    c.detail = std::to_string(pairs) + " products exact; c^(3,2,1)_(2,1),(2,1) = " + std::to_string(c321);
  });
}

inline Report schur_suite(int budget = 6) {
  Report r;
  r.checks.push_back(cauchy_identity(budget));
  r.checks.push_back(bialternant_vs_jacobi_trudy(budget, 4));
  r.checks.push_back(transpose_sign(budget));
  r.checks.push_back(littlewood_richardson(budget + 2));
  return r;
}

// ---------------------------------------------------------------------------
// Fermions

/// The four one-component Schur expectation identities.
inline Check schur_vev_identities(int max_N, int weight) {
  return detail::timed("one-component Schur expectations N<=" + std::to_string(max_N) + " |lambda|<=" + std::to_string(weight),
                       [&](Check& c) {
                         const auto t = TimeSequence<Polynomial>::formal(VarFamily::T, weight);
                         const auto tb = TimeSequence<Polynomial>::formal(VarFamily::TBar1, weight);
                         long count = 0;
                         for (int N = 0; N <= max_N; ++N)
                           for (const auto& lambda : enumerate_partitions(weight, N)) {
                             const Polynomial sign(sign_power<long>(static_cast<long>(N) * (N - 1) / 2));
                             const Polynomial sb = schur_in_times(lambda, tb);
                             const bool ok = fermion::schur_vev_creation(lambda, N, t) == schur_in_times(lambda, t) &&
                                             fermion::schur_vev_annihilation(lambda, N, t) == schur_in_times(lambda, -t) &&
                                             fermion::schur_vev_creation_bar(lambda, N, tb) == sign * sb &&
                                             fermion::schur_vev_annihilation_bar(lambda, N, tb) == sign * sb;
                             count += 4;
                             if (!ok) {
                               c.detail = "mismatch at " + lambda.str() + " N=" + std::to_string(N);
                               return;
                             }
                           }
                         c.passed = true;
                         c.detail = std::to_string(count) + " identities exact";
                       });
}

/// Two-component expectations equal signed products s_lambda s_mu.
inline Check schur_product_identities(int max_N, int weight) {
  return detail::timed("two-component Schur products N<=" + std::to_string(max_N) + " |lambda|,|mu|<=" + std::to_string(weight),
                       [&](Check& c) {
                         const auto t1 = TimeSequence<Polynomial>::formal(VarFamily::T1, weight);
                         const auto t2 = TimeSequence<Polynomial>::formal(VarFamily::T2, weight);
                         const auto tb1 = TimeSequence<Polynomial>::formal(VarFamily::TBar1, weight);
                         const auto tb2 = TimeSequence<Polynomial>::formal(VarFamily::TBar2, weight);
                         long count = 0;
                         for (auto v : {Variant::PP, Variant::MM, Variant::PM, Variant::MP}) {
                           const auto& a = (v == Variant::PP || v == Variant::PM) ? t1 : tb1;
                           const auto& b = (v == Variant::PP || v == Variant::MP) ? t2 : tb2;
                           for (int N = 0; N <= max_N; ++N) {
                             const auto parts = enumerate_partitions(weight, N);
                             std::vector<Polynomial> sa, sb;
                             for (const auto& p : parts) {
                               sa.push_back(schur_in_times(p, a));
                               sb.push_back(schur_in_times(p, b));
                             }
                             const Polynomial sign(fermion::schur_product_sign(v, N));
                             for (std::size_t i = 0; i < parts.size(); ++i)
                               for (std::size_t j = 0; j < parts.size(); ++j) {
                                 ++count;
                                 if (fermion::schur_product_vev(v, parts[i], parts[j], N, a, b) != sign * sa[i] * sb[j]) {
                                   c.detail = variant_name(v) + " fails at " + parts[i].str() + ", " + parts[j].str();
                                   return;
                                 }
                               }
                           }
                         }
                         c.passed = true;
                         c.detail = std::to_string(count) + " expectations exact (signs (-1)^{N(N+1)/2}, (-1)^N)";
                       });
}

/// <N+n,-N-m| prod psi(x_i) psibar(y_i) |n,-m> = (-1)^{N(N+1)/2} Delta Delta prod x^n (-y)^m.
inline Check vacuum_monomial_identity(int max_N, int max_nm) {
  return detail::timed("two-component Vandermonde expectation N<=" + std::to_string(max_N) + " |n|,|m|<=" + std::to_string(max_nm),
                       [&](Check& c) {
                         for (int N = 0; N <= max_N; ++N)
                           for (int n = -max_nm; n <= max_nm; ++n)
                             for (int m = -max_nm; m <= max_nm; ++m)
                               if (fermion::vandermonde_vev(N, n, m) != fermion::vandermonde_vev_expected(N, n, m)) {
                                 c.detail = "fails at N=" + std::to_string(N) + " n=" + std::to_string(n) + " m=" + std::to_string(m);
                                 return;
                               }
                         c.passed = true;
                         c.detail = "exact";
                       });
}

inline Check wick_identity(int max_N) {
  return detail::timed("Wick determinant N<=" + std::to_string(max_N), [&](Check& c) {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> coeff(-4, 4);
    for (int N = 1; N <= max_N; ++N)
      for (int trial = 0; trial < 3; ++trial) {
        std::vector<fermion::FermionOp<Rational>> w, wb;
        for (int i = 0; i < N; ++i) {
          fermion::FermionOp<Rational> a{false, {}}, b{true, {}};
          for (int k = -3; k <= 3; ++k) {
            a.terms.push_back({k, Rational(coeff(rng))});
            b.terms.push_back({k, Rational(coeff(rng))});
          }
          w.push_back(a);
          wb.push_back(b);
        }
        if (!fermion::wick_determinant_check(w, wb)) {
          c.detail = "fails at N=" + std::to_string(N);
          return;
        }
      }
    c.passed = true;
    c.detail = "exact";
  });
}

inline Report fermion_suite(int max_N = 3, int weight = 5) {
  Report r;
  r.checks.push_back(schur_vev_identities(max_N, weight));
  r.checks.push_back(schur_product_identities(max_N, weight));
  r.checks.push_back(vacuum_monomial_identity(max_N, 2));
  r.checks.push_back(wick_identity(max_N));
  return r;
}

// ---------------------------------------------------------------------------
// Engines

/// direct, permutation and Andreief Z for the Gaussian at c = 0.5, N = 1, 2,
/// against 2 pi / sqrt(1-c^2) and 8 pi^2 c / (1-c^2)^2.
inline Check gaussian_cross_engine(double tol = 1e-8) {
  return detail::timed("gaussian c=0.5 cross-engine N=1,2", [&](Check& c) {
    const MeasureSpec s = GaussianCoupled{0.5, {}, {}};
    const double cc = 0.5;
    const double exact[3] = {1.0, 2 * std::numbers::pi / std::sqrt(1 - cc * cc),
                             8 * std::numbers::pi * std::numbers::pi * cc / ((1 - cc * cc) * (1 - cc * cc))};
    const auto w = bimoment_window(s, andreief_rect(2, 0, 0), {});
    double worst = 0.0;
    for (int N = 1; N <= 2; ++N) {
      const Complex zd = direct_Z(s, {}, N).value;
      const Complex zp = permutation_Z(w, N, 0, 0).value;
      const Complex za = andreief_Z(w, N, 0, 0).value;
      worst = std::max({worst, detail::rel(zd, zp), detail::rel(zd, za), detail::rel(zp, za), detail::rel(zd, exact[N]),
                        detail::rel(zp, exact[N]), detail::rel(za, exact[N])});
    }
    c.passed = worst < tol;
    c.detail = detail::fmt("max relative deviation %.3g (Z2 = %.17g)", worst, exact[2]);
  });
}

/// Double series of each variant against the fully deformed Andreief value.
inline Check double_series_agreement(const MeasureSpec& s, const DeformationParams& d, std::vector<Variant> variants, int N,
                                     int trunc, double tol, const std::string& label) {
  return detail::timed(label, [&](Check& c) {
    const Complex ref = andreief_Z(s, d, N).value;
    double worst = 0.0;
    std::string parts;
    for (auto v : variants) {
      const double e = detail::rel(double_series_Z(v, s, d, N, trunc).z.value, ref);
      worst = std::max(worst, e);
      parts += " " + variant_name(v) + detail::fmt(":%.2g", e);
    }
    c.passed = worst < tol;
    c.detail = "relative deviation" + parts;
  });
}

inline Check quadruple_agreement(const MeasureSpec& s, const DeformationParams& d, int N, int trunc, double tol) {
  return detail::timed("quadruple series N=" + std::to_string(N) + " d=" + std::to_string(trunc), [&](Check& c) {
    const Complex ref = andreief_Z(s, d, N).value;
    const double e = detail::rel(quadruple_series_Z(s, d, N, trunc).z.value, ref);
    c.passed = e < tol;
    c.detail = detail::fmt("relative deviation %.3g", e);
  });
}

/// Kernel identity for r(j) = 1/j and constancy of the kernel side for
/// r(j) = z (a - N + j) / j with a = 0.
inline Check coupling_kernel_identity(double tol = 1e-10) {
  return detail::timed("character-coupling determinant N=2 d=12", [&](Check& c) {
    const ContentFunction<double> iz = [](int j) { return std::optional<double>(1.0 / j); };
    const std::vector<double> x{0.3, 0.1}, y{0.2, -0.1};
    const double residual = coupling_kernel_check(iz, 2, x, y, 12).residual;
    const double z = 0.7;
    const ContentFunction<double> r0 = [z](int j) { return std::optional<double>(z * (j - 2) / j); };
    const std::vector<std::vector<double>> pts{{0.3, 0.1}, {-0.5, 0.9}, {1.7, -0.4}};
    const std::vector<std::vector<double>> qts{{0.2, -0.1}, {0.6, 0.25}, {-1.1, 0.3}};
    const double base = kernel_side(r0, pts[0], qts[0]);
    double spread = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = 0; j < qts.size(); ++j) spread = std::max(spread, std::abs(kernel_side(r0, pts[i], qts[j]) - base));
    c.passed = residual < tol && spread < tol;
    c.detail = detail::fmt("residual %.3g, a=0 kernel spread %.3g", residual, spread);
  });
}

inline Check radial_reduction(double tol = 1e-6) {
  return detail::timed("radial series vs polar quadrature N=1 d=6", [&](Check& c) {
    const RadialPlanar lin{{0.0, -1.0}};
    double worst = 0.0;
    for (double t : {0.1, -0.1, 0.05}) {
      DeformationParams d;
      d.t1 = CTimes({t});
      d.t2 = CTimes({0.1 - t});
      const Complex series = radial_series_Z(lin, 0, 0, d.t1, d.t2, 1, 6).value;
      worst = std::max(worst, detail::rel(series, direct_Z(MeasureSpec(lin), d, 1).value));
    }
    c.passed = worst < tol;
    c.detail = detail::fmt("max relative deviation %.3g", worst);
  });
}

/// tau through the ++ series with the c(t, tbar) factor against the fully
/// deformed Andreief route, plus the integrated fermion expectation at t = 0.
inline Check tau_consistency(double tol = 1e-8) {
  return detail::timed("tau normalization N=1, k=1 times", [&](Check& c) {
    const auto s = reference_circle();
    double worst = 0.0;
    for (int m = 0; m <= 2; ++m) {
      DeformationParams d = detail::times({0.1}, {0.05}, {0.1}, {0.05});
      d.m = m;
      const Complex a = tau_value(s, d, 1, TauRoute::Andreief);
      const Complex b = tau_value(s, d, 1, TauRoute::SeriesPP, 10);
      worst = std::max(worst, detail::rel(b, a));
    }
    const auto w = bimoment_window(s, {0, 4, 0, 4}, {});
    double sign_dev = 0.0;
    for (int N = 1; N <= 2; ++N)
      for (int n = 0; n <= 2; ++n)
        for (int m = 0; m <= 2; ++m) {
          DeformationParams d;
          d.n = n;
          d.m = m;
          sign_dev = std::max(sign_dev, detail::rel(tau_fermionic(w, N, n, m), tau_from_Z(andreief_value(w, N, n, m), N, d)));
        }
    c.passed = worst < tol && sign_dev < 1e-12;
    c.detail = detail::fmt("series vs Andreief %.3g; fermion sign check %.3g", worst, sign_dev);
  });
}

inline Report engines_suite() {
  Report r;
  r.checks.push_back(gaussian_cross_engine());
  r.checks.push_back(double_series_agreement(GaussianCoupled{0.5, {}, {}}, detail::times({0.1}, {0.05}),
                                             {Variant::PP, Variant::MM, Variant::PM, Variant::MP}, 2, 8, 1e-6,
                                             "gaussian double series N=2 d=8"));
  r.checks.push_back(double_series_agreement(reference_circle(), detail::times({0.05}, {0.05}, {0.05}, {0.05}),
                                             {Variant::PP, Variant::MM, Variant::PM, Variant::MP}, 2, 8, 1e-6,
                                             "circle double series N=2 d=8"));
  r.checks.push_back(quadruple_agreement(reference_circle(), detail::times({0.05}, {0.05}, {0.05}, {0.05}), 1, 4, 1e-6));
  r.checks.push_back(coupling_kernel_identity());
  r.checks.push_back(radial_reduction());
  r.checks.push_back(tau_consistency());
  return r;
}

inline std::string format_check(const Check& c) {
  char buf[48];
  std::snprintf(buf, sizeof buf, " (%.2fs)", c.seconds);
  return std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": " + c.detail + buf;
}

}  // namespace zn2mm::verify
