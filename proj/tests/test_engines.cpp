#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "zn2mm/engines.hpp"

using namespace zn2mm;
using fixture::deform;
using fixture::rel;

namespace {

constexpr double pi = std::numbers::pi;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ConfigError;
}

// Exact window with B_ik = 1 / (i + k + 1) + (i - k)^2 / 7.
BimomentWindowT<Rational> rational_window(int size) {
  BimomentWindowT<Rational> w;
  w.rect = {0, size - 1, 0, size - 1};
  w.values = Matrix<Rational>(size, size);
  for (int i = 0; i < size; ++i)
    for (int k = 0; k < size; ++k) w.values(i, k) = make_rational(1, i + k + 1) + make_rational((i - k) * (i - k), 7);
  return w;
}

}  // namespace

TEST(Engines, GaussianCrossEngine) {
  const auto s = fixture::gaussian(0.5);
  const DeformationParams none;
  const double z1 = 2 * pi / std::sqrt(0.75), z2 = 8 * pi * pi * 0.5 / (0.75 * 0.75);
  const auto w = bimoment_window(s, {0, 3, 0, 3}, none);
  EXPECT_LT(rel(direct_Z(s, none, 1).value, z1), 1e-10);
  EXPECT_LT(rel(permutation_Z(w, 1, 0, 0).value, z1), 1e-10);
  EXPECT_LT(rel(andreief_Z(w, 1, 0, 0).value, z1), 1e-10);
  EXPECT_LT(rel(direct_Z(s, none, 2).value, z2), 1e-8);
  EXPECT_LT(rel(permutation_Z(w, 2, 0, 0).value, z2), 1e-10);
  EXPECT_LT(rel(andreief_Z(w, 2, 0, 0).value, z2), 1e-10);
  EXPECT_NEAR(z2, 70.18385, 1e-4);
  // 2 (B00 B11 - B10 B01) = 2 B00 B11 by parity
  EXPECT_LT(rel(permutation_Z(w, 2, 0, 0).value, 2.0 * w.at(0, 0) * w.at(1, 1)), 1e-12);
  // odd integrand
  EXPECT_LT(std::abs(direct_Z(s, deform({}, {}, {}, {}, 1, 0), 1).value), 1e-12);
  for (int N = 2; N <= 4; ++N)
    EXPECT_LT(rel(permutation_Z(w, N, 0, 0).value, andreief_Z(w, N, 0, 0).value), 1e-12) << N;
}

TEST(Engines, SmallNConventions) {
  const auto w = rational_window(4);
  EXPECT_EQ(andreief_value(w, 0, 1, 1), Rational(1));
  EXPECT_EQ(andreief_value(w, -1, 0, 0), Rational(0));
  EXPECT_EQ(permutation_value(w, 0, 0, 0), Rational(1));
  EXPECT_EQ(permutation_value(w, -2, 0, 0), Rational(0));
  EXPECT_EQ(andreief_value(w, 1, 2, 1), w.at(2, 1));
  EXPECT_EQ(permutation_value(w, 1, 2, 1), w.at(2, 1));
  EXPECT_EQ(direct_Z(fixture::gaussian(0.5), {}, 0).value, Complex(1.0));
  EXPECT_EQ(direct_Z(fixture::gaussian(0.5), {}, -1).value, Complex(0.0));
}

TEST(Engines, PermutationEqualsAndreiefExactly) {
  const auto w = rational_window(7);
  for (int N = 1; N <= 4; ++N)
    for (int n = 0; n + N <= 7 && n <= 2; ++n)
      for (int m = 0; m + N <= 7 && m <= 2; ++m) EXPECT_EQ(permutation_value(w, N, n, m), andreief_value(w, N, n, m));
}

TEST(Engines, ShiftIdentity) {
  const auto w = bimoment_window(fixture::gaussian(0.3), {0, 4, 0, 4}, {});
  BimomentWindow shifted = w;
  shifted.rect = {-1, 3, 0, 4};  // same values, rows relabelled down by one
  for (int N = 1; N <= 3; ++N) {
    EXPECT_EQ(andreief_Z(w, N, 1, 0).value, andreief_Z(shifted, N, 0, 0).value);
    EXPECT_EQ(andreief_Z(w, N, 1, 1).value, andreief_Z(shifted, N, 0, 1).value);
  }
}

TEST(Engines, GExamples) {
  const auto w = rational_window(6);
  for (int n = 0; n <= 2; ++n)
    for (int m = 0; m <= 2; ++m) {
      EXPECT_EQ(g_pp(Partition{}, Partition{}, 1, n, m, w), w.at(n, m));
      EXPECT_EQ(g_mm(Partition{}, Partition{}, 1, n, m, w), w.at(n, m));
      EXPECT_EQ(g_pm(Partition{}, Partition{}, 1, n, m, w), w.at(n, m));
      EXPECT_EQ(g_mp(Partition{}, Partition{}, 1, n, m, w), w.at(n, m));
    }
  EXPECT_EQ(g_pp(Partition{1}, Partition{}, 1, 0, 0, w), w.at(1, 0));
  // the empty coefficient is the Andreief determinant for every variant
  for (auto v : {Variant::PP, Variant::MM, Variant::PM, Variant::MP})
    for (int N = 1; N <= 3; ++N)
      EXPECT_EQ(detail::factorial_scalar<Rational>(N) * g_value(v, Partition{}, Partition{}, N, 1, 0, w),
                andreief_value(w, N, 1, 0));
  EXPECT_EQ(code_of([&] { g_pp(Partition{1, 1}, Partition{}, 1, 0, 0, w); }), ErrorCode::LengthExceedsN);
  EXPECT_EQ(code_of([&] { g_pp(Partition{9}, Partition{}, 1, 0, 0, w); }), ErrorCode::WindowTooSmall);
}

TEST(Engines, GRowSwapAntisymmetry) {
  const auto w = rational_window(8);
  for (auto v : {Variant::PP, Variant::PM}) {
    auto a = g_matrix(v, Partition{2, 1}, Partition{1}, 3, 0, 1, w);
    const Rational before = determinant(a);
    a.swap_rows(0, 2);
    EXPECT_EQ(determinant(a), -before);
    EXPECT_NE(before, Rational(0));
  }
}

TEST(Engines, SeriesCollapseAtZeroTimes) {
  const auto s = fixture::gaussian(0.5);
  const DeformationParams d = deform({}, {}, {}, {}, 1, 1);
  const Complex ref = andreief_Z(s, d, 2).value;
  for (auto v : {Variant::PP, Variant::MM, Variant::PM, Variant::MP}) {
    const auto r = double_series_Z(v, s, d, 2, 6);
    EXPECT_EQ(r.table.entries.size(), 1u);
    EXPECT_EQ(r.z.value, ref);
    EXPECT_EQ(r.z.error_estimate, 0.0);
  }
  const auto q = quadruple_series_Z(fixture::circle(), d, 2, 4);
  EXPECT_EQ(q.table.entries.size(), 1u);
  EXPECT_LT(rel(q.z.value, andreief_Z(fixture::circle(), d, 2).value), 1e-14);
}

TEST(Engines, GaussianDoubleSeriesPP) {
  const auto s = fixture::gaussian(0.5);
  const auto d = deform({0.1}, {0.05});
  const Complex ref = andreief_Z(s, d, 2).value;
  const auto r = double_series_Z(Variant::PP, s, d, 2, 8);
  EXPECT_LT(rel(r.z.value, ref), 1e-6);
  EXPECT_LT(r.z.error_estimate, 1e-6 * std::abs(ref));
  // the -+ variant also runs here: its series side tbar1 is zero
  EXPECT_LT(rel(double_series_Z(Variant::MP, s, d, 2, 8).z.value, ref), 1e-6);
  EXPECT_EQ(code_of([&] { double_series_Z(Variant::PP, s, deform({}, {}, {0.1}), 2, 4); }),
            ErrorCode::NegativeIndexUnsupported);
  EXPECT_EQ(code_of([&] { double_series_Z(Variant::PP, s, d, 2, 1, {}, 1e-12); }), ErrorCode::TruncationNotConverged);
}

TEST(Engines, CircleDoubleSeriesAllVariants) {
  const auto s = fixture::circle();
  for (int n = 0; n <= 1; ++n) {
    const auto d = deform({0.1}, {0.05}, {0.05}, {0.05}, n, 1 - n);
    const Complex ref = andreief_Z(s, d, 2).value;
    for (auto v : {Variant::PP, Variant::MM, Variant::PM, Variant::MP})
      EXPECT_LT(rel(double_series_Z(v, s, d, 2, 8).z.value, ref), 1e-6) << variant_name(v) << " n=" << n;
  }
}

TEST(Engines, QuadrupleExamples) {
  const auto s = fixture::circle();
  const auto w = bimoment_window(s, {-4, 5, -4, 5}, {});
  const Partition e;
  for (int N = 1; N <= 2; ++N)
    EXPECT_LT(rel(quadruple_I(e, e, e, e, N, 0, 1, w), andreief_value(w, N, 0, 1)), 1e-14);
  // (lambda, 0, 0, 0) collapses to N! g++
  for (const Partition& l : {Partition{1}, Partition{2, 1}, Partition{3}})
    EXPECT_LT(rel(quadruple_I(l, e, e, e, 2, 0, 0, w), 2.0 * g_pp(l, e, 2, 0, 0, w)), 1e-14);
  // ((1), 0, (1), 0) at N = 2: nu~ = (1), alpha in {(2), (1,1)}, l = alpha_i - i + 1
  auto det2 = [&](int a0, int a1, int b0, int b1) { return w.at(a0, b0) * w.at(a1, b1) - w.at(a0, b1) * w.at(a1, b0); };
  const Complex brute = 2.0 * (det2(2, -1, 1, 0) + det2(1, 0, 1, 0));
  EXPECT_LT(rel(quadruple_I(Partition{1}, e, Partition{1}, e, 2, 0, 0, w), brute), 1e-14);
  // at N = 1 the same quadruple is a single bimoment
  EXPECT_LT(rel(quadruple_I(Partition{1}, e, Partition{1}, e, 1, 0, 0, w), w.at(0, 0)), 1e-14);
}

TEST(Engines, QuadrupleSeries) {
  const auto s = fixture::circle();
  const auto d = deform({0.05}, {0.05}, {0.05}, {0.05});
  const Complex ref = andreief_Z(s, d, 1).value;
  const auto r = quadruple_series_Z(s, d, 1, 4);
  EXPECT_LT(rel(r.z.value, ref), 1e-6);
  // t1 only: the ++ series
  const auto d1 = deform({0.1}, {});
  EXPECT_LT(rel(quadruple_series_Z(s, d1, 2, 6).z.value, double_series_Z(Variant::PP, s, d1, 2, 6).z.value), 1e-13);
  // N = 2 against the full Andreief value
  const auto d2 = deform({0.05}, {0.03}, {0.04}, {0.05});
  EXPECT_LT(rel(quadruple_series_Z(s, d2, 2, 4).z.value, andreief_Z(s, d2, 2).value), 1e-6);
}

TEST(Engines, TauValue) {
  const auto s = fixture::circle();
  EXPECT_EQ(tau_value(s, {}, 0), Complex(1.0));
  const auto d = deform({0.1}, {}, {0.1});
  EXPECT_NEAR(std::abs(tau_normalization(d) - std::exp(-0.01)), 0.0, 1e-16);
  for (int N = 1; N <= 3; ++N) {
    const Complex Z = andreief_Z(s, DeformationParams{}, N).value;
    const double sign = (N * (N + 1) / 2) % 2 ? -1.0 : 1.0;
    EXPECT_LT(rel(tau_value(s, {}, N), sign * Z / std::tgamma(N + 1.0)), 1e-14);
  }
  const auto dd = deform({0.05}, {0.04}, {0.03}, {0.05}, 0, 1);
  EXPECT_LT(rel(tau_value(s, dd, 1, TauRoute::SeriesPP, 8), tau_value(s, dd, 1)), 1e-8);
}

TEST(Engines, TauSignAgainstFermions) {
  // Integrating the two-component vacuum expectation term by term must give
  // the tau normalization, including (-1)^{mN}.
  const auto w = bimoment_window(fixture::circle(), {0, 5, 0, 5}, {});
  for (int N = 1; N <= 2; ++N)
    for (int n = 0; n <= 2; ++n)
      for (int m = 0; m <= 2; ++m) {
        const auto d = deform({}, {}, {}, {}, n, m);
        const Complex via_z = tau_from_Z(andreief_value(w, N, n, m), N, d);
        EXPECT_LT(rel(tau_fermionic(w, N, n, m), via_z), 1e-12) << N << " " << n << " " << m;
      }
}

TEST(Engines, RadialSeries) {
  const RadialPlanar lin{{0.0, -1.0}};
  EXPECT_NEAR(radial_series_Z(lin, 0, 0, {}, {}, 1, 6).value.real(), pi, 1e-14);
  const MeasureSpec spec = lin;
  for (double t : {0.1, -0.07}) {
    const CTimes t1({t}), t2({Complex(0.05, 0.02)});
    const auto series = radial_series_Z(lin, 0, 0, t1, t2, 1, 6);
    DeformationParams d;
    d.t1 = t1;
    d.t2 = t2;
    EXPECT_LT(rel(series.value, direct_Z(spec, d, 1).value), 1e-6);
  }
  // n = 1, m = 0: only mu = lambda + 1 pairs; zero when t2 = 0
  EXPECT_EQ(radial_series_Z(lin, 1, 0, CTimes({0.1}), {}, 1, 4).value, Complex(0.0));
  // with t2: pi sum_k M(k+1) s_(k)(t1) s_(k+1)(t2); here t1 = 0 leaves pi M(1) t2_1
  EXPECT_NEAR(std::abs(radial_series_Z(lin, 1, 0, {}, CTimes({0.2}), 1, 2).value - pi * 1.0 * 0.2), 0.0, 1e-14);
  DeformationParams d10;
  d10.t1 = CTimes({0.1});
  d10.t2 = CTimes({0.2});
  d10.n = 1;
  EXPECT_LT(rel(radial_series_Z(lin, 1, 0, d10.t1, d10.t2, 1, 8).value, direct_Z(spec, d10, 1).value), 1e-8);
  // N = 2 with the Gaussian radial potential
  const RadialPlanar quad{{0.0, 0.0, -1.0}};
  DeformationParams d2;
  d2.t1 = CTimes({0.1});
  d2.t2 = CTimes({0.1});
  EXPECT_LT(rel(radial_series_Z(quad, 0, 0, d2.t1, d2.t2, 2, 8).value, andreief_Z(MeasureSpec(quad), d2, 2).value), 1e-8);
  EXPECT_EQ(code_of([&] { radial_series_Z(lin, 0, 0, CTimes({0.0, 0.1}), {}, 1, 4); }), ErrorCode::DivergentDeformation);
}

TEST(Engines, CouplingKernel) {
  const ContentFunction<double> iz = [](int j) { return std::optional<double>(1.0 / j); };
  const std::vector<double> x1{0.4}, y1{-0.3};
  auto k1 = coupling_kernel_check(iz, 1, x1, y1, 20);
  EXPECT_NEAR(k1.kernel, std::exp(0.4 * -0.3), 1e-15);
  EXPECT_LT(k1.residual, 1e-14);
  const std::vector<double> x{0.3, 0.1}, y{0.2, -0.1};
  EXPECT_LT(coupling_kernel_check(iz, 2, x, y, 12).residual, 1e-10);
  // r(j) = z (a - N + j) / j with a = 0: kernel side constant
  for (double z : {0.7, -1.3}) {
    const ContentFunction<double> r3 = [z](int j) { return std::optional<double>(z * (j - 2) / j); };
    const double ref = kernel_side(r3, std::vector<double>{0.3, 0.1}, std::vector<double>{0.2, -0.1});
    const double other = kernel_side(r3, std::vector<double>{-0.5, 0.9}, std::vector<double>{0.6, 0.25});
    EXPECT_NEAR(ref, other, 1e-10);
    EXPECT_LT(coupling_kernel_check(r3, 2, x, y, 6).residual, 1e-10);
  }
  const ContentFunction<double> pole = [](int j) { return j == 2 ? std::nullopt : std::optional<double>(1.0); };
  EXPECT_EQ(code_of([&] { coupling_kernel_check(pole, 2, x, y, 4); }), ErrorCode::SingularContent);
  const std::vector<double> rep{0.2, 0.2};
  EXPECT_EQ(code_of([&] { kernel_side(iz, rep, y); }), ErrorCode::RepeatedVariable);
}

TEST(Engines, PolynomialPotentialSeries) {
  ContourPolynomial full;
  full.u = {0.05, 0.03, 1.0};
  full.v = {-0.04, 0.02, 1.0};
  const ContourPiece ray{ContourPiece::Kind::Ray, 0.0, 1, {}, {}};
  full.gammas = {{ray}};
  full.Gammas = {{ray}};
  full.kappa = {{1.0}};
  const auto [base, d] = split_potential(full);
  EXPECT_EQ(d.t1.at(1), Complex(-0.05));
  EXPECT_EQ(d.t1.at(2), Complex(-0.015));
  for (int N = 1; N <= 2; ++N) {
    const Complex ref = andreief_Z(MeasureSpec(full), {}, N).value;
    const auto r = double_series_Z(Variant::PP, MeasureSpec(base), d, N, 8);
    EXPECT_LT(rel(r.z.value, ref), 1e-6) << N;
  }
}

TEST(Engines, Errors) {
  const auto s = fixture::gaussian(0.5);
  EXPECT_EQ(code_of([&] { direct_Z(s, {}, 3); }), ErrorCode::NUnsupported);
  const auto w = bimoment_window(s, {0, 1, 0, 1}, {});
  EXPECT_EQ(code_of([&] { andreief_Z(w, 3, 0, 0); }), ErrorCode::WindowTooSmall);
  EXPECT_EQ(code_of([&] { permutation_Z(w, 2, 1, 0); }), ErrorCode::WindowTooSmall);
  EXPECT_EQ(code_of([&] { permutation_value(rational_window(8), 7, 0, 0); }), ErrorCode::BoundExceeded);
  EXPECT_EQ(code_of([&] { quadruple_series_Z(s, deform({0.1}, {}, {0.1}), 1, 2); }), ErrorCode::NegativeIndexUnsupported);
}

TEST(Engines, ZResultJsonRoundTrip) {
  const auto r = double_series_Z(Variant::PP, fixture::gaussian(0.5), deform({0.1}, {0.05}), 2, 4);
  const json j = zresult_to_json(r.z);
  const auto back = zresult_from_json(json::parse(j.dump()));
  EXPECT_EQ(back.value, r.z.value);
  EXPECT_EQ(back.error_estimate, r.z.error_estimate);
  EXPECT_EQ(back.truncation, 4);
  EXPECT_EQ(zresult_to_json(back), j);
  const std::string csv = table_to_csv(r.table);
  EXPECT_EQ(csv.substr(0, 16), "lambda,mu,re,im\n");
}
