#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "zn2mm/measures.hpp"

using namespace zn2mm;

namespace {

constexpr double pi = std::numbers::pi;

MeasureSpec gaussian(double c) { return GaussianCoupled{c, {}, {}}; }

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

CircleProduct circle_exp_kernel() {
  CircleProduct c;
  c.kernel_source = json{{"type", "exponential"}, {"scale", 1.0}};
  c.kernel = kernel_exponential(1.0);
  return c;
}

}  // namespace

TEST(Measures, GaussianExamples) {
  const auto s = gaussian(0.5);
  EXPECT_LT(rel(bimoment(s, 0, 0), Complex(2 * pi / std::sqrt(0.75))), 1e-10);
  EXPECT_NEAR(std::abs(bimoment(s, 1, 0)), 0.0, 1e-12);
  EXPECT_LT(rel(bimoment(s, 1, 1), Complex(2 * pi * 0.5 / std::pow(0.75, 1.5))), 1e-10);
  EXPECT_NEAR(bimoment(s, 0, 0).real(), 7.255197, 1e-6);
  EXPECT_NEAR(bimoment(s, 1, 1).real(), 4.836798, 1e-6);
}

TEST(Measures, GaussianClosedFormSweep) {
  for (double c : {-0.8, -0.3, 0.0, 0.5, 0.8}) {
    const auto s = gaussian(c);
    const auto w = bimoment_window(s, {0, 10, 0, 10}, {});
    for (int i = 0; i <= 10; ++i)
      for (int k = 0; i + k <= 10; ++k) {
        const double exact = gaussian_bimoment_closed_form(c, i, k);
        if (exact == 0.0) {
          // round-off scale: the Cauchy-Schwarz bound sqrt(B_{2i,0} B_{0,2k})
          const double scale =
              std::sqrt(gaussian_bimoment_closed_form(c, 2 * i, 0) * gaussian_bimoment_closed_form(c, 0, 2 * k));
          EXPECT_LT(std::abs(w.at(i, k)), 1e-10 * std::abs(scale)) << c << " " << i << " " << k;
        } else {
          EXPECT_LT(rel(w.at(i, k), Complex(exact)), 1e-10) << c << " " << i << " " << k;
        }
      }
  }
}

TEST(Measures, WindowParity) {
  const auto w = bimoment_window(gaussian(0.5), {0, 3, 0, 3}, {});
  for (int i = 0; i <= 3; ++i)
    for (int k = 0; k <= 3; ++k)
      if ((i + k) % 2) {
        EXPECT_LT(std::abs(w.at(i, k)), 1e-12 * std::abs(w.at(0, 0)));
      }
  // an even quartic potential keeps the parity
  const MeasureSpec quartic = GaussianCoupled{0.3, {0, 0, 0, 0, -0.1}, {0, 0, 0.2}};
  const auto wq = bimoment_window(quartic, {0, 3, 0, 3}, {});
  for (int i = 0; i <= 3; ++i)
    for (int k = 0; k <= 3; ++k)
      if ((i + k) % 2) {
        EXPECT_LT(std::abs(wq.at(i, k)), 1e-12 * std::abs(wq.at(0, 0)));
      }
}

TEST(Measures, WindowMatchesEntrywiseBitForBit) {
  clear_window_cache();
  DeformationParams d;
  d.t1 = CTimes({0.1});
  const auto s = gaussian(0.4);
  const auto w = bimoment_window_uncached(s, {0, 3, 0, 2}, d, {});
  for (int i = 0; i <= 3; ++i)
    for (int k = 0; k <= 2; ++k) {
      QuadratureSpec fixed;
      fixed.points = w.points;
      fixed.certify = false;
      const auto single = bimoment_window_uncached(s, {i, i, k, k}, d, fixed);
      EXPECT_EQ(single.at(i, k), w.at(i, k));
    }
  // a 1x1 window is the single bimoment
  EXPECT_EQ(bimoment_window(s, {2, 2, 1, 1}, d).at(2, 1), deformed_bimoment(s, 2, 1, d));
}

TEST(Measures, DeformationSeriesOracle) {
  const auto s = gaussian(0.5);
  DeformationParams d;
  d.t1 = CTimes({0.1});
  const Complex direct = deformed_bimoment(s, 0, 0, d);
  Complex series(0.0);
  double fact = 1.0;
  for (int j = 0; j <= 30; ++j) {
    if (j) fact *= j;
    series += std::pow(0.1, j) / fact * gaussian_bimoment_closed_form(0.5, j, 0);
  }
  EXPECT_LT(rel(direct, series), 1e-8);
  EXPECT_EQ(deformed_bimoment(s, 1, 2, DeformationParams{}), bimoment(s, 1, 2));
}

TEST(Measures, DeformationDerivative) {
  const auto s = gaussian(0.3);
  for (int j = 1; j <= 1; ++j)
    for (int i = 0; i <= 2; ++i)
      for (int k = 0; k <= 2; ++k) {
        const double h = 1e-4;
        DeformationParams base, up, down;
        base.t1 = CTimes({0.05});
        up.t1 = CTimes({0.05 + h});
        down.t1 = CTimes({0.05 - h});
        const Complex fd = (deformed_bimoment(s, i, k, up) - deformed_bimoment(s, i, k, down)) / (2 * h);
        const Complex exact = deformed_bimoment(s, i + j, k, base);
        EXPECT_LT(std::abs(fd - exact), 1e-6 * std::max(1.0, std::abs(exact))) << i << " " << k;
      }
  // higher times on the circle, where every degree is allowed
  const MeasureSpec circ = circle_exp_kernel();
  DeformationParams base, up, down;
  const double h = 1e-4;
  base.t2 = CTimes({0.0, 0.05});
  up.t2 = CTimes({0.0, 0.05 + h});
  down.t2 = CTimes({0.0, 0.05 - h});
  const Complex fd = (deformed_bimoment(circ, 0, 2, up) - deformed_bimoment(circ, 0, 2, down)) / (2 * h);
  EXPECT_LT(std::abs(fd - deformed_bimoment(circ, 0, 4, base)), 1e-6);
}

TEST(Measures, CircleClosedForm) {
  const MeasureSpec s = circle_exp_kernel();
  const auto w = bimoment_window(s, {-2, 6, -2, 6}, {});
  double fact = 1.0;
  for (int i = -2; i <= 6; ++i) {
    if (i > 0) fact *= i;
    for (int k = -2; k <= 6; ++k) {
      const double exact = (i == k && i >= 0) ? 4 * pi * pi / fact : 0.0;
      EXPECT_NEAR(w.at(i, k).real(), exact, 1e-12 * 4 * pi * pi);
      EXPECT_NEAR(w.at(i, k).imag(), 0.0, 1e-12 * 4 * pi * pi);
      EXPECT_NEAR(std::abs(*analytic_bimoment(s, i, k) - w.at(i, k)), 0.0, 1e-12 * 4 * pi * pi);
    }
  }
}

TEST(Measures, CircleContentKernel) {
  CircleProduct c;
  c.kernel = kernel_from_content({Complex(2.0), Complex(0.5)});
  ASSERT_EQ(c.kernel.size(), 3u);
  EXPECT_EQ(c.kernel[2], Complex(1.0));
  const MeasureSpec s = c;
  EXPECT_NEAR(bimoment(s, 1, 1).real(), 4 * pi * pi * 2.0, 1e-10);
  EXPECT_NEAR(std::abs(bimoment(s, 3, 3)), 0.0, 1e-12);
}

TEST(Measures, RadialMoments) {
  EXPECT_DOUBLE_EQ(radial_moment(RadialPlanar{{0.0, -1.0}}, 0), 1.0);
  EXPECT_DOUBLE_EQ(radial_moment(RadialPlanar{{0.0, -1.0}}, 3), 6.0);
  EXPECT_NEAR(radial_moment(RadialPlanar{{0.0, 0.0, -1.0}}, 0), std::sqrt(pi) / 2, 1e-13);
  EXPECT_THROW(radial_moment(RadialPlanar{{0.0, 1.0}}, 0), Error);
  // planar quadrature reproduces delta_ik pi M(i)
  const MeasureSpec s = RadialPlanar{{0.0, -1.0}};
  const auto w = bimoment_window(s, {0, 3, 0, 3}, {});
  for (int i = 0; i <= 3; ++i)
    for (int k = 0; k <= 3; ++k)
      EXPECT_NEAR(std::abs(w.at(i, k) - *analytic_bimoment(s, i, k)), 0.0, 1e-10 * std::tgamma(i + 1.0) * pi);
}

TEST(Measures, ContourPolynomialCubic) {
  // Airy-type cubic weights on the real-positive ray, pairs of rays at 0 and
  // 2pi/3; compare a coupling-free sum with products of one-dimensional integrals.
  ContourPolynomial c;
  c.u = {0.0, 0.0, 1.0};
  c.v = {0.0, 0.0, 1.0};
  ContourPiece out{ContourPiece::Kind::Ray, 0.0, 1, {}, {}};
  c.gammas = {{out}};
  c.Gammas = {{out}};
  c.kappa = {{1.0}};
  const MeasureSpec s = c;
  const auto w = bimoment_window(s, {0, 2, 0, 2}, {});
  // B_ik = int_0^inf int_0^inf x^i y^k exp(-x^3/3 - y^3/3 + x y): compare with
  // a brute-force nested Legendre rule on a generous box.
  const auto& g = quadrature::legendre(400, 0.0, 8.0);
  for (int i = 0; i <= 2; ++i)
    for (int k = 0; k <= 2; ++k) {
      double acc = 0.0;
      for (std::size_t a = 0; a < g.nodes.size(); ++a)
        for (std::size_t b = 0; b < g.nodes.size(); ++b) {
          const double x = g.nodes[a], y = g.nodes[b];
          acc += g.weights[a] * g.weights[b] * std::pow(x, i) * std::pow(y, k) *
                 std::exp(-x * x * x / 3 - y * y * y / 3 + x * y);
        }
      EXPECT_LT(rel(w.at(i, k), Complex(acc)), 1e-10) << i << " " << k;
    }
  // quadratic potentials are rejected, rays in growing directions diverge
  ContourPolynomial bad = c;
  bad.u = {0.0, 1.0};
  EXPECT_THROW(bimoment(MeasureSpec(bad), 0, 0), Error);
  ContourPolynomial grow = c;
  grow.gammas = {{ContourPiece{ContourPiece::Kind::Ray, pi / 3, 1, {}, {}}}};
  try {
    bimoment(MeasureSpec(grow), 0, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Divergent);
  }
}

TEST(Measures, ErrorCodes) {
  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  const auto s = gaussian(0.5);
  EXPECT_EQ(code_of([&] { bimoment(s, -1, 0); }), ErrorCode::NegativeIndexUnsupported);
  DeformationParams bar;
  bar.tb1 = CTimes({0.1});
  EXPECT_EQ(code_of([&] { deformed_bimoment(s, 0, 0, bar); }), ErrorCode::NegativeIndexUnsupported);
  DeformationParams quad;
  quad.t1 = CTimes({0.0, 0.1});
  EXPECT_EQ(code_of([&] { deformed_bimoment(s, 0, 0, quad); }), ErrorCode::DivergentDeformation);
  // a quartic confining potential admits a quadratic time
  const MeasureSpec quartic = GaussianCoupled{0.5, {0, 0, 0, 0, -0.1}, {}};
  EXPECT_NO_THROW(deformed_bimoment(quartic, 0, 0, quad));
  QuadratureSpec tiny;
  tiny.points = 4;
  tiny.max_points = 8;
  EXPECT_EQ(code_of([&] { bimoment(s, 8, 8, tiny); }), ErrorCode::QuadratureNotConverged);
  const MeasureSpec rad = RadialPlanar{{0.0, -1.0}};
  DeformationParams deg2;
  deg2.t1 = CTimes({0.0, 0.1});
  EXPECT_EQ(code_of([&] { deformed_bimoment(rad, 0, 0, deg2); }), ErrorCode::DivergentDeformation);
  EXPECT_THROW(measure_from_json(json{{"kind", "gaussian_coupled"}, {"c", 1.5}}), Error);
  EXPECT_THROW(measure_from_json(json{{"kind", "nope"}}), Error);
}

TEST(Measures, JsonRoundTrip) {
  const MeasureSpec circ = circle_exp_kernel();
  DeformationParams d;
  d.t1 = CTimes({0.05});
  d.tb2 = CTimes({Complex(0.05, 0.01)});
  const auto w = bimoment_window(circ, {-1, 2, -1, 2}, d);
  const auto path = (std::filesystem::temp_directory_path() / "zn2mm_window_roundtrip.json").string();
  save_window(w, path);
  const auto back = load_window(path);
  std::remove(path.c_str());
  EXPECT_EQ(back.rect, w.rect);
  EXPECT_EQ(back.points, w.points);
  EXPECT_EQ(back.provenance, "quadrature");
  for (int i = -1; i <= 2; ++i)
    for (int k = -1; k <= 2; ++k) EXPECT_EQ(back.at(i, k), w.at(i, k));
  EXPECT_EQ(deformation_to_json(back.deform), deformation_to_json(w.deform));
  // the stored measure reloads to the same spec
  EXPECT_EQ(measure_to_json(measure_from_json(back.measure)), measure_to_json(circ));
  EXPECT_THROW(back.at(3, 0), Error);
}

TEST(Measures, TauNormalization) {
  DeformationParams d;
  d.t1 = CTimes({0.1});
  d.tb1 = CTimes({0.1});
  EXPECT_NEAR(std::abs(tau_normalization(d) - std::exp(-0.01)), 0.0, 1e-16);
}
