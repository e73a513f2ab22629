#pragma once

#include "zn2mm/measures.hpp"

namespace fixture {

inline zn2mm::MeasureSpec gaussian(double c) { return zn2mm::GaussianCoupled{c, {}, {}}; }

/// exp(0.3x + 0.2/x) exp(0.25y + 0.1/y) e^{1/(xy)} on the unit torus.
inline zn2mm::MeasureSpec circle() {
  return zn2mm::measure_from_json({{"kind", "circle_product"},
                                   {"w1", {{"pos", {0.3}}, {"neg", {0.2}}}},
                                   {"w2", {{"pos", {0.25}}, {"neg", {0.1}}}},
                                   {"kernel", {{"type", "exponential"}, {"scale", 1.0}}}});
}

inline zn2mm::DeformationParams deform(std::vector<double> t1, std::vector<double> t2, std::vector<double> tb1 = {},
                                       std::vector<double> tb2 = {}, int n = 0, int m = 0) {
  auto seq = [](const std::vector<double>& v) { return zn2mm::CTimes(std::vector<zn2mm::Complex>(v.begin(), v.end())); };
  zn2mm::DeformationParams d;
  d.t1 = seq(t1);
  d.t2 = seq(t2);
  d.tb1 = seq(tb1);
  d.tb2 = seq(tb2);
  d.n = n;
  d.m = m;
  return d;
}

inline double rel(zn2mm::Complex a, zn2mm::Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace fixture
