#pragma once

#include <gsl/gsl_integration.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

#include "error.hpp"

namespace zn2mm::quadrature {

/// One-dimensional rule: nodes and weights.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

enum class Family { Hermite, Legendre, Laguerre };

namespace detail {

inline Rule gsl_rule(Family family, std::size_t n, double a, double b) {
  const gsl_integration_fixed_type* type = nullptr;
  switch (family) {
    case Family::Hermite: type = gsl_integration_fixed_hermite; break;
    case Family::Legendre: type = gsl_integration_fixed_legendre; break;
    case Family::Laguerre: type = gsl_integration_fixed_laguerre; break;
  }
  std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> ws(
      gsl_integration_fixed_alloc(type, n, a, b, 0.0, 0.0), &gsl_integration_fixed_free);
  if (!ws) fail(ErrorCode::QuadratureNotConverged, "GSL could not build a rule with " + std::to_string(n) + " points");
  Rule r;
  const double* x = gsl_integration_fixed_nodes(ws.get());
  const double* w = gsl_integration_fixed_weights(ws.get());
  r.nodes.assign(x, x + n);
  r.weights.assign(w, w + n);
  return r;
}

class RuleCache {
 public:
  static RuleCache& instance() {
    static RuleCache c;
    return c;
  }
  const Rule& get(Family family, std::size_t n, double a, double b) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(static_cast<int>(family), n, a, b);
    auto it = rules_.find(key);
    if (it == rules_.end()) it = rules_.emplace(key, gsl_rule(family, n, a, b)).first;
    return it->second;
  }

 private:
  std::mutex mutex_;
  // std::map never relocates its nodes, so returned references stay valid.
  std::map<std::tuple<int, std::size_t, double, double>, Rule> rules_;
};

}  // namespace detail

/// Gauss-Hermite rule for the weight exp(-x^2/2) on the real line.
inline const Rule& hermite(std::size_t n) { return detail::RuleCache::instance().get(Family::Hermite, n, 0.0, 0.5); }

/// Gauss-Legendre rule on [a, b].
inline const Rule& legendre(std::size_t n, double a, double b) {
  return detail::RuleCache::instance().get(Family::Legendre, n, a, b);
}

/// Gauss-Laguerre rule for the weight exp(-X) on [0, inf).
inline const Rule& laguerre(std::size_t n) { return detail::RuleCache::instance().get(Family::Laguerre, n, 0.0, 1.0); }

/// Equispaced angles 2 pi j / n with weights 2 pi / n (exact for trigonometric
/// polynomials of degree < n).
inline Rule trapezoid_circle(std::size_t n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.assign(n, 2.0 * std::numbers::pi / static_cast<double>(n));
  for (std::size_t j = 0; j < n; ++j) r.nodes[j] = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
  return r;
}

}  // namespace zn2mm::quadrature
