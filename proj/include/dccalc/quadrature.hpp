#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <random>

#include "dccalc/errors.hpp"
#include "dccalc/geometry.hpp"
#include "dccalc/polynomial.hpp"

namespace dccalc {

/// Gauss-Legendre nodes/weights on [0,1]; exact for degree <= 2n-1.
inline void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev initial guess.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[n - 1 - i] = 0.5 * (x + 1.0);
    weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

/// Exact integral of a monomial over the unit simplex in R^dim:
/// prod(a_i!) / (dim + sum a_i)!.
inline Rational monomial_integral_unit_simplex(const Exponents& e, int dim) {
  auto factorial = [](int n) {
    Int f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
  };
  Int num = 1;
  int total = 0;
  for (int i = 0; i < dim; ++i) {
    num *= factorial(e[i]);
    total += e[i];
  }
  return Rational(num, factorial(total + dim));
}

/// Exact integral of a polynomial over the unit simplex.
inline Rational integrate_unit_simplex(const Polynomial& p, int dim) {
  Rational s = 0;
  for (const auto& [e, c] : p.terms()) {
    for (int i = dim; i < kMaxDim; ++i)
      if (e[i] != 0) throw std::invalid_argument("polynomial uses variables beyond dim");
    s += c * monomial_integral_unit_simplex(e, dim);
  }
  return s;
}

/// Nodes and weights on the unit reference simplex of a given dimension,
/// exact for polynomials of total degree <= order. Built from
/// Duffy-collapsed Gauss-Legendre grids.
class QuadratureRule {
 public:
  struct Point {
    VecD x{0, 0, 0};
    double w = 0;
  };

  int order = 0;
  std::array<std::vector<Point>, kMaxDim + 1> simplex;  // index by dimension, [0] unused

  static const QuadratureRule& get(int order) {
    static std::mutex mu;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    QuadratureRule rule;
    rule.order = order;
    rule.build();
    rule.self_check();
    return cache.emplace(order, std::move(rule)).first->second;
  }

 private:
  void build() {
    int n1 = (order + 2) / 2 + 1;  // covers the Duffy degree lift
    std::vector<double> gx, gw;
    gauss_legendre_unit(n1, gx, gw);

    auto& line = simplex[1];
    for (int i = 0; i < n1; ++i) line.push_back({{gx[i], 0, 0}, gw[i]});

    auto& tri = simplex[2];
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n1; ++j) {
        double u = gx[i], v = gx[j];
        tri.push_back({{u, v * (1.0 - u), 0}, gw[i] * gw[j] * (1.0 - u)});
      }

    auto& tet = simplex[3];
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n1; ++j)
        for (int k = 0; k < n1; ++k) {
          double u = gx[i], v = gx[j], w = gx[k];
          double y = v * (1.0 - u);
          double z = w * (1.0 - u) * (1.0 - v);
          tet.push_back({{u, y, z}, gw[i] * gw[j] * gw[k] * (1.0 - u) * (1.0 - u) * (1.0 - v)});
        }
  }

  void self_check() const {
    std::mt19937 rng(12345u + static_cast<unsigned>(order));
    for (int dim = 1; dim <= kMaxDim; ++dim) {
      for (int trial = 0; trial < 4; ++trial) {
        Exponents e{0, 0, 0};
        int remaining = order;
        for (int v = 0; v < dim; ++v) {
          std::uniform_int_distribution<int> dist(0, remaining);
          e[v] = (v + 1 == dim) ? remaining : dist(rng);
          remaining -= e[v];
        }
        double num = 0;
        for (const auto& pt : simplex[dim]) {
          double t = pt.w;
          for (int v = 0; v < dim; ++v)
            for (int k = 0; k < e[v]; ++k) t *= pt.x[v];
          num += t;
        }
        double exact = to_double(monomial_integral_unit_simplex(e, dim));
        if (std::abs(num - exact) > 1e-12 * std::max(1.0, std::abs(exact)))
          throw QuadratureOrderTooLow("quadrature self-check failed at order " + std::to_string(order));
      }
    }
  }
};

}  // namespace dccalc
