#include <doctest.h>

#include "dccalc/polynomial.hpp"
#include "dccalc/quadrature.hpp"
#include "dccalc/rationalfn.hpp"

using namespace dccalc;

TEST_CASE("rational parsing") {
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK(parse_rational("-0.25") == Rational(-1, 4));
  CHECK(parse_rational("2") == Rational(2));
  CHECK(parse_rational("1.5") == Rational(3, 2));
  CHECK_THROWS(parse_rational("1/0"));
}

TEST_CASE("polynomial arithmetic and derivatives") {
  Polynomial x = Polynomial::variable(0);
  Polynomial y = Polynomial::variable(1);
  Polynomial p = x * x + Rational(2) * x * y + y * y;  // (x+y)^2
  Polynomial q = (x + y) * (x + y);
  CHECK(p == q);
  CHECK(p.derivative(0) == Rational(2) * (x + y));
  CHECK(p.degree() == 2);
  VecQ pt{Rational(1, 2), Rational(1, 3), 0};
  CHECK(p.eval(pt) == Rational(25, 36));
}

TEST_CASE("polynomial compose with affine substitution") {
  Polynomial p = Polynomial::variable(0).pow(2);
  std::vector<Polynomial> subs(kMaxDim);
  subs[0] = Polynomial::variable(0, 2) + Polynomial::constant(1);  // x -> 2s+1
  subs[1] = Polynomial();
  subs[2] = Polynomial();
  Polynomial c = p.compose(subs);
  VecQ s{Rational(1), 0, 0};
  CHECK(c.eval(s) == Rational(9));
}

TEST_CASE("exact division and square root") {
  Polynomial x = Polynomial::variable(0);
  Polynomial y = Polynomial::variable(1);
  Polynomial p = (x * y + Rational(1) * x) * (x - y);
  auto q = Polynomial::divide_exact(p, x - y);
  REQUIRE(q.has_value());
  CHECK(*q == x * y + x);
  CHECK_FALSE(Polynomial::divide_exact(x * x + Polynomial::constant(1), x).has_value());

  Polynomial sq = (x + Rational(2) * y).pow(2);
  auto r = Polynomial::sqrt_exact(sq);
  REQUIRE(r.has_value());
  CHECK((*r == x + Rational(2) * y || *r == -(x + Rational(2) * y)));
  CHECK_FALSE(Polynomial::sqrt_exact(x).has_value());
}

TEST_CASE("rational function algebra") {
  RationalFn x = RationalFn::variable(0);
  RationalFn one = RationalFn::constant(1);
  RationalFn f = one / (one + x);  // 1/(1+x)
  RationalFn g = (one + x) * f;
  CHECK(g.equals(one));
  // (1/(1+x))' = -1/(1+x)^2
  RationalFn d = f.derivative(0);
  RationalFn expect = RationalFn(Polynomial::constant(-1),
                                 (Polynomial::constant(1) + Polynomial::variable(0)).pow(2));
  CHECK(d.equals(expect));
  VecQ pt{Rational(1), 0, 0};
  CHECK(f.eval(pt) == Rational(1, 2));
}

TEST_CASE("unit simplex monomial integrals") {
  // int_{0<=x, x+y<=1} x y dA = 1/24
  CHECK(monomial_integral_unit_simplex({1, 1, 0}, 2) == Rational(1, 24));
  CHECK(monomial_integral_unit_simplex({0, 0, 0}, 2) == Rational(1, 2));
  CHECK(monomial_integral_unit_simplex({2, 0, 0}, 1) == Rational(1, 3));
}

TEST_CASE("quadrature matches exact monomial integrals") {
  for (int order : {2, 4, 6, 8}) {
    const auto& rule = QuadratureRule::get(order);
    for (int dim = 1; dim <= 3; ++dim) {
      Exponents e{order / 2, order - order / 2 - (dim > 2 ? 1 : 0), dim > 2 ? 1 : 0};
      if (dim == 1) e = {order, 0, 0};
      if (dim == 2) e = {order / 2, order - order / 2, 0};
      double num = 0;
      for (const auto& pt : rule.simplex[dim]) {
        double t = pt.w;
        for (int v = 0; v < dim; ++v)
          for (int k = 0; k < e[v]; ++k) t *= pt.x[v];
        num += t;
      }
      double exact = to_double(monomial_integral_unit_simplex(e, dim));
      CHECK(std::abs(num - exact) < 1e-13);
    }
  }
}
