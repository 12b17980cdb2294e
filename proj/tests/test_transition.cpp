#include <doctest.h>

#include "dccalc/transition.hpp"

using namespace dccalc;

namespace {

std::shared_ptr<const CellComplex> interval(Rational a, Rational m, Rational b) {
  return CellComplex::build(1, {{a, 0, 0}, {m, 0, 0}, {b, 0, 0}}, {{0, 1}, {1, 2}});
}

PiecewiseScalar step_on(std::shared_ptr<const CellComplex> cx) {
  return PiecewiseScalar(cx, {RationalFn::constant(0), RationalFn::constant(1)});
}

}  // namespace

TEST_CASE("affine pullback of the Dirac mass: F(x)=2x") {
  auto src = interval(-1, 0, 1);
  auto tgt = interval(-2, 0, 2);
  std::array<VecQ, kMaxDim> rows{};
  rows[0] = {Rational(2), 0, 0};
  auto F = TransitionMap::affine(src, tgt, rows, {0, 0, 0});
  CHECK(F.sign_of_det() == 1);

  auto delta0 = derivative(step_on(tgt), 0);
  auto pulled = F.pullback_measure(delta0);
  // F*(delta_0) = |det dF^{-1}| delta_0 = (1/2) delta_0
  auto m = pairing_exact(pulled, Polynomial::constant(1));
  REQUIRE(m.has_value());
  CHECK(*m == Rational(1, 2));

  // consistency: F*(L^1) = L^1 for density 1 (as functions: 1 o F = 1)
  MeasureField leb(tgt);
  for (size_t ci = 0; ci < tgt->cells.size(); ++ci) leb.ac((int)ci) = Density::sym(RationalFn::constant(1));
  auto pulled_leb = F.pullback_measure(leb);
  CHECK(pairing_exact(pulled_leb, Polynomial::constant(1)).value() == 2);  // density 1 on (-1,1)
}

TEST_CASE("pullback respects F*(k mu) = (k o F) F*(mu)") {
  auto src = interval(-1, 0, 1);
  auto tgt = interval(-2, 0, 2);
  std::array<VecQ, kMaxDim> rows{};
  rows[0] = {Rational(2), 0, 0};
  auto F = TransitionMap::affine(src, tgt, rows, {0, 0, 0});
  // piecewise-constant k on the target
  PiecewiseScalar k(tgt, {RationalFn::constant(3), RationalFn::constant(5)});
  MeasureField mu(tgt);
  for (size_t ci = 0; ci < tgt->cells.size(); ++ci)
    mu.ac((int)ci) = Density::sym(RationalFn::variable(0));
  auto lhs = F.pullback_measure(multiply(k, mu));
  auto rhs = multiply(F.pullback_function(k), F.pullback_measure(mu));
  CHECK(equal_exact(lhs, rhs).value());
}

TEST_CASE("pullback TV commutes: |F*(mu)| = F*(|mu|)") {
  auto src = interval(-1, 0, 1);
  auto tgt = interval(-3, 0, 3);
  std::array<VecQ, kMaxDim> rows{};
  rows[0] = {Rational(3), 0, 0};
  auto F = TransitionMap::affine(src, tgt, rows, {0, 0, 0});
  MeasureField mu(tgt);
  mu.ac(0) = Density::sym(RationalFn::variable(0));  // negative density on (-3,0)
  mu.ac(1) = Density::sym(RationalFn::constant(-2));
  auto delta = derivative(step_on(tgt), 0).scaled(Rational(-4));
  mu = mu + delta;
  auto lhs = total_variation(F.pullback_measure(mu));
  auto rhs = F.pullback_measure(total_variation(mu));
  auto panel = monomial_panel(*src, 4);
  auto rep = compare_measures(lhs, rhs, panel, 12);
  CHECK(rep.max_residual < 1e-12);
}

TEST_CASE("chain rule, affine tier, exact zero") {
  auto src = interval(-1, 0, 1);
  auto tgt = interval(-2, 0, 2);
  std::array<VecQ, kMaxDim> rows{};
  rows[0] = {Rational(2), 0, 0};
  auto F = TransitionMap::affine(src, tgt, rows, {0, 0, 0});
  // h jumping at 0 and rational inside the cells
  PiecewiseScalar h(tgt, {RationalFn::variable(0) * Rational(1, 2), RationalFn::constant(1) +
                              RationalFn::variable(0) * RationalFn::variable(0)});
  auto rep = chain_rule_check(F, h, 0);
  CHECK(rep.exact_zero);
}

TEST_CASE("chain rule, nonlinear tier") {
  // F(x,y) = (x, y + x^2) on matching squares; h jumps across {x = 0}
  std::vector<VecQ> sv = {{-1, -1, 0}, {0, -1, 0}, {1, -1, 0}, {-1, 1, 0}, {0, 1, 0}, {1, 1, 0}};
  auto src = CellComplex::build(2, sv, {{0, 1, 4, 3}, {1, 2, 5, 4}});
  // target: image complex of the square under F is curved; use a polynomial
  // map that preserves the square: F(x,y) = (x, y + (x^2-1)(y^2-1)/4) keeps
  // all four edges fixed.
  Polynomial x = Polynomial::variable(0), y = Polynomial::variable(1);
  Polynomial warp = (x * x - Polynomial::constant(1)) * (y * y - Polynomial::constant(1));
  std::vector<Polynomial> comps = {x, y + warp * Rational(1, 4)};
  auto tgt = CellComplex::build(2, sv, {{0, 1, 4, 3}, {1, 2, 5, 4}});
  auto F = TransitionMap::polynomial(src, tgt, comps);
  PiecewiseScalar h(tgt, {RationalFn::constant(0) - RationalFn::variable(1),
                          RationalFn::constant(1) + RationalFn::variable(0)});
  auto rep = chain_rule_check(F, h, 0, 5, 14);
  CHECK(rep.max_residual < 1e-8);
  auto rep2 = chain_rule_check(F, h, 1, 5, 14);
  CHECK(rep2.max_residual < 1e-8);
}

TEST_CASE("pushforward point mass accounting and duality") {
  auto src = interval(-1, 0, 1);
  auto tgt = interval(-2, 0, 2);
  std::array<VecQ, kMaxDim> rows{};
  rows[0] = {Rational(2), 0, 0};
  auto F = TransitionMap::affine(src, tgt, rows, {0, 0, 0});
  auto delta_src = derivative(step_on(src), 0);
  auto pushed = F.pushforward(delta_src);
  // mass preserved, carried at 0 on the target
  Box nb;
  nb.lo = {Rational(-1, 2), 0, 0};
  nb.hi = {Rational(1, 2), 0, 0};
  CHECK(box_mass(pushed, nb) == doctest::Approx(1.0).epsilon(1e-10));

  MeasureField mu(tgt);
  for (size_t ci = 0; ci < tgt->cells.size(); ++ci)
    mu.ac((int)ci) = Density::sym(RationalFn::constant(1) + RationalFn::variable(0));
  mu = mu + derivative(step_on(tgt), 0).scaled(Rational(2));
  auto rep = pullback_duality_check(F, mu);
  CHECK(rep.max_residual < 1e-10);
}

TEST_CASE("TV bound under composition (F(x)=3x)") {
  auto src = interval(-1, 0, 1);
  auto tgt = interval(-3, 0, 3);
  std::array<VecQ, kMaxDim> rows{};
  rows[0] = {Rational(3), 0, 0};
  auto F = TransitionMap::affine(src, tgt, rows, {0, 0, 0});
  auto f = step_on(src);
  auto rep = lipcompo_check(F, f);
  // |D(f o F^{-1})|((-3,3)) = 1 <= 3^0 * 1
  CHECK(rep.lhs_mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.rhs_bound == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.holds());
}

TEST_CASE("nonlinear jump pullback with facet-aligned carrier") {
  // F(x,y) = (x, y + x^2) needs a target complex containing the image; use
  // the shear-like map on complexes made of vertical strips where the
  // vertical facet {x = 1/2} is preserved.
  std::vector<VecQ> sv = {{0, 0, 0}, {Rational(1, 2), 0, 0}, {1, 0, 0},
                          {0, 1, 0}, {Rational(1, 2), 1, 0}, {1, 1, 0}};
  auto src = CellComplex::build(2, sv, {{0, 1, 4, 3}, {1, 2, 5, 4}});
  // target: same strips sheared in y by y -> y; choose F preserving the unit
  // square: F(x,y) = (x, y + x(1-x)(y)(1-y)) fixes all edges.
  Polynomial x = Polynomial::variable(0), y = Polynomial::variable(1);
  std::vector<Polynomial> comps = {x, y + x * (Polynomial::constant(1) - x) * y *
                                          (Polynomial::constant(1) - y)};
  auto tgt = CellComplex::build(2, sv, {{0, 1, 4, 3}, {1, 2, 5, 4}});
  auto F = TransitionMap::polynomial(src, tgt, comps);

  // measure: jump density 1 on the target facet {x=1/2}
  MeasureField mu(tgt);
  int tf = -1;
  for (size_t fi = 0; fi < tgt->facets.size(); ++fi)
    if (tgt->facets[fi].interior()) tf = (int)fi;
  REQUIRE(tf >= 0);
  mu.jump(tf) = Density::sym(RationalFn::constant(1));
  auto pulled = F.pullback_measure(mu);
  // Box-mass oracle: masses of the pulled measure must match the direct
  // change-of-variables accounting <F* mu, psi> = int psi o F^{-1} |det
  // dF^{-1}| d mu for indicator-like tests.
  auto panel = monomial_panel(*src, 3);
  for (const auto& phi : panel) {
    double lhs = pairing(pulled, phi, 12);
    // direct: integrate over the target facet
    double rhs = integrate_facet_sigma(*tgt, tf,
                                       [&](const VecD& yy) {
                                         VecD xx = F.invert(yy);
                                         // |det dF^{-1}|(y) = 1/|det dF(x)|
                                         double det = std::abs(F.det_dF().eval(xx));
                                         // jump density stored against sigma_t;
                                         // transport of the sigma measures is
                                         // handled by the pairing itself, so
                                         // compare through H-normalized form:
                                         return phi.eval(xx) / det;
                                       },
                                       12);
    // The direct computation above integrates phi o F^{-1} |det dF^{-1}|
    // against sigma_t, which is exactly <F*(mu), phi> only when the sigma
    // Jacobian transport matches; agreement validates the transport factor.
    CHECK(lhs == doctest::Approx(rhs).epsilon(5e-7));
  }
}
