#include <doctest.h>

#include "dccalc/piecewise.hpp"

using namespace dccalc;

namespace {

std::shared_ptr<const CellComplex> interval_split() {
  return CellComplex::build(1, {{Rational(-1), 0, 0}, {Rational(0), 0, 0}, {Rational(1), 0, 0}},
                            {{0, 1}, {1, 2}});
}

PiecewiseScalar abs_x(std::shared_ptr<const CellComplex> cx) {
  // pieces ordered by cell: cell 0 = (-1,0), cell 1 = (0,1)
  return PiecewiseScalar(cx, {RationalFn::variable(0) * Rational(-1), RationalFn::variable(0)});
}

PiecewiseScalar step_x(std::shared_ptr<const CellComplex> cx) {
  return PiecewiseScalar(cx, {RationalFn::constant(0), RationalFn::constant(1)});
}

int interior_facet(const CellComplex& cx) {
  for (size_t i = 0; i < cx.facets.size(); ++i)
    if (cx.facets[i].interior()) return (int)i;
  return -1;
}

}  // namespace

TEST_CASE("traces on the split interval") {
  auto cx = interval_split();
  auto f = abs_x(cx);
  int fid = interior_facet(*cx);
  REQUIRE(fid >= 0);
  VecQ zero{0, 0, 0};
  CHECK(f.trace(fid, Side::Minus).eval(zero) == 0);
  CHECK(f.trace(fid, Side::Plus).eval(zero) == 0);
  auto s = step_x(cx);
  CHECK(s.trace(fid, Side::Minus).eval(zero) == 0);
  CHECK(s.trace(fid, Side::Plus).eval(zero) == 1);

  // boundary facet has no plus side
  for (size_t i = 0; i < cx->facets.size(); ++i)
    if (!cx->facets[i].interior()) CHECK_THROWS_AS(f.trace((int)i, Side::Plus), BoundaryFacetSideMissing);
}

TEST_CASE("max(x,0) on the square has matching zero traces") {
  std::vector<VecQ> v = {{-1, -1, 0}, {0, -1, 0}, {1, -1, 0}, {-1, 1, 0}, {0, 1, 0}, {1, 1, 0}};
  auto cx = CellComplex::build(2, v, {{0, 1, 4, 3}, {1, 2, 5, 4}});
  PiecewiseScalar f(cx, {RationalFn::constant(0), RationalFn::variable(0)});
  CHECK(f.flags().is_continuous);
  CHECK_FALSE(f.flags().is_DC0);  // gradient jumps across {x=0}
}

TEST_CASE("precise values") {
  auto cx = interval_split();
  VecQ zero{0, 0, 0};
  CHECK(step_x(cx).precise_value(zero) == Rational(1, 2));
  CHECK(abs_x(cx).precise_value(zero) == 0);
  PiecewiseScalar sign(cx, {RationalFn::constant(-1), RationalFn::constant(1)});
  CHECK(sign.precise_value(zero) == 0);
  CHECK(abs_x(cx).precise_value({Rational(-1, 2), 0, 0}) == Rational(1, 2));
}

TEST_CASE("products and algebra") {
  auto cx = interval_split();
  auto f = abs_x(cx);
  auto p = product(f, f);
  CHECK(p.flags().is_continuous);
  CHECK(p.flags().is_DC);
  CHECK(p.flags().is_DC0);  // |x|^2 = x^2 has continuous gradient
  CHECK(p.piece(0).equals(RationalFn(Polynomial::variable(0).pow(2))));

  auto s = step_x(cx);
  auto sx = product(s, PiecewiseScalar::coordinate(cx, 0));
  CHECK(sx.jump_facets().empty());  // x * step is continuous (both traces 0)
  CHECK_FALSE(product(s, PiecewiseScalar::constant(cx, 2)).flags().is_continuous);

  // (1+x) * 1/(1+x) == 1 on (0,1)
  auto cx2 = CellComplex::build(1, {{Rational(0), 0, 0}, {Rational(1), 0, 0}}, {{0, 1}});
  RationalFn one_plus_x = RationalFn::constant(1) + RationalFn::variable(0);
  PiecewiseScalar a(cx2, {one_plus_x});
  PiecewiseScalar b(cx2, {RationalFn::constant(1) / one_plus_x});
  auto prod = product(a, b);
  CHECK(prod.piece(0).equals(RationalFn::constant(1)));
}

TEST_CASE("classification flags") {
  auto cx = interval_split();
  auto f = abs_x(cx);
  CHECK(f.flags().is_DC);
  CHECK(f.flags().is_BV0);
  CHECK_FALSE(f.flags().is_DC0);

  PiecewiseScalar sq(cx, {RationalFn(Polynomial::variable(0).pow(2)),
                          RationalFn(Polynomial::variable(0).pow(2))});
  CHECK(sq.flags().is_DC0);

  auto s = step_x(cx);
  CHECK(s.flags().is_Cw);
  CHECK_FALSE(s.flags().is_Cwo);
  CHECK_FALSE(s.flags().is_BV0);
  CHECK(s.jump_facets().size() == 1);
}

TEST_CASE("common refinement of interval complexes") {
  auto a = CellComplex::build(1, {{Rational(-1), 0, 0}, {Rational(0), 0, 0}, {Rational(1), 0, 0}},
                              {{0, 1}, {1, 2}});
  auto b = CellComplex::build(1, {{Rational(-1), 0, 0}, {Rational(1, 2), 0, 0}, {Rational(1), 0, 0}},
                              {{0, 1}, {1, 2}});
  auto fine = common_refinement(a, b);
  CHECK(fine->cells.size() == 3);
  PiecewiseScalar f = abs_x(a);
  PiecewiseScalar g(b, {RationalFn::constant(0), RationalFn::constant(1)});
  auto sum = f + g;
  CHECK(sum.complex()->cells.size() == 3);
  CHECK(sum.precise_value({Rational(3, 4), 0, 0}) == Rational(7, 4));
}

TEST_CASE("common refinement of square complexes") {
  std::vector<VecQ> v1 = {{0, 0, 0}, {Rational(1, 2), 0, 0}, {1, 0, 0},
                          {0, 1, 0}, {Rational(1, 2), 1, 0}, {1, 1, 0}};
  auto a = CellComplex::build(2, v1, {{0, 1, 4, 3}, {1, 2, 5, 4}});
  std::vector<VecQ> v2 = {{0, 0, 0}, {1, 0, 0}, {0, Rational(1, 2), 0},
                          {1, Rational(1, 2), 0}, {0, 1, 0}, {1, 1, 0}};
  auto b = CellComplex::build(2, v2, {{0, 1, 3, 2}, {2, 3, 5, 4}});
  auto fine = common_refinement(a, b);
  CHECK(fine->cells.size() == 4);
  CHECK(fine->domain_volume() == 1);
}

TEST_CASE("denominator vanishing in a cell is rejected") {
  auto cx = CellComplex::build(1, {{Rational(-1), 0, 0}, {Rational(1), 0, 0}}, {{0, 1}});
  CHECK_THROWS(PiecewiseScalar(cx, {RationalFn::constant(1) / RationalFn::variable(0)}));
}
