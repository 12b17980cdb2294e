#include <doctest.h>

#include "dccalc/complex.hpp"

using namespace dccalc;

namespace {

std::shared_ptr<const CellComplex> split_interval() {
  // (-1,1) split at 0
  return CellComplex::build(1, {{Rational(-1), 0, 0}, {Rational(0), 0, 0}, {Rational(1), 0, 0}},
                            {{0, 1}, {1, 2}});
}

std::shared_ptr<const CellComplex> split_square() {
  // unit square split by {x = 1/2}
  std::vector<VecQ> v = {{0, 0, 0},          {Rational(1, 2), 0, 0},          {1, 0, 0},
                         {0, 1, 0},          {Rational(1, 2), 1, 0},          {1, 1, 0}};
  return CellComplex::build(2, v, {{0, 1, 4, 3}, {1, 2, 5, 4}});
}

}  // namespace

TEST_CASE("interval split at zero") {
  auto cx = split_interval();
  CHECK(cx->cells.size() == 2);
  int interior = 0;
  for (const auto& f : cx->facets)
    if (f.interior()) {
      ++interior;
      CHECK(cx->vertices[f.vertices[0]][0] == 0);
      // nu = +e1: direction from the minus (left) cell to the plus (right) cell
      CHECK(f.direction[0] == 1);
      CHECK(cx->cells[f.minus_cell].barycenter[0] < 0);
      CHECK(cx->cells[f.plus_cell].barycenter[0] > 0);
    }
  CHECK(interior == 1);
  CHECK(cx->domain_volume() == 2);
}

TEST_CASE("square split at x=1/2") {
  auto cx = split_square();
  CHECK(cx->cells.size() == 2);
  int interior = 0;
  for (const auto& f : cx->facets)
    if (f.interior()) {
      ++interior;
      CHECK(f.direction[0] == 1);
      CHECK(f.direction[1] == 0);
      CHECK(f.offset == Rational(1, 2));
    }
  CHECK(interior == 1);
  CHECK(cx->domain_volume() == 1);
  CHECK(cx->boundary_planes.size() == 4);
}

TEST_CASE("mismatched splits raise NonConformingFacet") {
  // Left square split horizontally at y=1/2, right square not split: the
  // right cell's left edge spans the whole side -> hanging node.
  std::vector<VecQ> v = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, Rational(1, 2), 0},
                         {1, Rational(1, 2), 0}, {0, 1, 0}, {1, 1, 0}, {2, 1, 0}};
  CHECK_THROWS_AS(CellComplex::build(2, v, {{0, 1, 4, 3}, {3, 4, 6, 5}, {1, 2, 7, 6}}),
                  NonConformingFacet);
}

TEST_CASE("overlapping cells rejected") {
  std::vector<VecQ> v = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                         {Rational(1, 2), 0, 0}, {Rational(3, 2), 0, 0},
                         {Rational(3, 2), 1, 0}, {Rational(1, 2), 1, 0}};
  CHECK_THROWS_AS(CellComplex::build(2, v, {{0, 1, 2, 3}, {4, 5, 6, 7}}), NonConformingFacet);
}

TEST_CASE("degenerate cell rejected") {
  std::vector<VecQ> v = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  CHECK_THROWS_AS(CellComplex::build(2, v, {{0, 1, 2}}), DegenerateCell);
}

TEST_CASE("cell integration") {
  auto cx = split_square();
  // volume
  double vol = integrate_cell(*cx, 0, [](const VecD&) { return 1.0; }, 4) +
               integrate_cell(*cx, 1, [](const VecD&) { return 1.0; }, 4);
  CHECK(vol == doctest::Approx(1.0).epsilon(1e-13));
  // int_{[0,1]^2} x*y dA = 1/4
  auto xy = [](const VecD& p) { return p[0] * p[1]; };
  double v = integrate_cell(*cx, 0, xy, 6) + integrate_cell(*cx, 1, xy, 6);
  CHECK(v == doctest::Approx(0.25).epsilon(1e-13));
  // exact variant
  Polynomial p = Polynomial::variable(0) * Polynomial::variable(1);
  CHECK(integrate_cell_exact(*cx, 0, p) + integrate_cell_exact(*cx, 1, p) == Rational(1, 4));
}

TEST_CASE("facet integration with sigma normalization") {
  // facet {x=0} on (-1,1)^2, density y^2, H^1 integral = 2/3
  std::vector<VecQ> v = {{-1, -1, 0}, {0, -1, 0}, {1, -1, 0},
                         {-1, 1, 0},  {0, 1, 0},  {1, 1, 0}};
  auto cx = CellComplex::build(2, v, {{0, 1, 4, 3}, {1, 2, 5, 4}});
  int fid = -1;
  for (size_t i = 0; i < cx->facets.size(); ++i)
    if (cx->facets[i].interior()) fid = (int)i;
  REQUIRE(fid >= 0);
  // direction is (1,0) so sigma == H^1 here
  auto y2 = [](const VecD& p) { return p[1] * p[1]; };
  CHECK(integrate_facet_H(*cx, fid, y2, 6) == doctest::Approx(2.0 / 3).epsilon(1e-13));
  Polynomial py2 = Polynomial::variable(1).pow(2);
  CHECK(integrate_facet_sigma_exact(*cx, fid, py2) == Rational(2, 3));
}

TEST_CASE("diagonal facet sigma jacobian is rational") {
  // triangle pair with diagonal facet from (0,0) to (1,1)
  std::vector<VecQ> v = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  auto cx = CellComplex::build(2, v, {{0, 1, 2}, {0, 2, 3}});
  int fid = -1;
  for (size_t i = 0; i < cx->facets.size(); ++i)
    if (cx->facets[i].interior()) fid = (int)i;
  REQUIRE(fid >= 0);
  // sigma(facet) = H^1(facet)/||(1,-1)|| = sqrt(2)/sqrt(2) = 1 : lambda = 1
  CHECK(integrate_facet_sigma_exact(*cx, fid, Polynomial::constant(1)) == Rational(1));
  double H = integrate_facet_H(*cx, fid, [](const VecD&) { return 1.0; }, 2);
  CHECK(H == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("point location") {
  auto cx = split_square();
  CHECK(cx->locate({Rational(1, 4), Rational(1, 2), 0}).kind == CellComplex::Location::CellInterior);
  auto on_facet = cx->locate({Rational(1, 2), Rational(1, 3), 0});
  CHECK(on_facet.kind == CellComplex::Location::FacetInterior);
  CHECK(cx->locate({Rational(1, 2), Rational(0), 0}).kind == CellComplex::Location::Skeleton);
  CHECK(cx->locate({Rational(3), Rational(0), 0}).kind == CellComplex::Location::Outside);
}

TEST_CASE("3d box complex") {
  std::vector<VecQ> v;
  for (int z = 0; z <= 1; ++z)
    for (int y = 0; y <= 1; ++y)
      for (int x = 0; x <= 1; ++x) v.push_back({Rational(x), Rational(y), Rational(z)});
  // one box cell: ids ordered x fastest (lo/hi per axis)
  auto cx = CellComplex::build(3, v, {{0, 1, 2, 3, 4, 5, 6, 7}});
  CHECK(cx->domain_volume() == 1);
  Polynomial p = Polynomial::variable(0) * Polynomial::variable(1) * Polynomial::variable(2);
  CHECK(integrate_cell_exact(*cx, 0, p) == Rational(1, 8));
}
