#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dccalc/rational.hpp"

namespace dccalc {

inline VecQ vec_sub(const VecQ& a, const VecQ& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline VecQ vec_add(const VecQ& a, const VecQ& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline VecQ vec_scale(const VecQ& a, const Rational& s) {
  return {a[0] * s, a[1] * s, a[2] * s};
}
inline Rational dot(const VecQ& a, const VecQ& b, int dim) {
  Rational s = 0;
  for (int i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}
inline double dot(const VecD& a, const VecD& b, int dim) {
  double s = 0;
  for (int i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const VecD& a, int dim) { return std::sqrt(dot(a, a, dim)); }

inline bool vec_eq(const VecQ& a, const VecQ& b) {
  return a[0] == b[0] && a[1] == b[1] && a[2] == b[2];
}

/// Determinant of the dim x dim matrix whose columns are cols[0..dim-1].
inline Rational det_cols(const std::array<VecQ, kMaxDim>& cols, int dim) {
  if (dim == 1) return cols[0][0];
  if (dim == 2) return cols[0][0] * cols[1][1] - cols[0][1] * cols[1][0];
  return cols[0][0] * (cols[1][1] * cols[2][2] - cols[1][2] * cols[2][1]) -
         cols[1][0] * (cols[0][1] * cols[2][2] - cols[0][2] * cols[2][1]) +
         cols[2][0] * (cols[0][1] * cols[1][2] - cols[0][2] * cols[1][1]);
}

/// Generalized cross product of dim-1 vectors in R^dim: the vector normal
/// to their span whose length equals the (dim-1)-volume they span.
/// For dim == 1 the convention is (1).
inline VecQ cross_product(const std::array<VecQ, kMaxDim>& cols, int dim) {
  if (dim == 1) return {Rational(1), 0, 0};
  if (dim == 2) return {cols[0][1], -cols[0][0], 0};
  const VecQ& a = cols[0];
  const VecQ& b = cols[1];
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

/// Reduces an integer-direction vector to primitive form (gcd one, first
/// nonzero entry positive is NOT enforced; orientation is the caller's).
inline VecQ primitive_direction(const VecQ& d, int dim) {
  Int lcm_den = 1;
  for (int i = 0; i < dim; ++i)
    lcm_den = boost::multiprecision::lcm(lcm_den, boost::multiprecision::denominator(d[i]));
  std::array<Int, kMaxDim> z{0, 0, 0};
  Int g = 0;
  for (int i = 0; i < dim; ++i) {
    z[i] = boost::multiprecision::numerator(d[i]) * (lcm_den / boost::multiprecision::denominator(d[i]));
    g = boost::multiprecision::gcd(g, z[i]);
  }
  if (g == 0) return {0, 0, 0};
  VecQ out{0, 0, 0};
  for (int i = 0; i < dim; ++i) out[i] = Rational(z[i] / g);
  return out;
}

struct Simplex {
  std::array<int, kMaxDim + 1> v{-1, -1, -1, -1};  // vertex ids, dim+1 used
};

/// Exact volume of a simplex given by explicit points.
inline Rational simplex_volume(const std::vector<VecQ>& pts, const Simplex& s, int dim) {
  std::array<VecQ, kMaxDim> cols;
  for (int i = 0; i < dim; ++i) cols[i] = vec_sub(pts[s.v[i + 1]], pts[s.v[0]]);
  Rational d = det_cols(cols, dim);
  Rational fact = (dim == 1) ? 1 : (dim == 2 ? 2 : 6);
  return boost::multiprecision::abs(d) / fact;
}

/// Convex position sort for 2-D point sets: counterclockwise around the
/// centroid, exact sign comparisons only.
inline std::vector<int> sort_ccw(const std::vector<VecQ>& pts, std::vector<int> ids) {
  VecQ c{0, 0, 0};
  for (int id : ids) c = vec_add(c, pts[id]);
  Rational inv(1, (long)ids.size());
  c = vec_scale(c, inv);
  auto half = [&](const VecQ& p) {
    // 0 for upper half plane (dy > 0 or (dy==0 && dx>0)), 1 for lower
    Rational dy = p[1] - c[1], dx = p[0] - c[0];
    if (dy > 0 || (dy == 0 && dx > 0)) return 0;
    return 1;
  };
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    int ha = half(pts[a]), hb = half(pts[b]);
    if (ha != hb) return ha < hb;
    Rational cross = (pts[a][0] - c[0]) * (pts[b][1] - c[1]) - (pts[a][1] - c[1]) * (pts[b][0] - c[0]);
    return cross > 0;
  });
  return ids;
}

// ---------------------------------------------------------------------------
// Exact convex clipping. Regions are kept as simplex lists with explicit
// points; every cut introduces exact rational intersection vertices.
// ---------------------------------------------------------------------------

struct GSimplex {
  std::array<VecQ, kMaxDim + 1> p;
};

inline VecQ plane_intersect(const VecQ& a, const VecQ& b, const VecQ& n, const Rational& c, int dim) {
  Rational va = dot(n, a, dim) - c;
  Rational vb = dot(n, b, dim) - c;
  Rational t = va / (va - vb);
  return vec_add(a, vec_scale(vec_sub(b, a), t));
}

/// Clips one simplex against the halfspace {<n,x> <= c}; appends the
/// resulting simplices (possibly none) to out.
inline void clip_simplex_halfspace(const GSimplex& s, int dim, const VecQ& n, const Rational& c,
                                   std::vector<GSimplex>& out) {
  int nv = dim + 1;
  std::vector<int> in, outside;
  std::array<Rational, kMaxDim + 1> val;
  for (int i = 0; i < nv; ++i) {
    val[i] = dot(n, s.p[i], dim) - c;
    (val[i] <= 0 ? in : outside).push_back(i);
  }
  if (outside.empty()) {
    out.push_back(s);
    return;
  }
  if (in.empty()) return;

  if (dim == 1) {
    GSimplex r;
    r.p[0] = s.p[in[0]];
    r.p[1] = plane_intersect(s.p[in[0]], s.p[outside[0]], n, c, dim);
    out.push_back(r);
    return;
  }

  // Gather the clipped region's vertices: inside vertices plus edge cuts.
  std::vector<VecQ> poly;
  for (int i : in) poly.push_back(s.p[i]);
  for (int i : in)
    for (int j : outside)
      if (val[i] < 0 && val[j] > 0) poly.push_back(plane_intersect(s.p[i], s.p[j], n, c, dim));

  if (dim == 2) {
    // Order the (convex) polygon and fan-triangulate.
    std::vector<VecQ> pts = poly;
    std::vector<int> ids(pts.size());
    std::iota(ids.begin(), ids.end(), 0);
    ids = sort_ccw(pts, ids);
    for (size_t k = 1; k + 1 < ids.size(); ++k) {
      GSimplex t;
      t.p[0] = pts[ids[0]];
      t.p[1] = pts[ids[k]];
      t.p[2] = pts[ids[k + 1]];
      std::array<VecQ, kMaxDim> cols{vec_sub(t.p[1], t.p[0]), vec_sub(t.p[2], t.p[0]), VecQ{0, 0, 0}};
      if (det_cols(cols, 2) != 0) out.push_back(t);
    }
    return;
  }

  // dim == 3: split by the number of interior vertices.
  auto push_tet = [&](const VecQ& a, const VecQ& b, const VecQ& cc, const VecQ& d) {
    std::array<VecQ, kMaxDim> cols{vec_sub(b, a), vec_sub(cc, a), vec_sub(d, a)};
    if (det_cols(cols, 3) == 0) return;
    GSimplex t;
    t.p = {a, b, cc, d};
    out.push_back(t);
  };
  if (in.size() == 1) {
    int a = in[0];
    std::array<VecQ, 3> cut;
    for (int k = 0; k < 3; ++k) cut[k] = plane_intersect(s.p[a], s.p[outside[k]], n, c, dim);
    push_tet(s.p[a], cut[0], cut[1], cut[2]);
  } else if (in.size() == 2) {
    int a = in[0], b = in[1];
    VecQ a0 = plane_intersect(s.p[a], s.p[outside[0]], n, c, dim);
    VecQ a1 = plane_intersect(s.p[a], s.p[outside[1]], n, c, dim);
    VecQ b0 = plane_intersect(s.p[b], s.p[outside[0]], n, c, dim);
    VecQ b1 = plane_intersect(s.p[b], s.p[outside[1]], n, c, dim);
    push_tet(s.p[a], s.p[b], a0, a1);
    push_tet(s.p[b], a0, a1, b1);
    push_tet(s.p[b], a0, b0, b1);
  } else {  // 3 inside: whole tet minus a corner tet
    int d = outside[0];
    std::array<VecQ, 3> cut;
    for (int k = 0; k < 3; ++k) cut[k] = plane_intersect(s.p[in[k]], s.p[d], n, c, dim);
    push_tet(s.p[in[0]], s.p[in[1]], s.p[in[2]], cut[0]);
    push_tet(s.p[in[1]], s.p[in[2]], cut[0], cut[1]);
    push_tet(s.p[in[2]], cut[0], cut[1], cut[2]);
  }
}

inline std::vector<GSimplex> clip_simplices_halfspace(const std::vector<GSimplex>& in, int dim,
                                                      const VecQ& n, const Rational& c) {
  std::vector<GSimplex> out;
  for (const auto& s : in) clip_simplex_halfspace(s, dim, n, c, out);
  return out;
}

struct Box {
  VecQ lo{0, 0, 0}, hi{0, 0, 0};
};

/// Clips a simplex list against an axis-aligned box.
inline std::vector<GSimplex> clip_simplices_box(std::vector<GSimplex> cur, int dim, const Box& box) {
  for (int a = 0; a < dim && !cur.empty(); ++a) {
    VecQ n{0, 0, 0};
    n[a] = 1;
    cur = clip_simplices_halfspace(cur, dim, n, box.hi[a]);
    n[a] = -1;
    cur = clip_simplices_halfspace(cur, dim, n, -box.lo[a]);
  }
  return cur;
}

/// Clips a (dim-1)-dimensional facet, given as points spanning it inside
/// R^dim, against a box. The facet is passed as a simplex list of one
/// dimension lower living in ambient coordinates.
struct GFacetPiece {
  std::array<VecQ, kMaxDim> p;  // dim vertices of a (dim-1)-simplex in R^dim
};

inline std::vector<GFacetPiece> clip_facet_halfspace(const std::vector<GFacetPiece>& in, int dim,
                                                     const VecQ& n, const Rational& c) {
  std::vector<GFacetPiece> out;
  for (const auto& f : in) {
    if (dim == 1) {  // facet is a point
      if (dot(n, f.p[0], dim) - c <= 0) out.push_back(f);
      continue;
    }
    if (dim == 2) {  // facet is a segment
      Rational v0 = dot(n, f.p[0], dim) - c, v1 = dot(n, f.p[1], dim) - c;
      if (v0 <= 0 && v1 <= 0) {
        out.push_back(f);
      } else if (v0 <= 0 || v1 <= 0) {
        GFacetPiece r = f;
        VecQ cut = plane_intersect(f.p[0], f.p[1], n, c, dim);
        if (v0 > 0)
          r.p[0] = cut;
        else
          r.p[1] = cut;
        if (!vec_eq(r.p[0], r.p[1])) out.push_back(r);
      }
      continue;
    }
    // dim == 3: facet is a triangle; clip to polygon then fan.
    std::vector<VecQ> kept;
    for (int i = 0; i < 3; ++i) {
      const VecQ& a = f.p[i];
      const VecQ& b = f.p[(i + 1) % 3];
      Rational va = dot(n, a, dim) - c, vb = dot(n, b, dim) - c;
      if (va <= 0) kept.push_back(a);
      if ((va < 0 && vb > 0) || (va > 0 && vb < 0)) kept.push_back(plane_intersect(a, b, n, c, dim));
    }
    for (size_t k = 1; k + 1 < kept.size(); ++k) {
      GFacetPiece t;
      t.p = {kept[0], kept[k], kept[k + 1]};
      std::array<VecQ, kMaxDim> cols{vec_sub(t.p[1], t.p[0]), vec_sub(t.p[2], t.p[0]), VecQ{0, 0, 0}};
      if (!vec_eq(cross_product(cols, 3), {0, 0, 0})) out.push_back(t);
    }
  }
  return out;
}

inline std::vector<GFacetPiece> clip_facet_box(std::vector<GFacetPiece> cur, int dim, const Box& box) {
  for (int a = 0; a < dim && !cur.empty(); ++a) {
    VecQ n{0, 0, 0};
    n[a] = 1;
    cur = clip_facet_halfspace(cur, dim, n, box.hi[a]);
    n[a] = -1;
    cur = clip_facet_halfspace(cur, dim, n, -box.lo[a]);
  }
  return cur;
}

}  // namespace dccalc
