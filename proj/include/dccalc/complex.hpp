#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>

#include "dccalc/errors.hpp"
#include "dccalc/quadrature.hpp"

namespace dccalc {

struct Cell {
  std::vector<int> vertices;       // polytope corners (2 / CCW polygon / tet4 or box8)
  std::vector<Simplex> simplices;  // exact decomposition used for integration
  VecQ barycenter{0, 0, 0};
  Rational volume = 0;
};

struct Facet {
  std::vector<int> vertices;  // corners; CCW order of the polygon for dim 3
  int minus_cell = -1;
  int plus_cell = -1;  // -1 on boundary facets
  // Oriented hyperplane <direction, x> = offset, direction primitive integer,
  // pointing from the minus cell into the plus cell.
  VecQ direction{0, 0, 0};
  Rational offset = 0;
  double unit_scale = 1.0;  // 1/||direction||_2; nu = unit_scale * direction
  std::vector<std::array<int, kMaxDim>> pieces;  // (dim-1)-simplices, dim ids each
  bool interior() const { return plus_cell >= 0; }
};

/// Polyhedral partition of a chart domain: immutable after construction,
/// the carrier for all piecewise functions and measures.
class CellComplex {
 public:
  int dim = 1;
  std::vector<VecQ> vertices;
  std::vector<Cell> cells;
  std::vector<Facet> facets;
  std::vector<std::pair<VecQ, Rational>> boundary_planes;  // deduped (direction, offset)
  VecQ bbox_lo{0, 0, 0}, bbox_hi{0, 0, 0};

  Rational domain_volume() const {
    Rational v = 0;
    for (const auto& c : cells) v += c.volume;
    return v;
  }

  /// Builds and validates a conforming complex. Cells are vertex-id lists:
  /// dim 1 -> 2 ids, dim 2 -> convex polygon (any order), dim 3 -> 4 (tet)
  /// or 8 (axis-aligned box).
  static std::shared_ptr<const CellComplex> build(int dim, std::vector<VecQ> verts,
                                                  const std::vector<std::vector<int>>& cell_ids);

  struct Location {
    enum Kind { CellInterior, FacetInterior, Skeleton, Outside } kind = Outside;
    int id = -1;
  };
  Location locate(const VecQ& p) const;

  /// Cheap numeric containment lookup; returns a containing cell or -1.
  /// Points on shared facets resolve to an arbitrary incident cell.
  int locate_cell_numeric(const VecD& p, double tol = 1e-12) const;

  bool same_geometry(const CellComplex& o) const;

 private:
  void extract_facets();
  void validate_conforming() const;
};

// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<Simplex> decompose_cell(int dim, const std::vector<VecQ>& verts,
                                           const std::vector<int>& ids) {
  std::vector<Simplex> out;
  if (dim == 1) {
    if (ids.size() != 2) throw DegenerateCell("1-D cell needs two vertices");
    Simplex s;
    s.v = {ids[0], ids[1], -1, -1};
    out.push_back(s);
  } else if (dim == 2) {
    for (size_t k = 1; k + 1 < ids.size(); ++k) {
      Simplex s;
      s.v = {ids[0], ids[k], ids[k + 1], -1};
      out.push_back(s);
    }
  } else if (ids.size() == 4) {
    Simplex s;
    s.v = {ids[0], ids[1], ids[2], ids[3]};
    out.push_back(s);
  } else if (ids.size() == 8) {
    // Axis box with corners ordered (lo/hi per axis); six-tet split.
    static const int tets[6][4] = {{0, 1, 3, 7}, {0, 1, 7, 5}, {0, 5, 7, 4},
                                   {0, 3, 2, 7}, {0, 2, 6, 7}, {0, 6, 4, 7}};
    for (auto& t : tets) {
      Simplex s;
      s.v = {ids[t[0]], ids[t[1]], ids[t[2]], ids[t[3]]};
      out.push_back(s);
    }
  } else {
    throw DegenerateCell("3-D cells must be tets (4 ids) or boxes (8 ids)");
  }
  return out;
}

/// Faces of a cell as vertex-id lists (unsorted).
inline std::vector<std::vector<int>> cell_faces(int dim, const std::vector<int>& ids) {
  std::vector<std::vector<int>> faces;
  if (dim == 1) {
    faces.push_back({ids[0]});
    faces.push_back({ids[1]});
  } else if (dim == 2) {
    for (size_t k = 0; k < ids.size(); ++k)
      faces.push_back({ids[k], ids[(k + 1) % ids.size()]});
  } else if (ids.size() == 4) {
    faces.push_back({ids[0], ids[1], ids[2]});
    faces.push_back({ids[0], ids[1], ids[3]});
    faces.push_back({ids[0], ids[2], ids[3]});
    faces.push_back({ids[1], ids[2], ids[3]});
  } else {
    static const int quads[6][4] = {{0, 1, 3, 2}, {4, 5, 7, 6}, {0, 1, 5, 4},
                                    {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 3, 7, 5}};
    for (auto& q : quads) faces.push_back({ids[q[0]], ids[q[1]], ids[q[2]], ids[q[3]]});
  }
  return faces;
}

inline std::pair<VecQ, Rational> face_hyperplane(int dim, const std::vector<VecQ>& verts,
                                                 const std::vector<int>& face) {
  std::array<VecQ, kMaxDim> span{};
  for (int j = 0; j + 1 < dim; ++j) span[j] = vec_sub(verts[face[j + 1]], verts[face[0]]);
  VecQ n = primitive_direction(cross_product(span, dim), dim);
  if (vec_eq(n, {0, 0, 0})) throw DegenerateCell("degenerate facet");
  return {n, dot(n, verts[face[0]], dim)};
}

}  // namespace detail

inline std::shared_ptr<const CellComplex> CellComplex::build(int dim, std::vector<VecQ> verts,
                                                             const std::vector<std::vector<int>>& cell_ids) {
  if (dim < 1 || dim > kMaxDim) throw Error("dimension must be 1, 2 or 3");
  auto cx = std::make_shared<CellComplex>();
  cx->dim = dim;
  cx->vertices = std::move(verts);
  for (const auto& v : cx->vertices)
    for (int a = dim; a < kMaxDim; ++a)
      if (v[a] != 0) throw Error("vertex coordinate beyond dimension must be zero");

  for (const auto& ids : cell_ids) {
    Cell c;
    c.vertices = ids;
    if (dim == 2) c.vertices = sort_ccw(cx->vertices, c.vertices);
    c.simplices = detail::decompose_cell(dim, cx->vertices, c.vertices);
    // Flat vertices (collinear corners kept for conformity) produce
    // zero-volume fan pieces; drop them.
    std::erase_if(c.simplices,
                  [&](const Simplex& s) { return simplex_volume(cx->vertices, s, dim) == 0; });
    for (const auto& s : c.simplices) c.volume += simplex_volume(cx->vertices, s, dim);
    if (c.simplices.empty() || c.volume == 0) throw DegenerateCell("cell has no volume");
    VecQ b{0, 0, 0};
    for (int id : c.vertices) b = vec_add(b, cx->vertices[id]);
    c.barycenter = vec_scale(b, Rational(1, (long)c.vertices.size()));
    cx->cells.push_back(std::move(c));
  }
  if (cx->cells.empty()) throw Error("complex needs at least one cell");

  cx->bbox_lo = cx->bbox_hi = cx->vertices.at(0);
  for (const auto& v : cx->vertices)
    for (int a = 0; a < dim; ++a) {
      cx->bbox_lo[a] = std::min(cx->bbox_lo[a], v[a], std::less<Rational>());
      cx->bbox_hi[a] = std::max(cx->bbox_hi[a], v[a], std::less<Rational>());
    }

  cx->extract_facets();
  cx->validate_conforming();
  return cx;
}

inline void CellComplex::extract_facets() {
  std::map<std::vector<int>, std::vector<int>> incidence;  // sorted face ids -> cells
  std::map<std::vector<int>, std::vector<int>> original;   // sorted -> one original order
  for (size_t ci = 0; ci < cells.size(); ++ci) {
    for (auto& face : detail::cell_faces(dim, cells[ci].vertices)) {
      std::vector<int> key = face;
      std::sort(key.begin(), key.end());
      incidence[key].push_back((int)ci);
      original.emplace(key, face);
    }
  }
  for (auto& [key, incident] : incidence) {
    if (incident.size() > 2) throw NonConformingFacet("facet shared by more than two cells");
    Facet f;
    f.vertices = original[key];
    f.minus_cell = incident[0];
    f.plus_cell = incident.size() == 2 ? incident[1] : -1;
    auto [n, c] = detail::face_hyperplane(dim, vertices, f.vertices);
    // Orient from minus to plus (interior) or outward (boundary).
    Rational side_minus = dot(n, cells[f.minus_cell].barycenter, dim) - c;
    if (side_minus == 0) throw DegenerateCell("cell barycenter on its own facet plane");
    if (f.plus_cell >= 0) {
      Rational side_plus = dot(n, cells[f.plus_cell].barycenter, dim) - c;
      if (side_plus == 0 || ((side_minus > 0) == (side_plus > 0)))
        throw NonConformingFacet("incident cells on the same side of the facet plane");
      if (side_minus > 0) std::swap(f.minus_cell, f.plus_cell);
    } else if (side_minus > 0) {
      n = vec_scale(n, -1);
      c = -c;
    }
    // Recheck orientation after a possible swap.
    if (dot(n, cells[f.minus_cell].barycenter, dim) - c > 0) {
      n = vec_scale(n, -1);
      c = -c;
    }
    f.direction = n;
    f.offset = c;
    double nn = 0;
    for (int a = 0; a < dim; ++a) nn += to_double(n[a]) * to_double(n[a]);
    f.unit_scale = 1.0 / std::sqrt(nn);
    if (dim == 1) {
      f.pieces.push_back({f.vertices[0], -1, -1});
    } else if (dim == 2) {
      f.pieces.push_back({f.vertices[0], f.vertices[1], -1});
    } else if (f.vertices.size() == 3) {
      f.pieces.push_back({f.vertices[0], f.vertices[1], f.vertices[2]});
    } else {
      f.pieces.push_back({f.vertices[0], f.vertices[1], f.vertices[2]});
      f.pieces.push_back({f.vertices[0], f.vertices[2], f.vertices[3]});
    }
    facets.push_back(std::move(f));
  }
  for (const auto& f : facets) {
    if (f.interior()) continue;
    bool seen = false;
    for (auto& [d, c] : boundary_planes)
      if (vec_eq(d, f.direction) && c == f.offset) seen = true;
    if (!seen) boundary_planes.push_back({f.direction, f.offset});
  }
}

inline void CellComplex::validate_conforming() const {
  // Cells must not overlap: exact pairwise clipped volume.
  for (size_t i = 0; i < cells.size(); ++i) {
    for (size_t j = i + 1; j < cells.size(); ++j) {
      bool bbox_sep = false;
      for (int a = 0; a < dim && !bbox_sep; ++a) {
        Rational lo_i = vertices[cells[i].vertices[0]][a], hi_i = lo_i;
        Rational lo_j = vertices[cells[j].vertices[0]][a], hi_j = lo_j;
        for (int id : cells[i].vertices) {
          lo_i = std::min(lo_i, vertices[id][a], std::less<Rational>());
          hi_i = std::max(hi_i, vertices[id][a], std::less<Rational>());
        }
        for (int id : cells[j].vertices) {
          lo_j = std::min(lo_j, vertices[id][a], std::less<Rational>());
          hi_j = std::max(hi_j, vertices[id][a], std::less<Rational>());
        }
        if (hi_i <= lo_j || hi_j <= lo_i) bbox_sep = true;
      }
      if (bbox_sep) continue;
      for (const auto& si : cells[i].simplices) {
        std::vector<GSimplex> region;
        GSimplex g;
        for (int k = 0; k <= dim; ++k) g.p[k] = vertices[si.v[k]];
        region.push_back(g);
        for (const auto& sj : cells[j].simplices) {
          // Clip region of si against all face halfspaces of sj.
          std::vector<GSimplex> piece = region;
          for (int drop = 0; drop <= dim && !piece.empty(); ++drop) {
            std::array<VecQ, kMaxDim> span{};
            int t = 0;
            int base = (drop == 0) ? 1 : 0;
            for (int k = 0; k <= dim; ++k) {
              if (k == drop || k == base) continue;
              span[t++] = vec_sub(vertices[sj.v[k]], vertices[sj.v[base]]);
            }
            VecQ n = cross_product(span, dim);
            Rational c = dot(n, vertices[sj.v[base]], dim);
            if (dot(n, vertices[sj.v[drop]], dim) > c) {
              n = vec_scale(n, -1);
              c = -c;
            }
            // keep the side of the drop vertex, i.e. the inside of sj
            piece = clip_simplices_halfspace(piece, dim, n, c);
          }
          Rational vol = 0;
          for (const auto& g2 : piece) {
            std::array<VecQ, kMaxDim> cols{};
            for (int k = 0; k < dim; ++k) cols[k] = vec_sub(g2.p[k + 1], g2.p[0]);
            vol += boost::multiprecision::abs(det_cols(cols, dim));
          }
          if (vol != 0) throw NonConformingFacet("cell interiors overlap");
        }
      }
    }
  }
  // Hanging-node detection: a boundary-side face whose centroid lies in the
  // relative interior of a different coplanar face.
  for (size_t ci = 0; ci < cells.size(); ++ci) {
    for (auto& face : detail::cell_faces(dim, cells[ci].vertices)) {
      auto [n, c] = detail::face_hyperplane(dim, vertices, face);
      VecQ mid{0, 0, 0};
      for (int id : face) mid = vec_add(mid, vertices[id]);
      mid = vec_scale(mid, Rational(1, (long)face.size()));
      for (size_t cj = 0; cj < cells.size(); ++cj) {
        if (ci == cj) continue;
        for (auto& other : detail::cell_faces(dim, cells[cj].vertices)) {
          std::vector<int> ka = face, kb = other;
          std::sort(ka.begin(), ka.end());
          std::sort(kb.begin(), kb.end());
          if (ka == kb) continue;
          auto [n2, c2] = detail::face_hyperplane(dim, vertices, other);
          bool coplanar = (vec_eq(n2, n) && c2 == c) || (vec_eq(n2, vec_scale(n, -1)) && c2 == -c);
          if (!coplanar) continue;
          if (dim == 1) throw NonConformingFacet("duplicate vertex facet");
          bool strictly_inside = true;
          if (dim == 2) {
            const VecQ& a = vertices[other[0]];
            const VecQ& b = vertices[other[1]];
            for (int ax = 0; ax < 2 && strictly_inside; ++ax) {
              Rational lo = std::min(a[ax], b[ax], std::less<Rational>());
              Rational hi = std::max(a[ax], b[ax], std::less<Rational>());
              if (lo == hi) continue;
              if (!(mid[ax] > lo && mid[ax] < hi)) strictly_inside = false;
            }
          } else {
            // Inside the coplanar polygon: on the inner side of each edge.
            size_t m = other.size();
            for (size_t k = 0; k < m && strictly_inside; ++k) {
              VecQ e = vec_sub(vertices[other[(k + 1) % m]], vertices[other[k]]);
              std::array<VecQ, kMaxDim> span{e, n, VecQ{0, 0, 0}};
              VecQ inward = cross_product(span, 3);
              Rational side = dot(inward, vec_sub(mid, vertices[other[k]]), 3);
              VecQ opp{0, 0, 0};
              for (int id : other) opp = vec_add(opp, vertices[id]);
              opp = vec_scale(opp, Rational(1, (long)m));
              Rational ref = dot(inward, vec_sub(opp, vertices[other[k]]), 3);
              if (ref == 0 || side == 0 || (side > 0) != (ref > 0)) strictly_inside = false;
            }
          }
          if (strictly_inside) throw NonConformingFacet("hanging node between cells");
        }
      }
    }
  }
}

inline CellComplex::Location CellComplex::locate(const VecQ& p) const {
  for (int a = dim; a < kMaxDim; ++a)
    if (p[a] != 0) return {Location::Outside, -1};
  // On-facet test first.
  std::vector<int> on;
  for (size_t fi = 0; fi < facets.size(); ++fi) {
    const Facet& f = facets[fi];
    if (dot(f.direction, p, dim) != f.offset) continue;
    // Within the facet's closed extent?
    bool inside_closed = false;
    for (const auto& piece : f.pieces) {
      // Solve barycentric coordinates exactly.
      if (dim == 1) {
        inside_closed = vec_eq(p, vertices[piece[0]]);
      } else if (dim == 2) {
        const VecQ& a = vertices[piece[0]];
        const VecQ& b = vertices[piece[1]];
        VecQ ab = vec_sub(b, a), ap = vec_sub(p, a);
        int ax = (ab[0] != 0) ? 0 : 1;
        Rational t = ap[ax] / ab[ax];
        if (t >= 0 && t <= 1 && vec_eq(vec_add(a, vec_scale(ab, t)), p)) inside_closed = true;
      } else {
        const VecQ& a = vertices[piece[0]];
        const VecQ& b = vertices[piece[1]];
        const VecQ& c = vertices[piece[2]];
        std::array<VecQ, kMaxDim> cols{vec_sub(b, a), vec_sub(c, a), f.direction};
        Rational det = det_cols(cols, 3);
        if (det == 0) continue;
        // Cramer solve for (s,t) in p - a = s(b-a) + t(c-a) + u*dir, expect u == 0.
        VecQ rhs = vec_sub(p, a);
        std::array<VecQ, kMaxDim> m1{rhs, vec_sub(c, a), f.direction};
        std::array<VecQ, kMaxDim> m2{vec_sub(b, a), rhs, f.direction};
        Rational s = det_cols(m1, 3) / det;
        Rational t = det_cols(m2, 3) / det;
        if (s >= 0 && t >= 0 && s + t <= 1) inside_closed = true;
      }
      if (inside_closed) break;
    }
    if (inside_closed) on.push_back((int)fi);
  }
  if (on.size() >= 2) return {Location::Skeleton, on[0]};
  if (on.size() == 1) {
    if (dim == 1) return {Location::FacetInterior, on[0]};
    // Relative boundary of the facet counts as skeleton.
    const Facet& f = facets[on[0]];
    for (int id : f.vertices)
      if (vec_eq(vertices[id], p)) return {Location::Skeleton, on[0]};
    if (dim == 3) {
      size_t m = f.vertices.size();
      for (size_t k = 0; k < m; ++k) {
        const VecQ& a = vertices[f.vertices[k]];
        const VecQ& b = vertices[f.vertices[(k + 1) % m]];
        VecQ ab = vec_sub(b, a), ap = vec_sub(p, a);
        std::array<VecQ, kMaxDim> span{ab, ap, VecQ{0, 0, 0}};
        if (vec_eq(cross_product(span, 3), {0, 0, 0})) {
          int ax = 0;
          while (ab[ax] == 0) ++ax;
          Rational t = ap[ax] / ab[ax];
          if (t >= 0 && t <= 1) return {Location::Skeleton, on[0]};
        }
      }
    }
    return {Location::FacetInterior, on[0]};
  }
  for (size_t ci = 0; ci < cells.size(); ++ci) {
    for (const auto& s : cells[ci].simplices) {
      // p inside closed simplex via barycentric signs.
      std::array<VecQ, kMaxDim> cols{};
      for (int k = 0; k < dim; ++k) cols[k] = vec_sub(vertices[s.v[k + 1]], vertices[s.v[0]]);
      Rational det = det_cols(cols, dim);
      if (det == 0) continue;
      VecQ rhs = vec_sub(p, vertices[s.v[0]]);
      std::array<Rational, kMaxDim> bary{};
      Rational sum = 0;
      bool ok = true;
      for (int k = 0; k < dim; ++k) {
        auto m = cols;
        m[k] = rhs;
        bary[k] = det_cols(m, dim) / det;
        if (bary[k] < 0) ok = false;
        sum += bary[k];
      }
      if (ok && sum <= 1) return {Location::CellInterior, (int)ci};
    }
  }
  return {Location::Outside, -1};
}

inline int CellComplex::locate_cell_numeric(const VecD& p, double tol) const {
  for (size_t ci = 0; ci < cells.size(); ++ci) {
    for (const auto& s : cells[ci].simplices) {
      std::array<std::array<double, 3>, 3> m{};
      VecD p0 = to_double(vertices[s.v[0]]);
      for (int k = 0; k < dim; ++k) {
        VecD col = to_double(vertices[s.v[k + 1]]);
        for (int a = 0; a < dim; ++a) m[a][k] = col[a] - p0[a];
      }
      // Solve m * bary = p - p0 by Cramer (dim <= 3).
      auto det3 = [&](const std::array<std::array<double, 3>, 3>& a) {
        if (dim == 1) return a[0][0];
        if (dim == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
               a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
      };
      double det = det3(m);
      if (std::abs(det) < 1e-300) continue;
      double sum = 0;
      bool ok = true;
      for (int k = 0; k < dim && ok; ++k) {
        auto mk = m;
        for (int a = 0; a < dim; ++a) mk[a][k] = p[a] - p0[a];
        double b = det3(mk) / det;
        if (b < -tol) ok = false;
        sum += b;
      }
      if (ok && sum <= 1 + tol) return (int)ci;
    }
  }
  return -1;
}

inline bool CellComplex::same_geometry(const CellComplex& o) const {
  if (this == &o) return true;
  if (dim != o.dim || vertices.size() != o.vertices.size() || cells.size() != o.cells.size())
    return false;
  std::vector<int> map_to(vertices.size(), -1);
  for (size_t i = 0; i < vertices.size(); ++i) {
    for (size_t j = 0; j < o.vertices.size(); ++j)
      if (vec_eq(vertices[i], o.vertices[j])) {
        map_to[i] = (int)j;
        break;
      }
    if (map_to[i] < 0) return false;
  }
  std::set<std::vector<int>> mine, theirs;
  for (const auto& c : cells) {
    std::vector<int> ids;
    for (int v : c.vertices) ids.push_back(map_to[v]);
    std::sort(ids.begin(), ids.end());
    mine.insert(ids);
  }
  for (const auto& c : o.cells) {
    std::vector<int> ids = c.vertices;
    std::sort(ids.begin(), ids.end());
    theirs.insert(ids);
  }
  return mine == theirs;
}

// ---------------------------------------------------------------------------
// Integration over cells and facets.
//
// Facet integrals are taken against sigma_F := H^{N-1} / ||direction||_2.
// With that normalization every jump-measure pairing with a polynomial is a
// rational number: the sub-simplex Jacobian relative to sigma_F is the exact
// ratio |lambda| with cross(span) = lambda * direction.

namespace detail {

inline Rational facet_piece_lambda(const CellComplex& cx, const Facet& f,
                                   const std::array<int, kMaxDim>& piece) {
  if (cx.dim == 1) return 1;
  std::array<VecQ, kMaxDim> span{};
  for (int j = 0; j + 1 < cx.dim; ++j)
    span[j] = vec_sub(cx.vertices[piece[j + 1]], cx.vertices[piece[0]]);
  VecQ cr = cross_product(span, cx.dim);
  int ax = 0;
  while (f.direction[ax] == 0) ++ax;
  return boost::multiprecision::abs(cr[ax] / f.direction[ax]);
}

}  // namespace detail

inline double integrate_cell(const CellComplex& cx, int cell, const std::function<double(const VecD&)>& fn,
                             int order) {
  const auto& rule = QuadratureRule::get(order).simplex[cx.dim];
  double acc = 0;
  for (const auto& s : cx.cells[cell].simplices) {
    VecD p0 = to_double(cx.vertices[s.v[0]]);
    std::array<VecD, kMaxDim> cols{};
    std::array<VecQ, kMaxDim> colsq{};
    for (int k = 0; k < cx.dim; ++k) {
      colsq[k] = vec_sub(cx.vertices[s.v[k + 1]], cx.vertices[s.v[0]]);
      cols[k] = to_double(colsq[k]);
    }
    double jac = std::abs(to_double(det_cols(colsq, cx.dim)));
    for (const auto& node : rule) {
      VecD x = p0;
      for (int k = 0; k < cx.dim; ++k)
        for (int a = 0; a < cx.dim; ++a) x[a] += cols[k][a] * node.x[k];
      acc += node.w * jac * fn(x);
    }
  }
  return acc;
}

inline Rational integrate_cell_exact(const CellComplex& cx, int cell, const Polynomial& p) {
  Rational acc = 0;
  for (const auto& s : cx.cells[cell].simplices) {
    std::array<VecQ, kMaxDim> cols{};
    for (int k = 0; k < cx.dim; ++k) cols[k] = vec_sub(cx.vertices[s.v[k + 1]], cx.vertices[s.v[0]]);
    auto subs = affine_substitution(cx.vertices[s.v[0]], cols, cx.dim);
    Polynomial q = p.compose(subs);
    acc += boost::multiprecision::abs(det_cols(cols, cx.dim)) * integrate_unit_simplex(q, cx.dim);
  }
  return acc;
}

/// Integral against sigma_F = H^{N-1}/||d|| (numeric).
inline double integrate_facet_sigma(const CellComplex& cx, int facet,
                                    const std::function<double(const VecD&)>& fn, int order) {
  const Facet& f = cx.facets[facet];
  if (cx.dim == 1) return fn(to_double(cx.vertices[f.pieces[0][0]]));
  const auto& rule = QuadratureRule::get(order).simplex[cx.dim - 1];
  double acc = 0;
  for (const auto& piece : f.pieces) {
    double lam = to_double(detail::facet_piece_lambda(cx, f, piece));
    VecD p0 = to_double(cx.vertices[piece[0]]);
    std::array<VecD, kMaxDim> cols{};
    for (int k = 0; k + 1 < cx.dim; ++k)
      cols[k] = to_double(vec_sub(cx.vertices[piece[k + 1]], cx.vertices[piece[0]]));
    for (const auto& node : rule) {
      VecD x = p0;
      for (int k = 0; k + 1 < cx.dim; ++k)
        for (int a = 0; a < cx.dim; ++a) x[a] += cols[k][a] * node.x[k];
      acc += node.w * lam * fn(x);
    }
  }
  return acc;
}

inline Rational integrate_facet_sigma_exact(const CellComplex& cx, int facet, const Polynomial& p) {
  const Facet& f = cx.facets[facet];
  if (cx.dim == 1) return p.eval(cx.vertices[f.pieces[0][0]]);
  Rational acc = 0;
  for (const auto& piece : f.pieces) {
    Rational lam = detail::facet_piece_lambda(cx, f, piece);
    std::array<VecQ, kMaxDim> cols{};
    for (int k = 0; k + 1 < cx.dim; ++k)
      cols[k] = vec_sub(cx.vertices[piece[k + 1]], cx.vertices[piece[0]]);
    auto subs = affine_substitution(cx.vertices[piece[0]], cols, cx.dim - 1);
    acc += lam * integrate_unit_simplex(p.compose(subs), cx.dim - 1);
  }
  return acc;
}

/// Integral against the genuine surface measure H^{N-1}.
inline double integrate_facet_H(const CellComplex& cx, int facet,
                                const std::function<double(const VecD&)>& fn, int order) {
  const Facet& f = cx.facets[facet];
  double dn = 0;
  for (int a = 0; a < cx.dim; ++a) dn += to_double(f.direction[a]) * to_double(f.direction[a]);
  return integrate_facet_sigma(cx, facet, fn, order) * std::sqrt(dn);
}

/// Spec-facing helpers with the declared-order self check.
inline double integrate_cell_checked(const CellComplex& cx, int cell,
                                     const std::function<double(const VecD&)>& fn, int order) {
  QuadratureRule::get(order);  // the rule self-checks monomial exactness on construction
  return integrate_cell(cx, cell, fn, order);
}

// ---------------------------------------------------------------------------
// Test-function panels.

/// Monomials of total degree <= degree, scaled to the domain bounding box.
inline std::vector<Polynomial> monomial_panel(const CellComplex& cx, int degree) {
  VecQ center{0, 0, 0}, half{1, 1, 1};
  for (int a = 0; a < cx.dim; ++a) {
    center[a] = (cx.bbox_lo[a] + cx.bbox_hi[a]) / 2;
    half[a] = (cx.bbox_hi[a] - cx.bbox_lo[a]) / 2;
    if (half[a] == 0) half[a] = 1;
  }
  std::vector<Polynomial> scaled(kMaxDim, Polynomial());
  for (int a = 0; a < kMaxDim; ++a) {
    if (a < cx.dim)
      scaled[a] = Polynomial::variable(a, Rational(1) / half[a]) -
                  Polynomial::constant(center[a] / half[a]);
  }
  std::vector<Polynomial> panel;
  Exponents e{0, 0, 0};
  for (e[0] = 0; e[0] <= degree; ++e[0])
    for (e[1] = 0; e[1] <= (cx.dim > 1 ? degree - e[0] : 0); ++e[1])
      for (e[2] = 0; e[2] <= (cx.dim > 2 ? degree - e[0] - e[1] : 0); ++e[2])
        panel.push_back(Polynomial::monomial(e, 1).compose(scaled));
  return panel;
}

/// Product of the distinct boundary hyperplane functions: a polynomial
/// vanishing on the whole domain boundary (convex domains).
inline Polynomial boundary_bubble(const CellComplex& cx) {
  Polynomial b = Polynomial::constant(1);
  for (const auto& [d, c] : cx.boundary_planes) {
    Polynomial plane = Polynomial::constant(-c);
    for (int a = 0; a < cx.dim; ++a) plane += Polynomial::variable(a, d[a]);
    b = b * plane;
  }
  // Normalize: unit value at the domain barycenter keeps residuals scaled.
  VecQ mid{0, 0, 0};
  for (int a = 0; a < cx.dim; ++a) mid[a] = (cx.bbox_lo[a] + cx.bbox_hi[a]) / 2;
  Rational v = b.eval(mid);
  if (v != 0) b = b * (Rational(1) / v);
  return b;
}

/// Panel of compactly supported polynomial tests (bubble times monomials).
inline std::vector<Polynomial> bubble_panel(const CellComplex& cx, int degree) {
  Polynomial bubble = boundary_bubble(cx);
  std::vector<Polynomial> panel = monomial_panel(cx, degree);
  for (auto& p : panel) p = p * bubble;
  return panel;
}

}  // namespace dccalc
