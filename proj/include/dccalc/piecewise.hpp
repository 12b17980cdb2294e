#pragma once

#include "dccalc/complex.hpp"
#include "dccalc/rationalfn.hpp"

namespace dccalc {

enum class Side { Minus, Plus };

struct ClassFlags {
  bool is_continuous = false;
  bool is_DC = false;
  bool is_BV0 = false;
  bool is_Cw = true;  // bounded rational pieces on a finite complex
  bool is_Cwo = false;
  bool is_DC0 = false;
};

namespace detail {

/// Restriction of an ambient rational function to a facet, expressed in the
/// facet's reference parameters. Used for exact trace comparisons.
inline RationalFn restrict_to_facet(const CellComplex& cx, const Facet& f,
                                    const std::array<int, kMaxDim>& piece, const RationalFn& fn) {
  std::array<VecQ, kMaxDim> cols{};
  for (int j = 0; j + 1 < cx.dim; ++j)
    cols[j] = vec_sub(cx.vertices[piece[j + 1]], cx.vertices[piece[0]]);
  auto subs = affine_substitution(cx.vertices[piece[0]], cols, cx.dim - 1);
  return fn.compose(subs);
}

}  // namespace detail

/// Cellwise rational function on a complex. Class flags are derived at
/// construction from exact facet-trace comparisons.
class PiecewiseScalar {
 public:
  PiecewiseScalar() = default;

  PiecewiseScalar(std::shared_ptr<const CellComplex> complex, std::vector<RationalFn> pieces)
      : complex_(std::move(complex)), pieces_(std::move(pieces)) {
    if (pieces_.size() != complex_->cells.size())
      throw Error("piece count must match cell count");
    check_denominators();
    classify_now();
  }

  static PiecewiseScalar constant(std::shared_ptr<const CellComplex> cx, Rational c) {
    std::vector<RationalFn> pieces(cx->cells.size(), RationalFn::constant(c));
    return PiecewiseScalar(std::move(cx), std::move(pieces));
  }

  static PiecewiseScalar coordinate(std::shared_ptr<const CellComplex> cx, int var) {
    std::vector<RationalFn> pieces(cx->cells.size(), RationalFn::variable(var));
    return PiecewiseScalar(std::move(cx), std::move(pieces));
  }

  static PiecewiseScalar from_global(std::shared_ptr<const CellComplex> cx, RationalFn fn) {
    std::vector<RationalFn> pieces(cx->cells.size(), fn);
    return PiecewiseScalar(std::move(cx), std::move(pieces));
  }

  const std::shared_ptr<const CellComplex>& complex() const { return complex_; }
  const std::vector<RationalFn>& pieces() const { return pieces_; }
  const RationalFn& piece(int cell) const { return pieces_.at(cell); }
  const ClassFlags& flags() const { return flags_; }
  const std::vector<int>& jump_facets() const { return jump_facets_; }
  bool jumps_on(int facet) const {
    return std::find(jump_facets_.begin(), jump_facets_.end(), facet) != jump_facets_.end();
  }

  /// One-sided trace on a facet as the incident cell's piece (ambient form).
  const RationalFn& trace(int facet, Side side) const {
    const Facet& f = complex_->facets.at(facet);
    int cell = (side == Side::Minus) ? f.minus_cell : f.plus_cell;
    if (cell < 0) throw BoundaryFacetSideMissing();
    return pieces_[cell];
  }

  /// Precise representative on a facet: the half sum of the one-sided
  /// traces, as an ambient rational function valid on the facet.
  RationalFn precise_on_facet(int facet) const {
    const Facet& f = complex_->facets.at(facet);
    if (!f.interior()) return pieces_[f.minus_cell];
    return (pieces_[f.minus_cell] + pieces_[f.plus_cell]) * Rational(1, 2);
  }

  Rational precise_value(const VecQ& p) const {
    auto loc = complex_->locate(p);
    switch (loc.kind) {
      case CellComplex::Location::CellInterior:
        return pieces_[loc.id].eval(p);
      case CellComplex::Location::FacetInterior:
        return precise_on_facet(loc.id).eval(p);
      case CellComplex::Location::Skeleton:
        throw UndefinedOnLowerSkeleton();
      default:
        throw Error("point outside the domain");
    }
  }

  /// Numeric evaluation for quadrature nodes; nodes on a facet use the
  /// precise representative of that facet.
  double eval_in_cell(int cell, const VecD& x) const { return pieces_[cell].eval(x); }
  double eval_precise_on_facet(int facet, const VecD& x) const {
    const Facet& f = complex_->facets[facet];
    if (!f.interior()) return pieces_[f.minus_cell].eval(x);
    return 0.5 * (pieces_[f.minus_cell].eval(x) + pieces_[f.plus_cell].eval(x));
  }

  PiecewiseScalar derivative_piecewise(int var) const {
    std::vector<RationalFn> d;
    d.reserve(pieces_.size());
    for (const auto& p : pieces_) d.push_back(p.derivative(var));
    return PiecewiseScalar(complex_, std::move(d));
  }

  friend PiecewiseScalar operator*(const PiecewiseScalar& a, const Rational& s) {
    std::vector<RationalFn> p;
    for (const auto& q : a.pieces_) p.push_back(q * s);
    return PiecewiseScalar(a.complex_, std::move(p));
  }

  bool same_function(const PiecewiseScalar& o) const {
    if (!complex_->same_geometry(*o.complex_)) return false;
    for (size_t i = 0; i < pieces_.size(); ++i)
      if (!pieces_[i].equals(o.pieces_[i])) return false;
    return true;
  }

 private:
  void check_denominators() const {
    // Exact sign tests at vertices, numeric at quadrature nodes.
    for (size_t ci = 0; ci < complex_->cells.size(); ++ci) {
      const auto& den = pieces_[ci].den();
      if (den.is_constant()) continue;
      int sign = 0;
      for (int id : complex_->cells[ci].vertices) {
        Rational v = den.eval(complex_->vertices[id]);
        if (v == 0) throw Error("piece denominator vanishes at a cell vertex");
        int s = v > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        if (s != sign) throw Error("piece denominator changes sign on a cell");
      }
      double bound = 0;
      integrate_cell(*complex_, (int)ci,
                     [&](const VecD& x) {
                       double v = den.eval(x);
                       if (v * sign <= 0) bound = 1;
                       return 0.0;
                     },
                     8);
      if (bound != 0) throw Error("piece denominator vanishes inside a cell");
    }
  }

  void classify_now() {
    jump_facets_.clear();
    bool grad_continuous = true;
    for (size_t fi = 0; fi < complex_->facets.size(); ++fi) {
      const Facet& f = complex_->facets[fi];
      if (!f.interior()) continue;
      bool matches = true;
      for (const auto& piece : f.pieces) {
        RationalFn tm = detail::restrict_to_facet(*complex_, f, piece, pieces_[f.minus_cell]);
        RationalFn tp = detail::restrict_to_facet(*complex_, f, piece, pieces_[f.plus_cell]);
        if (!tm.equals(tp)) matches = false;
      }
      if (!matches) jump_facets_.push_back((int)fi);
      if (grad_continuous) {
        for (int v = 0; v < complex_->dim && grad_continuous; ++v) {
          for (const auto& piece : f.pieces) {
            RationalFn dm = detail::restrict_to_facet(*complex_, f, piece,
                                                      pieces_[f.minus_cell].derivative(v));
            RationalFn dp = detail::restrict_to_facet(*complex_, f, piece,
                                                      pieces_[f.plus_cell].derivative(v));
            if (!dm.equals(dp)) {
              grad_continuous = false;
              break;
            }
          }
        }
      }
    }
    flags_.is_continuous = jump_facets_.empty();
    flags_.is_Cw = true;
    flags_.is_Cwo = flags_.is_continuous;
    flags_.is_BV0 = flags_.is_continuous;
    // Continuous with smooth bounded pieces on closed cells: a DC function
    // on this finite representation.
    flags_.is_DC = flags_.is_continuous;
    flags_.is_DC0 = flags_.is_continuous && grad_continuous;
  }

  std::shared_ptr<const CellComplex> complex_;
  std::vector<RationalFn> pieces_;
  ClassFlags flags_;
  std::vector<int> jump_facets_;
};

// ---------------------------------------------------------------------------
// Common refinement of two complexes over the same domain.

namespace detail {

inline int find_or_add_vertex(std::vector<VecQ>& verts, const VecQ& p) {
  for (size_t i = 0; i < verts.size(); ++i)
    if (vec_eq(verts[i], p)) return (int)i;
  verts.push_back(p);
  return (int)verts.size() - 1;
}

}  // namespace detail

/// Overlay refinement: cells are the pairwise intersections. Supported for
/// dim <= 2; identical complexes short-circuit in any dimension.
inline std::shared_ptr<const CellComplex> common_refinement(
    const std::shared_ptr<const CellComplex>& a, const std::shared_ptr<const CellComplex>& b) {
  if (a->same_geometry(*b)) return a;
  if (a->dim != b->dim) throw IncompatibleComplexes("dimension mismatch");
  if (a->domain_volume() != b->domain_volume())
    throw IncompatibleComplexes("domains differ");
  int dim = a->dim;
  if (dim > 2) throw IncompatibleComplexes("refinement beyond dim 2 is not supported");

  std::vector<VecQ> verts;
  std::vector<std::vector<int>> cells;
  for (const auto& ca : a->cells) {
    for (const auto& cb : b->cells) {
      if (dim == 1) {
        Rational lo = std::max(a->vertices[ca.vertices[0]][0], b->vertices[cb.vertices[0]][0],
                               std::less<Rational>());
        Rational hi = std::min(a->vertices[ca.vertices[1]][0], b->vertices[cb.vertices[1]][0],
                               std::less<Rational>());
        Rational alo = std::min(a->vertices[ca.vertices[0]][0], a->vertices[ca.vertices[1]][0],
                                std::less<Rational>());
        Rational ahi = std::max(a->vertices[ca.vertices[0]][0], a->vertices[ca.vertices[1]][0],
                                std::less<Rational>());
        Rational blo = std::min(b->vertices[cb.vertices[0]][0], b->vertices[cb.vertices[1]][0],
                                std::less<Rational>());
        Rational bhi = std::max(b->vertices[cb.vertices[0]][0], b->vertices[cb.vertices[1]][0],
                                std::less<Rational>());
        lo = std::max(alo, blo, std::less<Rational>());
        hi = std::min(ahi, bhi, std::less<Rational>());
        if (lo < hi) {
          int v0 = detail::find_or_add_vertex(verts, {lo, 0, 0});
          int v1 = detail::find_or_add_vertex(verts, {hi, 0, 0});
          cells.push_back({v0, v1});
        }
        continue;
      }
      // dim == 2: clip cell a's polygon by each edge halfplane of cell b.
      std::vector<GSimplex> region;
      for (const auto& s : ca.simplices) {
        GSimplex g;
        for (int k = 0; k <= dim; ++k) g.p[k] = a->vertices[s.v[k]];
        region.push_back(g);
      }
      size_t m = cb.vertices.size();
      for (size_t k = 0; k < m && !region.empty(); ++k) {
        const VecQ& p0 = b->vertices[cb.vertices[k]];
        const VecQ& p1 = b->vertices[cb.vertices[(k + 1) % m]];
        VecQ edge = vec_sub(p1, p0);
        VecQ n{edge[1], -edge[0], 0};  // outward for CCW polygons
        Rational c = dot(n, p0, 2);
        region = clip_simplices_halfspace(region, 2, n, c);
      }
      if (region.empty()) continue;
      // Merge the clipped simplices into one convex polygon.
      std::vector<VecQ> pts;
      for (const auto& g : region)
        for (int k = 0; k <= dim; ++k) {
          bool dup = false;
          for (const auto& q : pts)
            if (vec_eq(q, g.p[k])) dup = true;
          if (!dup) pts.push_back(g.p[k]);
        }
      Rational area = 0;
      for (const auto& g : region) {
        std::array<VecQ, kMaxDim> cols{vec_sub(g.p[1], g.p[0]), vec_sub(g.p[2], g.p[0]), VecQ{0, 0, 0}};
        area += boost::multiprecision::abs(det_cols(cols, 2));
      }
      if (area == 0) continue;
      std::vector<int> ids;
      for (const auto& p : pts) ids.push_back(detail::find_or_add_vertex(verts, p));
      cells.push_back(ids);
    }
  }
  try {
    return CellComplex::build(dim, verts, cells);
  } catch (const Error& e) {
    throw IncompatibleComplexes(std::string("refinement is not conforming: ") + e.what());
  }
}

/// Re-reads a piecewise function on a refinement of its complex.
inline PiecewiseScalar transfer(const PiecewiseScalar& f,
                                const std::shared_ptr<const CellComplex>& fine) {
  if (f.complex().get() == fine.get()) return f;
  std::vector<RationalFn> pieces;
  pieces.reserve(fine->cells.size());
  for (const auto& cell : fine->cells) {
    auto loc = f.complex()->locate(cell.barycenter);
    if (loc.kind != CellComplex::Location::CellInterior)
      throw IncompatibleComplexes("refinement cell barycenter not interior to a coarse cell");
    pieces.push_back(f.piece(loc.id));
  }
  return PiecewiseScalar(fine, std::move(pieces));
}

inline std::pair<PiecewiseScalar, PiecewiseScalar> on_common_complex(const PiecewiseScalar& f,
                                                                     const PiecewiseScalar& h) {
  if (f.complex().get() == h.complex().get()) return {f, h};
  auto fine = common_refinement(f.complex(), h.complex());
  return {transfer(f, fine), transfer(h, fine)};
}

inline PiecewiseScalar operator+(const PiecewiseScalar& a, const PiecewiseScalar& b) {
  auto [f, h] = on_common_complex(a, b);
  std::vector<RationalFn> p;
  for (size_t i = 0; i < f.pieces().size(); ++i) p.push_back(f.pieces()[i] + h.pieces()[i]);
  return PiecewiseScalar(f.complex(), std::move(p));
}

inline PiecewiseScalar operator-(const PiecewiseScalar& a, const PiecewiseScalar& b) {
  auto [f, h] = on_common_complex(a, b);
  std::vector<RationalFn> p;
  for (size_t i = 0; i < f.pieces().size(); ++i) p.push_back(f.pieces()[i] - h.pieces()[i]);
  return PiecewiseScalar(f.complex(), std::move(p));
}

/// Cellwise product; the DC flag propagates through the algebra property.
inline PiecewiseScalar product(const PiecewiseScalar& a, const PiecewiseScalar& b) {
  auto [f, h] = on_common_complex(a, b);
  std::vector<RationalFn> p;
  for (size_t i = 0; i < f.pieces().size(); ++i) p.push_back(f.pieces()[i] * h.pieces()[i]);
  return PiecewiseScalar(f.complex(), std::move(p));
}

inline ClassFlags classify(const PiecewiseScalar& f) { return f.flags(); }

}  // namespace dccalc
