#pragma once

#include "dccalc/measure.hpp"

namespace dccalc {

namespace detail {

template <typename T>
T det_matrix(const std::array<std::array<T, kMaxDim>, kMaxDim>& m, int dim) {
  if (dim == 1) return m[0][0];
  if (dim == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// Adjugate: inverse times determinant.
template <typename T>
std::array<std::array<T, kMaxDim>, kMaxDim> adjugate(
    const std::array<std::array<T, kMaxDim>, kMaxDim>& m, int dim, const T& one) {
  std::array<std::array<T, kMaxDim>, kMaxDim> a{};
  if (dim == 1) {
    a[0][0] = one;
    return a;
  }
  if (dim == 2) {
    a[0][0] = m[1][1];
    a[0][1] = m[0][1] * -1;
    a[1][0] = m[1][0] * -1;
    a[1][1] = m[0][0];
    return a;
  }
  auto c = [&](int i, int j) {
    int r0 = (i + 1) % 3, r1 = (i + 2) % 3, c0 = (j + 1) % 3, c1 = (j + 2) % 3;
    return m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
  };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = c(j, i);
  return a;
}

inline bool cell_contains(const CellComplex& cx, int cell, const VecQ& p) {
  for (const auto& s : cx.cells[cell].simplices) {
    std::array<VecQ, kMaxDim> cols{};
    for (int k = 0; k < cx.dim; ++k) cols[k] = vec_sub(cx.vertices[s.v[k + 1]], cx.vertices[s.v[0]]);
    Rational det = det_cols(cols, cx.dim);
    if (det == 0) continue;
    VecQ rhs = vec_sub(p, cx.vertices[s.v[0]]);
    Rational sum = 0;
    bool ok = true;
    for (int k = 0; k < cx.dim && ok; ++k) {
      auto m = cols;
      m[k] = rhs;
      Rational b = det_cols(m, cx.dim) / det;
      if (b < 0) ok = false;
      sum += b;
    }
    if (ok && sum <= 1) return true;
  }
  return false;
}

}  // namespace detail

/// Chart-change map between two complexes. The affine tier is exact with an
/// exact inverse; the polynomial tier keeps dF, det dF and adj(dF) symbolic
/// and inverts pointwise with damped Newton. Components are continuous with
/// continuous gradient by construction on both tiers.
class TransitionMap {
 public:
  static TransitionMap affine(std::shared_ptr<const CellComplex> source,
                              std::shared_ptr<const CellComplex> target,
                              const std::array<VecQ, kMaxDim>& rows, const VecQ& shift) {
    TransitionMap t;
    t.affine_ = true;
    t.source_ = std::move(source);
    t.target_ = std::move(target);
    int dim = t.source_->dim;
    for (int i = 0; i < dim; ++i) {
      Polynomial p = Polynomial::constant(shift[i]);
      for (int j = 0; j < dim; ++j) p += Polynomial::variable(j, rows[i][j]);
      t.comps_.push_back(p);
    }
    std::array<std::array<Rational, kMaxDim>, kMaxDim> a{};
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) a[i][j] = rows[i][j];
    Rational det = detail::det_matrix(a, dim);
    if (det == 0) throw NotHomeomorphic("affine map is singular");
    auto adj = detail::adjugate(a, dim, Rational(1));
    for (int i = 0; i < dim; ++i) {
      // F^{-1}(y) = A^{-1}(y - b)
      Polynomial p;
      for (int j = 0; j < dim; ++j)
        p += Polynomial::variable(j, adj[i][j] / det) + Polynomial::constant(-adj[i][j] * shift[j] / det);
      t.inverse_comps_.push_back(p);
    }
    t.finish();
    return t;
  }

  static TransitionMap polynomial(std::shared_ptr<const CellComplex> source,
                                  std::shared_ptr<const CellComplex> target,
                                  std::vector<Polynomial> comps) {
    TransitionMap t;
    t.affine_ = false;
    t.source_ = std::move(source);
    t.target_ = std::move(target);
    t.comps_ = std::move(comps);
    if ((int)t.comps_.size() != t.source_->dim)
      throw Error("transition needs one component per dimension");
    t.finish();
    return t;
  }

  bool is_affine() const { return affine_; }
  int sign_of_det() const { return sign_; }
  const std::shared_ptr<const CellComplex>& source() const { return source_; }
  const std::shared_ptr<const CellComplex>& target() const { return target_; }
  const std::vector<Polynomial>& components() const { return comps_; }
  const Polynomial& det_dF() const { return det_; }
  const Polynomial& dF(int i, int j) const { return dF_[i][j]; }
  const Polynomial& d2F(int theta, int a, int b) const { return d2F_[theta][a][b]; }

  /// (dF^{-1})_{k,theta} at F(x), i.e. dF^{-1}_k/dy_theta read back on the
  /// source: adj(dF)_{k,theta} / det dF, an exact rational function.
  RationalFn inv_dF_entry(int k, int theta) const { return RationalFn(adj_[k][theta], det_); }

  /// |det dF| as a rational function (the certified sign is constant).
  RationalFn abs_det_dF() const { return RationalFn(det_ * Rational(sign_)); }

  VecQ apply(const VecQ& x) const {
    VecQ y{0, 0, 0};
    for (int i = 0; i < source_->dim; ++i) y[i] = comps_[i].eval(x);
    return y;
  }
  VecD apply(const VecD& x) const {
    VecD y{0, 0, 0};
    for (int i = 0; i < source_->dim; ++i) y[i] = comps_[i].eval(x);
    return y;
  }

  /// Inverse point evaluation: exact affine formula or damped Newton from
  /// cell-barycenter seeds (1e-12 residual, 50 iterations).
  VecD invert(const VecD& y) const {
    int dim = source_->dim;
    if (affine_) {
      VecD x{0, 0, 0};
      for (int i = 0; i < dim; ++i) x[i] = inverse_comps_[i].eval(y);
      return x;
    }
    double scale = 1.0;
    for (int a = 0; a < dim; ++a)
      scale = std::max(scale, std::abs(to_double(target_->bbox_hi[a] - target_->bbox_lo[a])));
    for (const auto& cell : source_->cells) {
      VecD x = to_double(cell.barycenter);
      double res = 1e300;
      for (int it = 0; it < 50; ++it) {
        VecD fx = apply(x);
        VecD r{0, 0, 0};
        res = 0;
        for (int a = 0; a < dim; ++a) {
          r[a] = y[a] - fx[a];
          res += r[a] * r[a];
        }
        res = std::sqrt(res);
        if (res < 1e-12 * scale) return x;
        // Solve dF(x) dx = r.
        std::array<std::array<double, kMaxDim>, kMaxDim> J{};
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j) J[i][j] = dF_[i][j].eval(x);
        double det = detail::det_matrix(J, dim);
        if (std::abs(det) < 1e-300) break;
        auto adj = detail::adjugate(J, dim, 1.0);
        VecD dx{0, 0, 0};
        for (int i = 0; i < dim; ++i) {
          for (int j = 0; j < dim; ++j) dx[i] += adj[i][j] * r[j];
          dx[i] /= det;
        }
        double damp = 1.0;
        for (int half = 0; half < 8; ++half) {
          VecD cand{0, 0, 0};
          for (int a = 0; a < dim; ++a) cand[a] = x[a] + damp * dx[a];
          VecD fc = apply(cand);
          double rc = 0;
          for (int a = 0; a < dim; ++a) rc += (y[a] - fc[a]) * (y[a] - fc[a]);
          if (std::sqrt(rc) < res) {
            x = cand;
            break;
          }
          damp *= 0.5;
          if (half == 7) x = cand;
        }
      }
      VecD fx = apply(x);
      double res2 = 0;
      for (int a = 0; a < dim; ++a) res2 += (y[a] - fx[a]) * (y[a] - fx[a]);
      if (std::sqrt(res2) < 1e-12 * scale) return x;
    }
    throw InversionDiverged("Newton inversion failed from all seeds");
  }

  int target_cell_of(int source_cell) const { return cell_map_.at(source_cell); }
  int target_facet_of(int source_facet) const { return facet_map_.at(source_facet); }

  /// f o F, exact on both tiers (polynomial substitution).
  PiecewiseScalar pullback_function(const PiecewiseScalar& f) const {
    if (f.complex().get() != target_.get() && !f.complex()->same_geometry(*target_))
      throw IncompatibleComplexes("pullback_function: function not on the target complex");
    std::vector<RationalFn> pieces;
    pieces.reserve(source_->cells.size());
    for (size_t sc = 0; sc < source_->cells.size(); ++sc)
      pieces.push_back(f.piece(cell_map_[sc]).compose(subs_));
    return PiecewiseScalar(source_, std::move(pieces));
  }

  /// F*(mu) = (F^{-1})_sharp(|det dF^{-1}| mu). The absolutely continuous
  /// density pulls back by composition; jump densities transport onto the
  /// preimage facets with the exact normal-transport factor.
  MeasureField pullback_measure(const MeasureField& mu) const {
    if (mu.complex().get() != target_.get() && !mu.complex()->same_geometry(*target_))
      throw IncompatibleComplexes("pullback_measure: measure not on the target complex");
    MeasureField out(source_);
    for (size_t sc = 0; sc < source_->cells.size(); ++sc) {
      const Density& d = mu.ac(cell_map_[sc]);
      if (d.is_zero()) continue;
      if (d.is_sym()) {
        out.ac((int)sc) = Density::sym(d.fn().compose(subs_));
      } else {
        auto self = *this;
        out.ac((int)sc) = Density::num([self, d](const VecD& x) { return d.eval(self.apply(x)); });
      }
    }
    // Jump carriers must pull back to facets of the source complex.
    std::vector<bool> covered(target_->facets.size(), true);
    for (size_t tf = 0; tf < target_->facets.size(); ++tf)
      if (mu.jump_nonzero_on((int)tf)) covered[tf] = false;
    for (size_t sf = 0; sf < source_->facets.size(); ++sf) {
      int tf = facet_map_[sf];
      if (tf < 0) continue;
      const Density& j = mu.jump(tf);
      if (j.is_zero()) continue;
      covered[tf] = true;
      out.jump((int)sf) = transport_jump_density(j, (int)sf, tf);
    }
    for (size_t tf = 0; tf < target_->facets.size(); ++tf)
      if (!covered[tf])
        throw NonConformingFacet("jump carrier preimage is not a facet of the source complex");
    return out;
  }

  /// F_sharp(mu) with numeric densities on the target carriers.
  MeasureField pushforward(const MeasureField& mu) const {
    if (mu.complex().get() != source_.get() && !mu.complex()->same_geometry(*source_))
      throw IncompatibleComplexes("pushforward: measure not on the source complex");
    MeasureField out(target_);
    auto self = *this;
    for (size_t tc = 0; tc < target_->cells.size(); ++tc) {
      // density(y) = ac(F^{-1}(y)) / |det dF(F^{-1}(y))|
      bool any = false;
      for (size_t sc = 0; sc < source_->cells.size(); ++sc)
        if (cell_map_[sc] == (int)tc && !mu.ac((int)sc).is_zero()) any = true;
      if (!any) continue;
      out.ac((int)tc) = Density::num([self, mu](const VecD& y) {
        VecD x = self.invert(y);
        int sc = self.source()->locate_cell_numeric(x, 1e-9);
        if (sc < 0) return 0.0;
        double det = std::abs(self.det_dF().eval(x));
        return mu.ac(sc).eval(x) / det;
      });
    }
    for (size_t sf = 0; sf < source_->facets.size(); ++sf) {
      if (mu.jump((int)sf).is_zero()) continue;
      int tf = facet_map_[sf];
      if (tf < 0) throw NonConformingFacet("jump carrier image is not a facet of the target complex");
      // Inverse transport: density_t(y) = j_s(x) * |d_t[ax]| * |det dF(x)| /
      // |(adj dF)^T d_s)[ax]| evaluated at x = F^{-1}(y); this inverts the
      // pullback factor.
      const Facet& fs = source_->facets[sf];
      const Facet& ft = target_->facets[tf];
      int ax = 0;
      while (ft.direction[ax] == 0) ++ax;
      Polynomial transported;  // (adj^T d_s)[ax]
      for (int k = 0; k < source_->dim; ++k)
        transported += adj_[k][ax] * Polynomial::constant(fs.direction[k]);
      double dt_ax = to_double(ft.direction[ax]);
      const Density j = mu.jump((int)sf);
      auto self2 = *this;
      Density prev = out.jump(tf);
      out.jump(tf) = prev + Density::num([self2, j, transported, dt_ax](const VecD& y) {
        VecD x = self2.invert(y);
        double num = std::abs(transported.eval(x));
        double det = std::abs(self2.det_dF().eval(x));
        if (num == 0) return 0.0;
        return j.eval(x) * std::abs(dt_ax) * det / num;
      });
    }
    return out;
  }

  /// <F_sharp mu, phi> computed directly on the source carriers.
  double pushforward_pairing(const MeasureField& mu, const std::function<double(const VecD&)>& phi,
                             int order = 10) const {
    double acc = 0;
    for (size_t sc = 0; sc < source_->cells.size(); ++sc) {
      if (mu.ac((int)sc).is_zero()) continue;
      acc += integrate_cell(*source_, (int)sc,
                            [&](const VecD& x) { return phi(apply(x)) * mu.ac((int)sc).eval(x); },
                            order);
    }
    for (size_t sf = 0; sf < source_->facets.size(); ++sf) {
      if (mu.jump((int)sf).is_zero()) continue;
      acc += integrate_facet_sigma(*source_, (int)sf,
                                   [&](const VecD& x) { return phi(apply(x)) * mu.jump((int)sf).eval(x); },
                                   order);
    }
    return acc;
  }

  /// Largest stretch factor: exact-ish operator norm on the affine tier,
  /// sampled over the quadrature lattice otherwise.
  double lipschitz_constant() const {
    auto opnorm = [&](const VecD& x) {
      int dim = source_->dim;
      std::array<std::array<double, kMaxDim>, kMaxDim> a{};
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a[i][j] = dF_[i][j].eval(x);
      // power iteration on A^T A
      std::array<double, kMaxDim> v{1, 1, 1};
      double lam = 0;
      for (int it = 0; it < 200; ++it) {
        std::array<double, kMaxDim> av{0, 0, 0}, atav{0, 0, 0};
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j) av[i] += a[i][j] * v[j];
        for (int j = 0; j < dim; ++j)
          for (int i = 0; i < dim; ++i) atav[j] += a[i][j] * av[i];
        double n = 0;
        for (int j = 0; j < dim; ++j) n += atav[j] * atav[j];
        n = std::sqrt(n);
        if (n == 0) return 0.0;
        lam = n;
        for (int j = 0; j < dim; ++j) v[j] = atav[j] / n;
      }
      return std::sqrt(lam);
    };
    if (affine_) return opnorm(to_double(source_->cells[0].barycenter));
    double best = 0;
    for (size_t sc = 0; sc < source_->cells.size(); ++sc)
      integrate_cell(*source_, (int)sc,
                     [&](const VecD& x) {
                       best = std::max(best, opnorm(x));
                       return 0.0;
                     },
                     8);
    return best;
  }

 private:
  void finish() {
    int dim = source_->dim;
    if (target_->dim != dim) throw IncompatibleComplexes("transition across dimensions");
    subs_.assign(kMaxDim, Polynomial());
    for (int i = 0; i < dim; ++i) subs_[i] = comps_[i];
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        dF_[i][j] = comps_[i].derivative(j);
        for (int k = 0; k < dim; ++k) d2F_[i][j][k] = dF_[i][j].derivative(k);
      }
    std::array<std::array<Polynomial, kMaxDim>, kMaxDim> m{};
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m[i][j] = dF_[i][j];
    det_ = detail::det_matrix(m, dim);
    adj_ = detail::adjugate(m, dim, Polynomial::constant(1));
    if (det_.is_zero()) throw NotHomeomorphic("det dF vanishes identically");

    // Sign-constancy certificate on vertices and the quadrature lattice.
    sign_ = 0;
    auto check_sign = [&](double v) {
      if (std::abs(v) < 1e-14) throw NotHomeomorphic("det dF vanishes at a sample point");
      int s = v > 0 ? 1 : -1;
      if (sign_ == 0) sign_ = s;
      if (s != sign_) throw NotHomeomorphic("sign of det dF is not constant");
    };
    for (const auto& v : source_->vertices) check_sign(det_.eval(to_double(v)));
    for (size_t sc = 0; sc < source_->cells.size(); ++sc)
      integrate_cell(*source_, (int)sc,
                     [&](const VecD& x) {
                       check_sign(det_.eval(x));
                       return 0.0;
                     },
                     6);

    // Cell map and homeomorphism-onto accounting.
    cell_map_.assign(source_->cells.size(), -1);
    for (size_t sc = 0; sc < source_->cells.size(); ++sc) {
      if (affine_) {
        VecQ img{0, 0, 0};
        for (int i = 0; i < dim; ++i) img[i] = comps_[i].eval(source_->cells[sc].barycenter);
        auto loc = target_->locate(img);
        if (loc.kind != CellComplex::Location::CellInterior)
          throw NotHomeomorphic("a source cell barycenter does not map into a target cell");
        cell_map_[sc] = loc.id;
        for (int vid : source_->cells[sc].vertices) {
          VecQ vi{0, 0, 0};
          for (int i = 0; i < dim; ++i) vi[i] = comps_[i].eval(source_->vertices[vid]);
          if (!detail::cell_contains(*target_, loc.id, vi))
            throw NotHomeomorphic("a source cell does not map into a single target cell");
        }
      } else {
        VecD img = apply(to_double(source_->cells[sc].barycenter));
        int tc = target_->locate_cell_numeric(img, 1e-9);
        if (tc < 0) throw NotHomeomorphic("a source cell barycenter maps outside the target");
        cell_map_[sc] = tc;
      }
    }
    // Volume accounting: integral of |det dF| must reproduce the target.
    double vol = 0;
    for (size_t sc = 0; sc < source_->cells.size(); ++sc)
      vol += integrate_cell(*source_, (int)sc,
                            [&](const VecD& x) { return std::abs(det_.eval(x)); }, 10);
    double tvol = to_double(target_->domain_volume());
    if (std::abs(vol - tvol) > 1e-8 * std::max(1.0, tvol))
      throw NotHomeomorphic("the source does not cover the target exactly once");

    // Injectivity spot check on the sample lattice.
    std::vector<VecD> images;
    for (size_t sc = 0; sc < source_->cells.size(); ++sc)
      images.push_back(apply(to_double(source_->cells[sc].barycenter)));
    for (size_t i = 0; i < images.size(); ++i)
      for (size_t j = i + 1; j < images.size(); ++j) {
        double d2 = 0;
        for (int a = 0; a < dim; ++a) d2 += (images[i][a] - images[j][a]) * (images[i][a] - images[j][a]);
        if (d2 < 1e-24) throw NotHomeomorphic("two cell barycenters collide under F");
      }

    // Facet alignment.
    facet_map_.assign(source_->facets.size(), -1);
    for (size_t sf = 0; sf < source_->facets.size(); ++sf) {
      const Facet& f = source_->facets[sf];
      if (!f.interior()) continue;
      // Candidate from the mapped midpoint of the first piece.
      VecQ mid{0, 0, 0};
      for (int k = 0; k < dim; ++k) mid = vec_add(mid, source_->vertices[f.pieces[0][k]]);
      mid = vec_scale(mid, Rational(1, dim));
      if (affine_) {
        VecQ img{0, 0, 0};
        for (int i = 0; i < dim; ++i) img[i] = comps_[i].eval(mid);
        auto loc = target_->locate(img);
        if (loc.kind != CellComplex::Location::FacetInterior) continue;
        // All facet vertices must land on the same hyperplane.
        const Facet& tf = target_->facets[loc.id];
        bool all = true;
        for (int vid : f.vertices) {
          VecQ vi{0, 0, 0};
          for (int i = 0; i < dim; ++i) vi[i] = comps_[i].eval(source_->vertices[vid]);
          if (dot(tf.direction, vi, dim) != tf.offset) all = false;
        }
        if (all) facet_map_[sf] = loc.id;
      } else {
        VecD img = apply(to_double(mid));
        int best = -1;
        for (size_t tf = 0; tf < target_->facets.size(); ++tf) {
          const Facet& ft = target_->facets[tf];
          if (!ft.interior()) continue;
          double plane = 0, nn = 0;
          for (int a = 0; a < dim; ++a) {
            plane += to_double(ft.direction[a]) * img[a];
            nn += to_double(ft.direction[a]) * to_double(ft.direction[a]);
          }
          plane -= to_double(ft.offset);
          if (std::abs(plane) / std::sqrt(nn) < 1e-10) {
            // Sample further points to confirm the whole facet maps onto it.
            bool all = true;
            integrate_facet_sigma(*source_, (int)sf,
                                  [&](const VecD& x) {
                                    VecD y = apply(x);
                                    double r = -to_double(ft.offset);
                                    for (int a = 0; a < dim; ++a) r += to_double(ft.direction[a]) * y[a];
                                    if (std::abs(r) / std::sqrt(nn) > 1e-9) all = false;
                                    return 0.0;
                                  },
                                  4);
            if (all) {
              best = (int)tf;
              break;
            }
          }
        }
        facet_map_[sf] = best;
      }
    }
  }

  /// Transport of a jump density from the target facet to the source facet
  /// under pullback: rho = (j o F) |(adj dF)^T d_s)[ax]| / (|det dF| |d_t[ax]|).
  Density transport_jump_density(const Density& j, int sf, int tf) const {
    const Facet& fs = source_->facets[sf];
    const Facet& ft = target_->facets[tf];
    int dim = source_->dim;
    int ax = 0;
    while (ft.direction[ax] == 0) ++ax;
    Polynomial transported;  // ((adj dF)^T d_s)[ax]
    for (int k = 0; k < dim; ++k) transported += adj_[k][ax] * Polynomial::constant(fs.direction[k]);
    // Constant sign along the facet; sample the midpoint.
    VecD mid{0, 0, 0};
    {
      VecQ m{0, 0, 0};
      for (int k = 0; k < dim; ++k) m = vec_add(m, source_->vertices[fs.pieces[0][k]]);
      mid = to_double(vec_scale(m, Rational(1, dim)));
    }
    long s_tr = transported.eval(mid) >= 0 ? 1 : -1;
    // factor = |transported| / (|det dF| * |d_t[ax]|); the signs are
    // constant along the facet, so absolute values reduce to sampled signs.
    Rational abs_dtax = boost::multiprecision::abs(ft.direction[ax]);
    RationalFn factor = RationalFn(transported * Rational(s_tr), det_ * Rational(sign_)) *
                        (Rational(1) / abs_dtax);
    if (j.is_sym()) return Density::sym(j.fn().compose(subs_) * factor);
    auto self = *this;
    Density jj = j;
    return Density::num([self, jj, factor](const VecD& x) { return jj.eval(self.apply(x)) * factor.eval(x); });
  }

  bool affine_ = true;
  std::shared_ptr<const CellComplex> source_, target_;
  std::vector<Polynomial> comps_;          // F components in source coordinates
  std::vector<Polynomial> inverse_comps_;  // affine tier only
  std::vector<Polynomial> subs_;           // comps padded to kMaxDim
  std::array<std::array<Polynomial, kMaxDim>, kMaxDim> dF_{};
  std::array<std::array<std::array<Polynomial, kMaxDim>, kMaxDim>, kMaxDim> d2F_{};
  std::array<std::array<Polynomial, kMaxDim>, kMaxDim> adj_{};
  Polynomial det_;
  int sign_ = 0;
  std::vector<int> cell_map_;
  std::vector<int> facet_map_;
};

// ---------------------------------------------------------------------------

/// Chain-rule verification: d_i(h o F) = sum_s dF_s/dx_i F*(dh/dy_s).
inline ResidualReport chain_rule_check(const TransitionMap& F, const PiecewiseScalar& h, int i,
                                       int panel_degree = 6, int order = 12) {
  MeasureField lhs = derivative(F.pullback_function(h), i);
  MeasureField rhs(F.source());
  for (int s = 0; s < F.source()->dim; ++s) {
    PiecewiseScalar dFs_dxi =
        PiecewiseScalar::from_global(F.source(), RationalFn(F.dF(s, i)));
    rhs = rhs + multiply(dFs_dxi, F.pullback_measure(derivative(h, s)));
  }
  auto panel = monomial_panel(*F.source(), panel_degree);
  return compare_measures(lhs, rhs, panel, order);
}

/// Pull-back/push-forward duality: F_sharp(|det dF| F*(mu)) recovers mu.
inline ResidualReport pullback_duality_check(const TransitionMap& F, const MeasureField& mu,
                                             int panel_degree = 4, int order = 12) {
  MeasureField pulled = F.pullback_measure(mu);
  PiecewiseScalar absdet = PiecewiseScalar::from_global(F.source(), F.abs_det_dF());
  MeasureField weighted = multiply(absdet, pulled);
  ResidualReport rep;
  auto panel = monomial_panel(*F.target(), panel_degree);
  for (const auto& phi : panel) {
    double lhs = F.pushforward_pairing(weighted, [&](const VecD& y) { return phi.eval(y); }, order);
    double rhs = pairing(mu, phi, order);
    double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    rep.max_residual = std::max(rep.max_residual, std::abs(lhs - rhs) / scale);
    ++rep.n_tests;
  }
  return rep;
}

/// Composition bound: |D(f o F^{-1})|(V) <= Lip(F)^{N-1} (F_sharp|Df|)(V).
struct LipCompoReport {
  double lhs_mass = 0;
  double rhs_bound = 0;
  bool holds(double slack = 1e-9) const { return lhs_mass <= rhs_bound * (1 + slack) + slack; }
};

inline LipCompoReport lipcompo_check(const TransitionMap& F, const PiecewiseScalar& f, int order = 10) {
  if (!F.is_affine()) throw Error("lipcompo_check runs on the affine tier");
  int dim = F.source()->dim;
  // Recover the exact matrix and shift from the degree-1 components and
  // build the inverse transition.
  std::array<VecQ, kMaxDim> arows{};
  VecQ b{0, 0, 0};
  for (int i = 0; i < dim; ++i) {
    VecQ zero{0, 0, 0};
    b[i] = F.components()[i].eval(zero);
    for (int j = 0; j < dim; ++j) {
      VecQ e{0, 0, 0};
      e[j] = 1;
      arows[i][j] = F.components()[i].eval(e) - b[i];
    }
  }
  std::array<std::array<Rational, kMaxDim>, kMaxDim> a{};
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a[i][j] = arows[i][j];
  Rational det = detail::det_matrix(a, dim);
  auto adj = detail::adjugate(a, dim, Rational(1));
  std::array<VecQ, kMaxDim> inv_rows{};
  VecQ inv_shift{0, 0, 0};
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      inv_rows[i][j] = adj[i][j] / det;
      inv_shift[i] -= adj[i][j] * b[j] / det;
    }
  }
  TransitionMap Finv = TransitionMap::affine(F.target(), F.source(), inv_rows, inv_shift);
  PiecewiseScalar g = Finv.pullback_function(f);  // f o F^{-1} on the target

  LipCompoReport rep;
  std::vector<MeasureField> dg, df;
  for (int i = 0; i < dim; ++i) {
    dg.push_back(derivative(g, i));
    df.push_back(derivative(f, i));
  }
  rep.lhs_mass = mass(total_variation(dg), order);
  double lip = F.lipschitz_constant();
  rep.rhs_bound = std::pow(lip, dim - 1) * mass(total_variation(df), order);
  return rep;
}

}  // namespace dccalc
