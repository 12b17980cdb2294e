#pragma once

#include <functional>

#include "dccalc/piecewise.hpp"

namespace dccalc {

/// Carrier density: exact rational function, numeric callable, or zero.
/// Symbolic densities survive arithmetic with symbolic partners; mixing in
/// a numeric density degrades the result to a numeric closure.
class Density {
 public:
  using NumFn = std::function<double(const VecD&)>;

  Density() = default;

  static Density sym(RationalFn f) {
    Density d;
    if (f.is_zero()) return d;
    d.kind_ = Kind::Sym;
    d.fn_ = std::move(f);
    return d;
  }
  static Density num(NumFn f) {
    Density d;
    d.kind_ = Kind::Num;
    d.num_ = std::move(f);
    return d;
  }

  bool is_zero() const { return kind_ == Kind::Zero; }
  bool is_sym() const { return kind_ != Kind::Num; }
  RationalFn fn() const { return kind_ == Kind::Sym ? fn_ : RationalFn(); }

  double eval(const VecD& x) const {
    switch (kind_) {
      case Kind::Zero: return 0.0;
      case Kind::Sym: return fn_.eval(x);
      default: return num_(x);
    }
  }

  friend Density operator+(const Density& a, const Density& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.kind_ == Kind::Sym && b.kind_ == Kind::Sym) return sym(a.fn_ + b.fn_);
    return num([a, b](const VecD& x) { return a.eval(x) + b.eval(x); });
  }
  friend Density operator-(const Density& a, const Density& b) { return a + b.scaled(Rational(-1)); }

  Density scaled(const Rational& s) const {
    if (is_zero() || s == 0) return Density();
    if (kind_ == Kind::Sym) return sym(fn_ * s);
    double sd = to_double(s);
    auto f = num_;
    return num([f, sd](const VecD& x) { return sd * f(x); });
  }

  Density times(const RationalFn& h) const {
    if (is_zero()) return Density();
    if (h.is_zero()) return Density();
    if (kind_ == Kind::Sym) return sym(fn_ * h);
    auto f = num_;
    return num([f, h](const VecD& x) { return f(x) * h.eval(x); });
  }

  Density times_num(const NumFn& h) const {
    if (is_zero()) return Density();
    Density copy = *this;
    return num([copy, h](const VecD& x) { return copy.eval(x) * h(x); });
  }

 private:
  enum class Kind { Zero, Sym, Num } kind_ = Kind::Zero;
  RationalFn fn_;
  NumFn num_;
};

/// Radon measure on a complex: absolutely continuous part (density per top
/// cell against Lebesgue) plus jump part (density per interior facet against
/// sigma_F = H^{N-1}/||direction||). The two carriers are mutually singular
/// by construction. Vector- and matrix-valued measures are stored
/// componentwise as containers of MeasureField.
class MeasureField {
 public:
  MeasureField() = default;
  explicit MeasureField(std::shared_ptr<const CellComplex> cx)
      : complex_(std::move(cx)),
        ac_(complex_->cells.size()),
        jump_(complex_->facets.size()) {}

  const std::shared_ptr<const CellComplex>& complex() const { return complex_; }
  Density& ac(int cell) { return ac_.at(cell); }
  const Density& ac(int cell) const { return ac_.at(cell); }
  Density& jump(int facet) { return jump_.at(facet); }
  const Density& jump(int facet) const { return jump_.at(facet); }

  bool has_jump_part() const {
    for (const auto& j : jump_)
      if (!j.is_zero()) return true;
    return false;
  }
  bool jump_nonzero_on(int facet) const {
    if (jump_[facet].is_zero()) return false;
    if (jump_[facet].is_sym()) {
      const Facet& f = complex_->facets[facet];
      bool all_zero = true;
      for (const auto& piece : f.pieces)
        if (!detail::restrict_to_facet(*complex_, f, piece, jump_[facet].fn()).is_zero())
          all_zero = false;
      return !all_zero;
    }
    return true;  // numeric density: assume present
  }
  bool is_symbolic() const {
    for (const auto& a : ac_)
      if (!a.is_sym()) return false;
    for (const auto& j : jump_)
      if (!j.is_sym()) return false;
    return true;
  }

  /// Membership in the class of measures vanishing on H^{N-1}-finite sets.
  bool in_gm0() const { return !has_jump_part(); }

  friend MeasureField operator+(const MeasureField& a, const MeasureField& b) {
    if (a.complex_.get() != b.complex_.get())
      throw IncompatibleComplexes("measure sum across different complexes");
    MeasureField out(a.complex_);
    for (size_t i = 0; i < a.ac_.size(); ++i) out.ac_[i] = a.ac_[i] + b.ac_[i];
    for (size_t i = 0; i < a.jump_.size(); ++i) out.jump_[i] = a.jump_[i] + b.jump_[i];
    return out;
  }
  friend MeasureField operator-(const MeasureField& a, const MeasureField& b) {
    return a + b.scaled(Rational(-1));
  }
  MeasureField scaled(const Rational& s) const {
    MeasureField out(complex_);
    for (size_t i = 0; i < ac_.size(); ++i) out.ac_[i] = ac_[i].scaled(s);
    for (size_t i = 0; i < jump_.size(); ++i) out.jump_[i] = jump_[i].scaled(s);
    return out;
  }

 private:
  std::shared_ptr<const CellComplex> complex_;
  std::vector<Density> ac_;
  std::vector<Density> jump_;
};

// ---------------------------------------------------------------------------
// Pairings and comparisons.

inline double pairing(const MeasureField& mu, const Polynomial& phi, int order = 10) {
  const auto& cx = *mu.complex();
  double acc = 0;
  for (size_t ci = 0; ci < cx.cells.size(); ++ci) {
    if (mu.ac((int)ci).is_zero()) continue;
    acc += integrate_cell(cx, (int)ci,
                          [&](const VecD& x) { return mu.ac((int)ci).eval(x) * phi.eval(x); }, order);
  }
  for (size_t fi = 0; fi < cx.facets.size(); ++fi) {
    if (mu.jump((int)fi).is_zero()) continue;
    acc += integrate_facet_sigma(cx, (int)fi,
                                 [&](const VecD& x) { return mu.jump((int)fi).eval(x) * phi.eval(x); },
                                 order);
  }
  return acc;
}

/// Exact pairing; available when every density is a polynomial.
inline std::optional<Rational> pairing_exact(const MeasureField& mu, const Polynomial& phi) {
  const auto& cx = *mu.complex();
  Rational acc = 0;
  for (size_t ci = 0; ci < cx.cells.size(); ++ci) {
    const Density& d = mu.ac((int)ci);
    if (d.is_zero()) continue;
    if (!d.is_sym() || !d.fn().is_polynomial()) return std::nullopt;
    acc += integrate_cell_exact(cx, (int)ci, d.fn().as_polynomial() * phi);
  }
  for (size_t fi = 0; fi < cx.facets.size(); ++fi) {
    const Density& d = mu.jump((int)fi);
    if (d.is_zero()) continue;
    if (!d.is_sym() || !d.fn().is_polynomial()) return std::nullopt;
    acc += integrate_facet_sigma_exact(cx, (int)fi, d.fn().as_polynomial() * phi);
  }
  return acc;
}

/// Exact equality as measures; decidable when both sides are symbolic.
inline std::optional<bool> equal_exact(const MeasureField& a, const MeasureField& b) {
  if (a.complex().get() != b.complex().get()) return std::nullopt;
  if (!a.is_symbolic() || !b.is_symbolic()) return std::nullopt;
  const auto& cx = *a.complex();
  for (size_t ci = 0; ci < cx.cells.size(); ++ci)
    if (!(a.ac((int)ci).fn() - b.ac((int)ci).fn()).is_zero()) return false;
  for (size_t fi = 0; fi < cx.facets.size(); ++fi) {
    RationalFn diff = a.jump((int)fi).fn() - b.jump((int)fi).fn();
    if (diff.is_zero()) continue;
    const Facet& f = cx.facets[fi];
    for (const auto& piece : f.pieces)
      if (!detail::restrict_to_facet(cx, f, piece, diff).is_zero()) return false;
  }
  return true;
}

struct ResidualReport {
  double max_residual = 0;
  bool exact_zero = false;
  int n_tests = 0;
  bool pass(double tol) const { return exact_zero || max_residual <= tol; }
};

/// Pairing residual of (a - b) over a polynomial panel, relative to the
/// larger of the two pairings.
inline ResidualReport compare_measures(const MeasureField& a, const MeasureField& b,
                                       const std::vector<Polynomial>& panel, int order = 10) {
  ResidualReport rep;
  if (auto eq = equal_exact(a, b); eq.has_value() && *eq) {
    rep.exact_zero = true;
    rep.n_tests = (int)panel.size();
    return rep;
  }
  for (const auto& phi : panel) {
    double pa = pairing(a, phi, order);
    double pb = pairing(b, phi, order);
    double scale = std::max({1.0, std::abs(pa), std::abs(pb)});
    rep.max_residual = std::max(rep.max_residual, std::abs(pa - pb) / scale);
    ++rep.n_tests;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// The derivative of a piecewise function as a measure, and its algebra.

/// D_i f = (cellwise partial) L^N + (f+ - f-) d_i sigma_F on interior facets.
inline MeasureField derivative(const PiecewiseScalar& f, int i) {
  const auto& cx = *f.complex();
  MeasureField out(f.complex());
  for (size_t ci = 0; ci < cx.cells.size(); ++ci)
    out.ac((int)ci) = Density::sym(f.piece((int)ci).derivative(i));
  for (size_t fi = 0; fi < cx.facets.size(); ++fi) {
    const Facet& fa = cx.facets[fi];
    if (!fa.interior()) continue;
    if (!f.jumps_on((int)fi)) continue;
    RationalFn jump = (f.piece(fa.plus_cell) - f.piece(fa.minus_cell)) * fa.direction[i];
    out.jump((int)fi) = Density::sym(std::move(jump));
  }
  return out;
}

/// Product h * mu with the precise representative of h on jump facets.
/// Refuses the pairing the underlying hypotheses exclude: h jumping where
/// mu carries a jump.
inline MeasureField multiply(const PiecewiseScalar& h, const MeasureField& mu) {
  if (h.complex().get() != mu.complex().get() && !h.complex()->same_geometry(*mu.complex()))
    throw IncompatibleComplexes("multiply: different complexes");
  const auto& cx = *mu.complex();
  for (int fj : h.jump_facets())
    if (mu.jump_nonzero_on(fj)) throw IllegalPairing("discontinuous factor against a jump measure");
  MeasureField out(mu.complex());
  for (size_t ci = 0; ci < cx.cells.size(); ++ci)
    out.ac((int)ci) = mu.ac((int)ci).times(h.piece((int)ci));
  for (size_t fi = 0; fi < cx.facets.size(); ++fi) {
    if (mu.jump((int)fi).is_zero()) continue;
    out.jump((int)fi) = mu.jump((int)fi).times(h.precise_on_facet((int)fi));
  }
  return out;
}

/// f d_i h + h d_i f, legal when at least one factor is continuous; the
/// result is asserted equal to d_i(f h).
inline MeasureField product_rule(const PiecewiseScalar& f, const PiecewiseScalar& h, int i) {
  auto [a, b] = on_common_complex(f, h);
  for (int fj : a.jump_facets())
    if (b.jumps_on(fj)) throw BothFactorsJump("both factors jump on a shared facet");
  MeasureField result = multiply(a, derivative(b, i)) + multiply(b, derivative(a, i));
  MeasureField direct = derivative(product(a, b), i);
  auto eq = equal_exact(result, direct);
  if (eq.has_value() && !*eq) throw Error("product rule disagrees with the direct derivative");
  return result;
}

// ---------------------------------------------------------------------------
// Total variation (componentwise polar decomposition on shared carriers).

inline MeasureField total_variation(const std::vector<MeasureField>& comps) {
  if (comps.empty()) throw Error("total_variation of an empty family");
  auto cx = comps[0].complex();
  for (const auto& m : comps)
    if (m.complex().get() != cx.get()) throw IncompatibleComplexes("TV components on different complexes");
  MeasureField out(cx);
  for (size_t ci = 0; ci < cx->cells.size(); ++ci) {
    bool any = false;
    for (const auto& m : comps)
      if (!m.ac((int)ci).is_zero()) any = true;
    if (!any) continue;
    std::vector<Density> ds;
    for (const auto& m : comps) ds.push_back(m.ac((int)ci));
    out.ac((int)ci) = Density::num([ds](const VecD& x) {
      double s = 0;
      for (const auto& d : ds) {
        double v = d.eval(x);
        s += v * v;
      }
      return std::sqrt(s);
    });
  }
  for (size_t fi = 0; fi < cx->facets.size(); ++fi) {
    bool any = false;
    for (const auto& m : comps)
      if (!m.jump((int)fi).is_zero()) any = true;
    if (!any) continue;
    std::vector<Density> ds;
    for (const auto& m : comps) ds.push_back(m.jump((int)fi));
    out.jump((int)fi) = Density::num([ds](const VecD& x) {
      double s = 0;
      for (const auto& d : ds) {
        double v = d.eval(x);
        s += v * v;
      }
      return std::sqrt(s);
    });
  }
  return out;
}

inline MeasureField total_variation(const MeasureField& mu) {
  return total_variation(std::vector<MeasureField>{mu});
}

/// Total mass against a constant test function.
inline double mass(const MeasureField& mu, int order = 10) {
  return pairing(mu, Polynomial::constant(1), order);
}

// ---------------------------------------------------------------------------
// Box masses via exact clipping (used by set-function oracles).

inline double box_mass(const MeasureField& mu, const Box& box,
                       const std::function<double(const VecD&)>& weight = nullptr, int order = 10) {
  const auto& cx = *mu.complex();
  const auto& rule = QuadratureRule::get(order);
  double acc = 0;
  for (size_t ci = 0; ci < cx.cells.size(); ++ci) {
    if (mu.ac((int)ci).is_zero()) continue;
    std::vector<GSimplex> region;
    for (const auto& s : cx.cells[ci].simplices) {
      GSimplex g;
      for (int k = 0; k <= cx.dim; ++k) g.p[k] = cx.vertices[s.v[k]];
      region.push_back(g);
    }
    region = clip_simplices_box(std::move(region), cx.dim, box);
    for (const auto& g : region) {
      std::array<VecQ, kMaxDim> cols{};
      for (int k = 0; k < cx.dim; ++k) cols[k] = vec_sub(g.p[k + 1], g.p[0]);
      double jac = std::abs(to_double(det_cols(cols, cx.dim)));
      if (jac == 0) continue;
      VecD p0 = to_double(g.p[0]);
      std::array<VecD, kMaxDim> cd{};
      for (int k = 0; k < cx.dim; ++k) cd[k] = to_double(cols[k]);
      for (const auto& node : rule.simplex[cx.dim]) {
        VecD x = p0;
        for (int k = 0; k < cx.dim; ++k)
          for (int a = 0; a < cx.dim; ++a) x[a] += cd[k][a] * node.x[k];
        double v = mu.ac((int)ci).eval(x);
        if (weight) v *= weight(x);
        acc += node.w * jac * v;
      }
    }
  }
  for (size_t fi = 0; fi < cx.facets.size(); ++fi) {
    if (mu.jump((int)fi).is_zero()) continue;
    const Facet& f = cx.facets[fi];
    std::vector<GFacetPiece> pieces;
    for (const auto& piece : f.pieces) {
      GFacetPiece g;
      for (int k = 0; k < cx.dim; ++k) g.p[k] = cx.vertices[piece[k]];
      pieces.push_back(g);
    }
    pieces = clip_facet_box(std::move(pieces), cx.dim, box);
    for (const auto& g : pieces) {
      if (cx.dim == 1) {
        double v = mu.jump((int)fi).eval(to_double(g.p[0]));
        if (weight) v *= weight(to_double(g.p[0]));
        acc += v;
        continue;
      }
      std::array<VecQ, kMaxDim> span{};
      for (int k = 0; k + 1 < cx.dim; ++k) span[k] = vec_sub(g.p[k + 1], g.p[0]);
      VecQ cr = cross_product(span, cx.dim);
      int ax = 0;
      while (f.direction[ax] == 0) ++ax;
      double lam = std::abs(to_double(cr[ax] / f.direction[ax]));
      if (lam == 0) continue;
      VecD p0 = to_double(g.p[0]);
      std::array<VecD, kMaxDim> cd{};
      for (int k = 0; k + 1 < cx.dim; ++k) cd[k] = to_double(span[k]);
      for (const auto& node : rule.simplex[cx.dim - 1]) {
        VecD x = p0;
        for (int k = 0; k + 1 < cx.dim; ++k)
          for (int a = 0; a < cx.dim; ++a) x[a] += cd[k][a] * node.x[k];
        double v = mu.jump((int)fi).eval(x);
        if (weight) v *= weight(x);
        acc += node.w * lam * v;
      }
    }
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Weak-form self check: int f d_i(phi) dL + <D_i f, phi> must vanish for
// test functions phi vanishing on the boundary.

inline ResidualReport weak_derivative_residual(const PiecewiseScalar& f, int i,
                                               const std::vector<Polynomial>& bubble_tests,
                                               int order = 12) {
  MeasureField df = derivative(f, i);
  ResidualReport rep;
  bool all_exact = true;
  for (const auto& phi : bubble_tests) {
    Polynomial dphi = phi.derivative(i);
    std::optional<Rational> lhs_exact;
    {
      Rational acc = 0;
      bool ok = true;
      for (size_t ci = 0; ci < f.complex()->cells.size() && ok; ++ci) {
        if (!f.piece((int)ci).is_polynomial()) ok = false;
        else acc += integrate_cell_exact(*f.complex(), (int)ci, f.piece((int)ci).as_polynomial() * dphi);
      }
      if (ok) lhs_exact = acc;
    }
    auto rhs_exact = pairing_exact(df, phi);
    if (lhs_exact && rhs_exact) {
      if (*lhs_exact + *rhs_exact != 0) {
        all_exact = false;
        rep.max_residual = std::max(rep.max_residual, std::abs(to_double(*lhs_exact + *rhs_exact)));
      }
    } else {
      all_exact = false;
      double lhs = 0;
      for (size_t ci = 0; ci < f.complex()->cells.size(); ++ci)
        lhs += integrate_cell(*f.complex(), (int)ci,
                              [&](const VecD& x) { return f.piece((int)ci).eval(x) * dphi.eval(x); },
                              order);
      double rhs = pairing(df, phi, order);
      double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
      rep.max_residual = std::max(rep.max_residual, std::abs(lhs + rhs) / scale);
    }
    ++rep.n_tests;
  }
  rep.exact_zero = all_exact;
  return rep;
}

// ---------------------------------------------------------------------------
// Mollification convergence (duality with bounded continuous functions).

struct MollifyReport {
  std::vector<double> epsilons;
  std::vector<double> errors;  // max over the test panel
  bool decreasing(double factor = 0.9) const {
    for (size_t i = 1; i < errors.size(); ++i)
      if (errors[i] > factor * errors[i - 1] + 1e-14) return false;
    return true;
  }
};

/// Builds mu_eps by mollifying mu and tabulates |<h mu_eps - h mu, phi>|
/// over a panel of bounded continuous tests vanishing on the boundary.
/// Computed with the order of integration swapped: the pairing against
/// mu_eps equals the mu-integral of the kernel convolution of h*phi.
inline MollifyReport mollify_and_converge_test(const PiecewiseScalar& h, const MeasureField& mu,
                                               const std::vector<double>& epsilons,
                                               int panel_degree = 2) {
  const auto& cx = *mu.complex();
  MeasureField hmu = multiply(h, mu);
  auto panel = bubble_panel(cx, panel_degree);
  MollifyReport rep;
  rep.epsilons = epsilons;

  std::vector<double> gx, gw;
  gauss_legendre_unit(20, gx, gw);

  for (double eps : epsilons) {
    auto kernel = [eps, &cx](const VecD& t) {
      double r2 = 0;
      for (int a = 0; a < cx.dim; ++a) r2 += t[a] * t[a];
      double u = 1.0 - r2 / (eps * eps);
      return u > 0 ? u * u * u : 0.0;
    };
    // Grid over [-eps, eps]^dim and its kernel normalization.
    struct GridPt {
      VecD t;
      double w;
    };
    std::vector<GridPt> grid;
    int n = (int)gx.size();
    if (cx.dim == 1) {
      for (int i = 0; i < n; ++i)
        grid.push_back({{2 * eps * gx[i] - eps, 0, 0}, 2 * eps * gw[i]});
    } else if (cx.dim == 2) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          grid.push_back({{2 * eps * gx[i] - eps, 2 * eps * gx[j] - eps, 0},
                          4 * eps * eps * gw[i] * gw[j]});
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            grid.push_back({{2 * eps * gx[i] - eps, 2 * eps * gx[j] - eps, 2 * eps * gx[k] - eps},
                            8 * eps * eps * eps * gw[i] * gw[j] * gw[k]});
    }
    double norm = 0;
    for (const auto& g : grid) norm += g.w * kernel(g.t);

    double max_err = 0;
    for (const auto& phi : panel) {
      auto conv = [&](const VecD& y) {
        // (h phi) * kernel at y, extending by zero outside the domain
        double acc = 0;
        for (const auto& g : grid) {
          VecD x{y[0] + g.t[0], y[1] + g.t[1], y[2] + g.t[2]};
          int cell = cx.locate_cell_numeric(x);
          if (cell < 0) continue;
          acc += g.w * kernel(g.t) * h.eval_in_cell(cell, x) * phi.eval(x);
        }
        return acc / norm;
      };
      double smoothed = 0;
      for (size_t ci = 0; ci < cx.cells.size(); ++ci) {
        if (mu.ac((int)ci).is_zero()) continue;
        smoothed += integrate_cell(cx, (int)ci,
                                   [&](const VecD& y) { return mu.ac((int)ci).eval(y) * conv(y); }, 10);
      }
      for (size_t fi = 0; fi < cx.facets.size(); ++fi) {
        if (mu.jump((int)fi).is_zero()) continue;
        smoothed += integrate_facet_sigma(
            cx, (int)fi, [&](const VecD& y) { return mu.jump((int)fi).eval(y) * conv(y); }, 10);
      }
      double target = pairing(hmu, phi, 12);
      max_err = std::max(max_err, std::abs(smoothed - target));
    }
    rep.errors.push_back(max_err);
  }
  return rep;
}

}  // namespace dccalc
