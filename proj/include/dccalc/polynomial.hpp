#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

#include "dccalc/rational.hpp"

namespace dccalc {

using Exponents = std::array<int, kMaxDim>;

inline int total_degree(const Exponents& e) { return e[0] + e[1] + e[2]; }

/// Graded lexicographic order, used for leading terms in division.
inline bool grlex_less(const Exponents& a, const Exponents& b) {
  int da = total_degree(a), db = total_degree(b);
  if (da != db) return da < db;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// Sparse multivariate polynomial in up to kMaxDim variables with exact
/// rational coefficients. Terms are kept sorted in grlex order with no
/// zero coefficients.
class Polynomial {
 public:
  using Term = std::pair<Exponents, Rational>;

  Polynomial() = default;

  static Polynomial constant(Rational c) {
    Polynomial p;
    if (c != 0) p.terms_.push_back({{0, 0, 0}, std::move(c)});
    return p;
  }

  static Polynomial variable(int i, Rational coeff = 1) {
    Exponents e{0, 0, 0};
    e[i] = 1;
    return monomial(e, std::move(coeff));
  }

  static Polynomial monomial(const Exponents& e, Rational coeff) {
    Polynomial p;
    if (coeff != 0) p.terms_.push_back({e, std::move(coeff)});
    return p;
  }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && total_degree(terms_[0].first) == 0);
  }

  Rational constant_value() const {
    if (terms_.empty()) return 0;
    return terms_[0].second;
  }

  int degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
    return d;
  }

  int degree_in(int var) const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[var]);
    return d;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    Polynomial out;
    out.terms_.reserve(a.terms_.size() + b.terms_.size());
    size_t i = 0, j = 0;
    while (i < a.terms_.size() || j < b.terms_.size()) {
      if (j == b.terms_.size() ||
          (i < a.terms_.size() && grlex_less(a.terms_[i].first, b.terms_[j].first))) {
        out.terms_.push_back(a.terms_[i++]);
      } else if (i == a.terms_.size() || grlex_less(b.terms_[j].first, a.terms_[i].first)) {
        out.terms_.push_back(b.terms_[j++]);
      } else {
        Rational c = a.terms_[i].second + b.terms_[j].second;
        if (c != 0) out.terms_.push_back({a.terms_[i].first, std::move(c)});
        ++i, ++j;
      }
    }
    return out;
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (b * Rational(-1)); }
  friend Polynomial operator-(const Polynomial& a) { return a * Rational(-1); }

  friend Polynomial operator*(const Polynomial& a, const Rational& s) {
    Polynomial out;
    if (s == 0) return out;
    out.terms_ = a.terms_;
    for (auto& [e, c] : out.terms_) c *= s;
    return out;
  }
  friend Polynomial operator*(const Rational& s, const Polynomial& a) { return a * s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial out;
    for (const auto& [ea, ca] : a.terms_) {
      Polynomial partial;
      partial.terms_.reserve(b.terms_.size());
      for (const auto& [eb, cb] : b.terms_) {
        Exponents e{ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]};
        partial.terms_.push_back({e, ca * cb});
      }
      out = out + partial;
    }
    return out;
  }

  Polynomial& operator+=(const Polynomial& o) { return *this = *this + o; }
  Polynomial& operator-=(const Polynomial& o) { return *this = *this - o; }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  bool operator==(const Polynomial& o) const { return terms_ == o.terms_; }

  Polynomial pow(int k) const {
    Polynomial out = constant(1);
    Polynomial base = *this;
    while (k > 0) {
      if (k & 1) out = out * base;
      base = base * base;
      k >>= 1;
    }
    return out;
  }

  Polynomial derivative(int var) const {
    Polynomial out;
    for (const auto& [e, c] : terms_) {
      if (e[var] == 0) continue;
      Exponents d = e;
      d[var] -= 1;
      out.terms_.push_back({d, c * e[var]});
    }
    std::sort(out.terms_.begin(), out.terms_.end(),
              [](const Term& x, const Term& y) { return grlex_less(x.first, y.first); });
    return out;
  }

  template <typename Num>
  Num eval(std::span<const Num> x) const {
    Num acc = Num(0);
    for (const auto& [e, c] : terms_) {
      Num t;
      if constexpr (std::is_same_v<Num, double>)
        t = to_double(c);
      else
        t = Num(c);
      for (int v = 0; v < kMaxDim; ++v)
        for (int k = 0; k < e[v]; ++k) t *= x[v];
      acc += t;
    }
    return acc;
  }

  Rational eval(const VecQ& x) const { return eval<Rational>(std::span<const Rational>(x)); }
  double eval(const VecD& x) const { return eval<double>(std::span<const double>(x)); }

  /// Substitutes subs[v] for variable v.
  Polynomial compose(std::span<const Polynomial> subs) const {
    Polynomial out;
    for (const auto& [e, c] : terms_) {
      Polynomial t = constant(c);
      for (int v = 0; v < kMaxDim; ++v)
        if (e[v] > 0) t = t * subs[v].pow(e[v]);
      out = out + t;
    }
    return out;
  }

  /// Exact division: returns p such that *this == p * q, if one exists.
  static std::optional<Polynomial> divide_exact(const Polynomial& p, const Polynomial& q) {
    if (q.is_zero()) return std::nullopt;
    if (p.is_zero()) return Polynomial();
    Polynomial rem = p, quot;
    const auto& [lq, cq] = q.terms_.back();
    int guard = 0;
    while (!rem.is_zero()) {
      if (++guard > 100000) return std::nullopt;
      const auto& [lr, cr] = rem.terms_.back();
      Exponents d;
      for (int v = 0; v < kMaxDim; ++v) {
        d[v] = lr[v] - lq[v];
        if (d[v] < 0) return std::nullopt;
      }
      Polynomial t = monomial(d, cr / cq);
      quot = quot + t;
      rem = rem - t * q;
    }
    return quot;
  }

  /// Exact square root when the polynomial is a perfect square.
  static std::optional<Polynomial> sqrt_exact(const Polynomial& p) {
    if (p.is_zero()) return Polynomial();
    const auto& [lt, lc] = p.terms_.back();
    Exponents h;
    for (int v = 0; v < kMaxDim; ++v) {
      if (lt[v] % 2 != 0) return std::nullopt;
      h[v] = lt[v] / 2;
    }
    Rational root_c;
    if (!perfect_square(lc, root_c)) return std::nullopt;
    Polynomial r = monomial(h, root_c);
    int guard = 0;
    while (true) {
      Polynomial rem = p - r * r;
      if (rem.is_zero()) return r;
      if (++guard > 1000) return std::nullopt;
      const auto& [le, ce] = rem.terms_.back();
      Exponents d;
      for (int v = 0; v < kMaxDim; ++v) {
        d[v] = le[v] - h[v];
        if (d[v] < 0) return std::nullopt;
      }
      r = r + monomial(d, ce / (2 * root_c));
    }
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    static const char* names[3] = {"x1", "x2", "x3"};
    std::string out;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const auto& [e, c] = *it;
      if (!out.empty()) out += " + ";
      out += rational_to_string(c);
      for (int v = 0; v < kMaxDim; ++v) {
        if (e[v] == 0) continue;
        out += std::string("*") + names[v];
        if (e[v] > 1) out += "^" + std::to_string(e[v]);
      }
    }
    return out;
  }

 private:
  std::vector<Term> terms_;
};

/// Affine substitution x -> origin + M*s expressed as polynomials in s.
/// columns: number of s-variables actually used.
inline std::vector<Polynomial> affine_substitution(const VecQ& origin,
                                                   const std::array<VecQ, kMaxDim>& columns,
                                                   int n_cols) {
  std::vector<Polynomial> subs(kMaxDim);
  for (int i = 0; i < kMaxDim; ++i) {
    subs[i] = Polynomial::constant(origin[i]);
    for (int j = 0; j < n_cols; ++j) subs[i] += Polynomial::variable(j, columns[j][i]);
  }
  return subs;
}

}  // namespace dccalc
