#pragma once

#include <optional>
#include <span>

#include "dccalc/polynomial.hpp"

namespace dccalc {

/// Quotient of two polynomials with a nonvanishing denominator on its
/// domain of use. Equality and the zero test are exact (cross
/// multiplication); no gcd machinery beyond opportunistic exact division.
class RationalFn {
 public:
  RationalFn() : num_(), den_(Polynomial::constant(1)) {}
  RationalFn(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw std::invalid_argument("RationalFn: zero denominator");
    normalize();
  }
  explicit RationalFn(Polynomial num) : num_(std::move(num)), den_(Polynomial::constant(1)) {}
  static RationalFn constant(Rational c) { return RationalFn(Polynomial::constant(std::move(c))); }
  static RationalFn variable(int i) { return RationalFn(Polynomial::variable(i)); }

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.is_constant(); }

  /// Numerator scaled by the constant denominator; valid only when
  /// is_polynomial() holds.
  Polynomial as_polynomial() const {
    if (!is_polynomial()) throw std::logic_error("RationalFn: not a polynomial");
    return num_ * (Rational(1) / den_.constant_value());
  }

  friend RationalFn operator+(const RationalFn& a, const RationalFn& b) {
    if (a.den_ == b.den_) return RationalFn(a.num_ + b.num_, a.den_);
    return RationalFn(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend RationalFn operator-(const RationalFn& a, const RationalFn& b) {
    if (a.den_ == b.den_) return RationalFn(a.num_ - b.num_, a.den_);
    return RationalFn(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend RationalFn operator-(const RationalFn& a) { return RationalFn(-a.num_, a.den_); }
  friend RationalFn operator*(const RationalFn& a, const RationalFn& b) {
    return RationalFn(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend RationalFn operator*(const RationalFn& a, const Rational& s) {
    return RationalFn(a.num_ * s, a.den_);
  }
  friend RationalFn operator*(const Rational& s, const RationalFn& a) { return a * s; }
  friend RationalFn operator/(const RationalFn& a, const RationalFn& b) {
    if (b.is_zero()) throw std::invalid_argument("RationalFn: division by zero function");
    return RationalFn(a.num_ * b.den_, a.den_ * b.num_);
  }

  RationalFn& operator+=(const RationalFn& o) { return *this = *this + o; }
  RationalFn& operator-=(const RationalFn& o) { return *this = *this - o; }
  RationalFn& operator*=(const RationalFn& o) { return *this = *this * o; }

  bool equals(const RationalFn& o) const {
    return (num_ * o.den_ - o.num_ * den_).is_zero();
  }

  RationalFn derivative(int var) const {
    Polynomial n = num_.derivative(var) * den_ - num_ * den_.derivative(var);
    return RationalFn(std::move(n), den_ * den_);
  }

  Rational eval(const VecQ& x) const {
    Rational d = den_.eval(x);
    if (d == 0) throw std::domain_error("RationalFn: denominator vanishes at point");
    return num_.eval(x) / d;
  }
  double eval(const VecD& x) const { return num_.eval(x) / den_.eval(x); }

  RationalFn compose(std::span<const Polynomial> subs) const {
    return RationalFn(num_.compose(subs), den_.compose(subs));
  }

  /// sqrt when both numerator and denominator are perfect squares.
  static std::optional<RationalFn> sqrt_exact(const RationalFn& f) {
    auto n = Polynomial::sqrt_exact(f.num_);
    if (!n) return std::nullopt;
    auto d = Polynomial::sqrt_exact(f.den_);
    if (!d) return std::nullopt;
    return RationalFn(std::move(*n), std::move(*d));
  }

  std::string to_string() const {
    if (is_polynomial()) return as_polynomial().to_string();
    return "(" + num_.to_string() + ") / (" + den_.to_string() + ")";
  }

 private:
  void normalize() {
    if (num_.is_zero()) {
      den_ = Polynomial::constant(1);
      return;
    }
    if (auto q = Polynomial::divide_exact(num_, den_)) {
      num_ = std::move(*q);
      den_ = Polynomial::constant(1);
    }
    // Scale so the denominator's leading coefficient is one.
    Rational lead = den_.terms().back().second;
    if (lead != 1) {
      Rational inv = Rational(1) / lead;
      num_ = num_ * inv;
      den_ = den_ * inv;
    }
  }

  Polynomial num_, den_;
};

}  // namespace dccalc
