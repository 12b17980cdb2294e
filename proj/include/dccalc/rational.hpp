#pragma once

#include <array>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace dccalc {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Hard cap on the chart dimension; all geometry below assumes N <= 3.
inline constexpr int kMaxDim = 3;

using VecQ = std::array<Rational, kMaxDim>;
using VecD = std::array<double, kMaxDim>;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline VecD to_double(const VecQ& v) {
  return {to_double(v[0]), to_double(v[1]), to_double(v[2])};
}

inline Rational rational_from_int(long long n) { return Rational(n); }

/// Parses "p/q", integers, and finite decimals ("-0.25") exactly.
inline Rational parse_rational(const std::string& text) {
  std::string s = text;
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    Int num(s.substr(0, slash));
    Int den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return Rational(num, den);
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) return Rational(Int(s));
  std::string head = s.substr(0, dot);
  std::string tail = s.substr(dot + 1);
  bool negative = !head.empty() && head[0] == '-';
  if (!head.empty() && (head[0] == '+' || head[0] == '-')) head = head.substr(1);
  if (head.empty()) head = "0";
  for (char c : tail)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw std::invalid_argument("bad rational literal '" + text + "'");
  Int scale = 1;
  for (size_t i = 0; i < tail.size(); ++i) scale *= 10;
  Int num = Int(head) * scale + (tail.empty() ? Int(0) : Int(tail));
  Rational r(num, scale);
  return negative ? -r : r;
}

inline std::string rational_to_string(const Rational& q) {
  std::ostringstream os;
  os << q;
  return os.str();
}

/// Integer square root test; returns the root when n is a perfect square.
inline bool perfect_square(const Int& n, Int& root) {
  if (n < 0) return false;
  root = boost::multiprecision::sqrt(n);
  return root * root == n;
}

/// Rational square root when the value is a perfect square of a rational.
inline bool perfect_square(const Rational& q, Rational& root) {
  Int rn, rd;
  if (!perfect_square(boost::multiprecision::numerator(q), rn)) return false;
  if (!perfect_square(boost::multiprecision::denominator(q), rd)) return false;
  root = Rational(rn, rd);
  return true;
}

}  // namespace dccalc
