#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "prost/error.hpp"

namespace prost {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline std::string to_string(const Rational& q) {
  BigInt n = boost::multiprecision::numerator(q);
  BigInt d = boost::multiprecision::denominator(q);
  if (d == 1) return n.str();
  return n.str() + "/" + d.str();
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// "num" or "num/den" with decimal digits only.
inline Rational parse_rational(std::string_view s) {
  auto digits = [](std::string_view d) {
    return !d.empty() && d.find_first_not_of("0123456789") == std::string_view::npos;
  };
  auto slash = s.find('/');
  std::string_view num = s.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? std::string_view("1") : s.substr(slash + 1);
  if (!digits(num) || !digits(den)) throw Error("syntax-error", "bad rational '" + std::string(s) + "'");
  BigInt d{std::string(den)};
  if (d == 0) throw Error("syntax-error", "zero denominator in '" + std::string(s) + "'");
  return Rational(BigInt{std::string(num)}, d);
}

}  // namespace prost
