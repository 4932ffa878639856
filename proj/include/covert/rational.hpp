#pragma once

#include <boost/rational.hpp>

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

#include "covert/errors.hpp"

namespace covert {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) {
  return boost::rational_cast<double>(r);
}

// Accepts "3", "0.25", "-1.5" and "1/3".
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] { return BadParameter("not a number: '" + std::string(text) + "'"); };
  if (text.empty()) throw fail();
  auto parse_int = [&](std::string_view part) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) throw fail();
    return value;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::int64_t den = parse_int(text.substr(slash + 1));
    if (den == 0) throw fail();
    return Rational(parse_int(text.substr(0, slash)), den);
  }
  bool negative = text.front() == '-';
  std::string_view body = negative ? text.substr(1) : text;
  auto dot = body.find('.');
  std::string_view whole = body.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : body.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw fail();
  if (frac.size() > 15) throw fail();
  std::int64_t scale = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
  std::int64_t num = (whole.empty() ? 0 : parse_int(whole)) * scale + (frac.empty() ? 0 : parse_int(frac));
  Rational r(num, scale);
  return negative ? -r : r;
}

// Canonical text: integers print bare, everything else as "num/den".
inline std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

}  // namespace covert
