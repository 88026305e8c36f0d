#pragma once

// shared numeric plumbing: exact rational types, decimal parsing,
// compensated summation, error taxonomy

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace hillquota {

using bigint = boost::multiprecision::cpp_int;
using bigrat = boost::multiprecision::cpp_rational;

// bad inputs (rejected before any computation starts)
struct domain_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// the computation itself could not produce a result
struct computation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// a priority/rounding comparison came out exactly equal (or within the float
// tolerance); carries the states involved so callers can redraw or report
struct tie_error : computation_error {
  std::vector<std::size_t> states;
  tie_error(const std::string& msg, std::vector<std::size_t> s)
      : computation_error(msg), states(std::move(s)) {}
};

inline bigint rat_floor(const bigrat& q) {
  bigint n = numerator(q), d = denominator(q);
  bigint t = n / d;  // truncates toward zero
  if (n < 0 && t * d != n) --t;
  return t;
}

inline bigint rat_ceil(const bigrat& q) { return -rat_floor(-q); }

// exact parse of "12", "-3.25", "4/7", "1e3", "2.5e-2" into a rational
inline bigrat parse_rational(std::string_view s) {
  auto fail = [&] { throw domain_error("not a number: '" + std::string(s) + "'"); };
  if (s.empty()) fail();

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    bigrat num = parse_rational(s.substr(0, slash));
    bigrat den = parse_rational(s.substr(slash + 1));
    if (den == 0) throw domain_error("division by zero in rational literal");
    return num / den;
  }

  std::size_t i = 0;
  bool neg = false;
  if (s[i] == '+' || s[i] == '-') neg = (s[i++] == '-');

  bigint mantissa = 0;
  long frac_digits = 0, exponent = 0;
  bool any_digit = false, in_frac = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c >= '0' && c <= '9') {
      mantissa = mantissa * 10 + (c - '0');
      if (in_frac) ++frac_digits;
      any_digit = true;
    } else if (c == '.') {
      if (in_frac) fail();
      in_frac = true;
    } else if (c == 'e' || c == 'E') {
      ++i;
      bool eneg = false;
      if (i < s.size() && (s[i] == '+' || s[i] == '-')) eneg = (s[i++] == '-');
      if (i >= s.size()) fail();
      for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') fail();
        exponent = exponent * 10 + (s[i] - '0');
        if (exponent > 100000) throw domain_error("exponent out of range");
      }
      if (eneg) exponent = -exponent;
      break;
    } else {
      fail();
    }
  }
  if (!any_digit) fail();

  bigrat r(mantissa);
  long shift = exponent - frac_digits;
  if (shift > 0)
    r *= bigrat(boost::multiprecision::pow(bigint(10), static_cast<unsigned>(shift)));
  else if (shift < 0)
    r /= bigrat(boost::multiprecision::pow(bigint(10), static_cast<unsigned>(-shift)));
  return neg ? bigrat(-r) : r;
}

// Neumaier variant of Kahan summation; deterministic for a fixed add order
template <class Real>
struct neumaier_acc {
  Real sum = 0, comp = 0;
  void add(Real v) {
    Real t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  Real total() const { return sum + comp; }
};

}  // namespace hillquota
