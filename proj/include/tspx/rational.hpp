#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "tspx/error.hpp"

namespace tspx {

using Rational = mpq_class;
using BigInt = mpz_class;

class ParseError : public InputError {
 public:
  explicit ParseError(const std::string& what) : InputError(what) {}
};

inline Rational make_rational(long num, long den = 1) {
  if (den == 0) throw InputError("rational with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// Accepts "p" or "p/q" with optional leading '-' on p; q must be positive.
inline Rational parse_rational(const std::string& text) {
  auto is_digits = [](const std::string& s, std::size_t from) {
    if (from >= s.size()) return false;
    for (std::size_t i = from; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
  };
  std::string num = text, den = "1";
  if (auto slash = text.find('/'); slash != std::string::npos) {
    num = text.substr(0, slash);
    den = text.substr(slash + 1);
  }
  std::size_t num_start = (!num.empty() && num[0] == '-') ? 1 : 0;
  if (!is_digits(num, num_start) || !is_digits(den, 0))
    throw ParseError("malformed rational '" + text + "'");
  Rational r;
  if (r.set_str(num + "/" + den, 10) != 0 || r.get_den() == 0)
    throw ParseError("malformed rational '" + text + "'");
  r.canonicalize();
  return r;
}

// Canonical form "p/q" with q >= 1 and gcd(p, q) = 1.
inline std::string to_string(const Rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline double to_double(const Rational& r) { return r.get_d(); }

// lcm of denominators across a collection of rationals (canonical inputs).
inline BigInt common_denominator(const std::vector<Rational>& values) {
  BigInt d = 1;
  for (const auto& v : values) {
    BigInt den = v.get_den();
    mpz_lcm(d.get_mpz_t(), d.get_mpz_t(), den.get_mpz_t());
  }
  return d;
}

}  // namespace tspx
