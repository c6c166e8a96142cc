#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

namespace ent {

/// Arbitrary-precision integer used for group orders, indices and general
/// integer matrices.
using Integer = boost::multiprecision::cpp_int;
/// Exact rational; entropy values are logarithms of these.
using Rational = boost::multiprecision::cpp_rational;

/// Coordinate coefficient. Every stored coordinate is reduced modulo its
/// coordinate modulus, and moduli are bounded by kMaxModulus, so all
/// intermediate products fit in 128 bits.
using Coeff = std::int64_t;

inline constexpr Coeff kMaxModulus = (Coeff{1} << 31) - 1;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad dimensions, ill-defined maps, invalid tables.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A standing hypothesis of a theorem is violated by the input.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// Canonical representative in [0, m).
inline Coeff mod_floor(__int128 a, Coeff m) {
  __int128 r = a % m;
  if (r < 0) r += m;
  return static_cast<Coeff>(r);
}

/// Floor division for signed operands, m > 0.
inline Coeff div_floor(Coeff a, Coeff m) {
  Coeff q = a / m;
  if ((a % m) != 0 && a < 0) --q;
  return q;
}

/// Returns (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0.
inline std::tuple<Coeff, Coeff, Coeff> xgcd(Coeff a, Coeff b) {
  Coeff old_r = a, r = b;
  Coeff old_s = 1, s = 0;
  Coeff old_t = 0, t = 1;
  while (r != 0) {
    Coeff q = old_r / r;
    std::tie(old_r, r) = std::make_tuple(r, old_r - q * r);
    std::tie(old_s, s) = std::make_tuple(s, old_s - q * s);
    std::tie(old_t, t) = std::make_tuple(t, old_t - q * t);
  }
  if (old_r < 0) return {-old_r, -old_s, -old_t};
  return {old_r, old_s, old_t};
}

inline Integer xgcd_big(const Integer& a, const Integer& b, Integer& x, Integer& y) {
  Integer old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    Integer q = old_r / r;
    Integer tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = old_s - q * s;
    old_s = s;
    s = tmp;
    tmp = old_t - q * t;
    old_t = t;
    t = tmp;
  }
  if (old_r < 0) {
    old_r = -old_r;
    old_s = -old_s;
    old_t = -old_t;
  }
  x = old_s;
  y = old_t;
  return old_r;
}

inline Coeff lcm(Coeff a, Coeff b) { return std::lcm(a, b); }

/// Natural logarithm of a positive big integer without overflowing a double.
inline double log_of(const Integer& n) {
  if (n <= 0) throw std::domain_error("log_of: non-positive argument");
  std::size_t bits = boost::multiprecision::msb(n);
  if (bits < 900) return std::log(n.convert_to<double>());
  std::size_t shift = bits - 60;
  Integer top = n >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

inline std::string to_string(const Integer& n) { return n.str(); }

/// True when the value fits a signed 64-bit integer (used by the JSON layer).
inline bool fits_int64(const Integer& n) {
  return n >= std::numeric_limits<std::int64_t>::min() &&
         n <= std::numeric_limits<std::int64_t>::max();
}

}  // namespace ent
