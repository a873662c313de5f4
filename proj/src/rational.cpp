#include "tvdw/rational.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace tvdw {

namespace {

constexpr u128 kMaxDen = u128{1} << Rational::kMaxDenominatorBits;

struct Wide {
  u128 hi;
  u128 lo;
};

// Full 128x128 -> 256 bit product.
Wide mul_wide(u128 a, u128 b) {
  const u128 mask = (u128{1} << 64) - 1;
  const u128 a0 = a & mask, a1 = a >> 64;
  const u128 b0 = b & mask, b1 = b >> 64;
  const u128 p00 = a0 * b0;
  const u128 p01 = a0 * b1;
  const u128 p10 = a1 * b0;
  const u128 p11 = a1 * b1;
  const u128 mid = (p00 >> 64) + (p01 & mask) + (p10 & mask);
  Wide w;
  w.lo = (p00 & mask) | (mid << 64);
  w.hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
  return w;
}

}  // namespace

u128 gcd128(u128 a, u128 b) {
  while (b != 0) {
    u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

u128 checked_mul(u128 a, u128 b) {
  u128 out;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw std::overflow_error("128-bit overflow in exact rational arithmetic");
  }
  return out;
}

u128 checked_add(u128 a, u128 b) {
  u128 out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw std::overflow_error("128-bit overflow in exact rational arithmetic");
  }
  return out;
}

u128 checked_pow(u128 r, unsigned e) {
  u128 out = 1;
  for (unsigned i = 0; i < e; ++i) out = checked_mul(out, r);
  return out;
}

std::string to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

Rational::Rational(u128 num, u128 den) {
  if (den == 0) throw std::invalid_argument("Rational: zero denominator");
  const u128 g = gcd128(num, den);
  num_ = num / g;
  den_ = den / g;
  if (den_ > kMaxDen) {
    throw std::overflow_error("Rational: denominator exceeds 2^120");
  }
}

Rational Rational::from_double(double x) {
  if (!std::isfinite(x) || x < 0.0) {
    throw std::domain_error("Rational::from_double: expected a finite non-negative value");
  }
  if (x == 0.0) return {};
  int e = 0;
  const double m = std::frexp(x, &e);  // x = m * 2^e, m in [0.5, 1)
  auto mant = static_cast<std::uint64_t>(std::ldexp(m, 53));
  int shift = 53 - e;  // x = mant / 2^shift
  while ((mant & 1U) == 0 && shift > 0) {
    mant >>= 1;
    --shift;
  }
  if (shift <= 0) {
    if (shift < -60) throw std::overflow_error("Rational::from_double: value too large");
    return Rational(u128{mant} << (-shift), 1);
  }
  if (shift > kMaxDenominatorBits) {
    throw std::overflow_error("Rational::from_double: value needs more than 120 binary digits");
  }
  return Rational(mant, u128{1} << shift);
}

double Rational::to_double() const {
  // Long double keeps 64 bits of both parts before the final rounding.
  return static_cast<double>(static_cast<long double>(num_) / static_cast<long double>(den_));
}

Rational Rational::frac() const { return Rational(num_ % den_, den_); }

Rational operator+(const Rational& a, const Rational& b) {
  const CommonForm c = common_form(a, b);
  return Rational(checked_add(c.a, c.b), c.den);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const Wide l = mul_wide(a.num_, b.den_);
  const Wide r = mul_wide(b.num_, a.den_);
  if (l.hi != r.hi) return l.hi < r.hi ? std::strong_ordering::less : std::strong_ordering::greater;
  if (l.lo != r.lo) return l.lo < r.lo ? std::strong_ordering::less : std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Rational::to_string() const {
  return tvdw::to_string(num_) + "/" + tvdw::to_string(den_);
}

Rational torus_add(const Rational& x, const Rational& y) { return (x + y).frac(); }

CommonForm common_form(const Rational& a, const Rational& b) {
  const u128 g = gcd128(a.den(), b.den());
  const u128 fa = b.den() / g;
  const u128 fb = a.den() / g;
  const u128 den = checked_mul(a.den(), fa);
  if (den > kMaxDen) throw std::overflow_error("common denominator exceeds 2^120");
  return {checked_mul(a.num(), fa), checked_mul(b.num(), fb), den};
}

}  // namespace tvdw
