#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace tvdw {

using u128 = unsigned __int128;

/// Exact non-negative rational num/den, always kept in lowest terms.
///
/// Points of the unit torus and increments h are carried this way so that
/// r-ary digits, sawtooth slopes and k0 are computed without round-off.
/// Denominators are limited to 2^120 so that a base r < 256 times any residue
/// still fits in 128 bits.
class Rational {
 public:
  static constexpr int kMaxDenominatorBits = 120;

  Rational() = default;
  Rational(u128 num, u128 den);

  /// Exact value of a finite non-negative double.
  static Rational from_double(double x);

  u128 num() const { return num_; }
  u128 den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  double to_double() const;

  /// Fractional part (reduction onto the torus).
  Rational frac() const;
  /// Integer part.
  u128 floor() const { return num_ / den_; }

  friend Rational operator+(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  std::string to_string() const;

 private:
  u128 num_ = 0;
  u128 den_ = 1;
};

/// (x + y) mod 1.
Rational torus_add(const Rational& x, const Rational& y);

/// Two rationals rewritten over their least common denominator.
struct CommonForm {
  u128 a;
  u128 b;
  u128 den;
};
CommonForm common_form(const Rational& a, const Rational& b);

u128 gcd128(u128 a, u128 b);
/// a * b, throwing std::overflow_error when the product does not fit.
u128 checked_mul(u128 a, u128 b);
u128 checked_add(u128 a, u128 b);
/// r^e, throwing std::overflow_error on overflow.
u128 checked_pow(u128 r, unsigned e);

std::string to_string(u128 v);

}  // namespace tvdw
