#include <doctest.h>

#include <cmath>
#include <random>

#include "tvdw/fractal.hpp"

using namespace tvdw;

namespace {

FractalFunction unit_function(unsigned r) { return FractalFunction(r, WeightSequence(WeightSpec::constant_weights())); }

// r^{-(k-1)} d(r^{k-1} x) in long double; exact for the small dyadic inputs used here.
long double sawtooth(unsigned r, std::size_t k, long double x) {
  long double scaled = x;
  long double scale = 1.0L;
  for (std::size_t i = 1; i < k; ++i) {
    scaled *= r;
    scale /= r;
  }
  const long double frac = scaled - std::floor(scaled);
  return scale * std::min(frac, 1.0L - frac);
}

}  // namespace

TEST_CASE("distance to the nearest integer") {
  CHECK(dist_nearest_int(0.25) == 0.25);
  CHECK(dist_nearest_int(0.75) == 0.25);
  CHECK(dist_nearest_int(2.5) == 0.5);
  CHECK(dist_nearest_int(-1.1) == doctest::Approx(0.1));
}

TEST_CASE("digit expansion and truncation") {
  const auto d = expand_digits(3, Rational(5, 9), 4);  // 0.12 in base 3
  REQUIRE(d.digits.size() == 5);
  CHECK(d.digits[0] == 0);
  CHECK(d.digits[1] == 1);
  CHECK(d.digits[2] == 2);
  CHECK(d.digits[3] == 0);
  CHECK(d.truncation(2) == Rational(5, 9));
  CHECK(d.truncation(1) == Rational(1, 3));
}

TEST_CASE("known values of the classical Takagi function") {
  const auto f = unit_function(2);
  CHECK(f.eval(Rational(1, 2), 1e-14).value == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f.eval(Rational(1, 4), 1e-14).value == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f.eval(Rational(1, 3), 1e-14).value == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(f.eval(Rational(0, 1), 1e-14).value == 0.0);
  const auto e = f.eval(Rational(1, 3), 1e-12);
  CHECK(std::fabs(e.value - 2.0 / 3.0) <= e.error_bound);
  CHECK(e.error_bound <= 1e-12);
}

TEST_CASE("closed forms for other bases and weights") {
  // frac(3^{k-1}/4) alternates 1/4, 3/4: f = (1/4) sum 3^{-(k-1)} = 3/8
  CHECK(unit_function(3).eval(Rational(1, 4), 1e-13).value == doctest::Approx(0.375).epsilon(1e-12));
  // a_k = (-1)^k, d(2^{k-1}/3) = 1/3: f = -2/9
  const FractalFunction alt(2, WeightSequence(WeightSpec::alternating()));
  CHECK(alt.eval(Rational(1, 3), 1e-13).value == doctest::Approx(-2.0 / 9.0).epsilon(1e-12));
  // a_k = k: f = (1/3) sum k 2^{-(k-1)} = 4/3
  const FractalFunction lin(2, WeightSequence(WeightSpec::power(1.0)));
  CHECK(lin.eval(Rational(1, 3), 1e-12).value == doctest::Approx(4.0 / 3.0).epsilon(1e-11));
}

TEST_CASE("evaluation agrees with direct partial sums") {
  std::mt19937_64 gen(3);
  for (unsigned r : {2u, 3u, 7u, 10u}) {
    const FractalFunction f(r, WeightSequence(WeightSpec::power(0.3)));
    for (int i = 0; i < 50; ++i) {
      const Rational x(gen() >> 44, u128{1} << 20);
      long double direct = 0.0L;
      for (std::size_t k = 1; k <= 40; ++k) direct += std::pow(static_cast<long double>(k), 0.3L) * sawtooth(r, k, x.to_double());
      const auto e = f.eval(x, 1e-10);
      CHECK(std::fabs(e.value - static_cast<double>(direct)) <= 1e-9);
    }
  }
}

TEST_CASE("double inputs use the fractional part of |x|") {
  const auto f = unit_function(2);
  CHECK(f.eval(1.25, 1e-13).value == doctest::Approx(f.eval(Rational(1, 4), 1e-13).value));
  CHECK(f.eval(-0.25, 1e-13).value == doctest::Approx(f.eval(Rational(1, 4), 1e-13).value));
}

TEST_CASE("certification fails without an envelope") {
  const FractalFunction f(2, WeightSequence(WeightSpec::geometric(3.0)));
  CHECK_FALSE(f.envelope().has_value());
  CHECK_THROWS_AS(f.eval(0.3, 1e-6), CertificationError);
}

TEST_CASE("finite support sums exactly to the support") {
  const FractalFunction f(2, WeightSequence(WeightSpec::explicit_list({1.0, 2.0})));
  // d(1/3) + 2 * d(2/3) / 2 = 2/3
  CHECK(f.eval(Rational(1, 3), 1e-15).value == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(f.tail_bound(2) == 0.0);
  const FractalFunction zero(3, WeightSequence(WeightSpec::constant_weights(0.0)));
  CHECK(zero.eval(0.2, 1e-12).value == 0.0);
}

TEST_CASE("sign walk") {
  const auto f = unit_function(2);
  CHECK(f.sign_walk(Rational(1, 3), 4) == std::vector<int>{1, -1, 1, -1});
  CHECK(f.weighted_walk(Rational(1, 3), 5) == 1.0);
  CHECK(psi_slope(2, 1, Rational(1, 2)) == -1);  // right-hand branch at the kink
  CHECK(psi_slope(3, 2, Rational(1, 9)) == 1);
  CHECK(psi_slope(3, 2, Rational(2, 9)) == -1);
  CHECK(f.memory_parameter() == 0.5);
  CHECK(unit_function(3).memory_parameter() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("scale index") {
  CHECK(scale_index(2, Rational(1, 32)) == 5);
  CHECK(scale_index(2, Rational(3, 10)) == 1);
  CHECK(scale_index(3, Rational(1, 3)) == 1);
  CHECK(scale_index(3, Rational(1, 4)) == 1);
  CHECK(scale_index(10, Rational(1, 1000)) == 3);
  CHECK(scale_index(10, Rational(999, 1000000)) == 3);
  CHECK_THROWS(scale_index(2, Rational(0, 1)));
}

TEST_CASE("match depth") {
  CHECK(match_depth(2, Rational(1, 4), Rational(1, 16)) == 3);
  CHECK(match_depth(2, Rational(15, 16), Rational(1, 8)) == -1);
  CHECK(match_depth(10, Rational(123, 1000), Rational(4, 1000)) == 2);
  CHECK(match_depth(2, 0.25, 0.0625) == 3);
  // shifted point 1/4 + 1/2 = 3/4 = 0.11b, 3/4 + 1/16 = 0.1101b
  CHECK(match_depth_shifted(2, Rational(1, 4), Rational(1, 16)) == 3);
}

TEST_CASE("linear defect matches a direct computation") {
  for (unsigned r : {2u, 3u}) {
    for (u128 j = 0; j < 64; ++j) {
      const Rational x(j, 64);
      const Rational h(3, 256);
      const std::size_t m = scale_index(r, h);
      for (std::size_t k = 1; k <= m; ++k) {
        const long double xd = x.to_double(), hd = h.to_double();
        const long double direct = sawtooth(r, k, xd + hd) - sawtooth(r, k, xd) - hd * psi_slope(r, k, x);
        CHECK(linear_defect(r, x, h, k) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("no linear defect above the linear depth") {
  std::mt19937_64 gen(11);
  for (unsigned r : {2u, 3u, 5u, 10u}) {
    for (int i = 0; i < 500; ++i) {
      const Rational x(gen() >> 24, u128{1} << 40);
      const u128 h_num = 1 + (gen() >> 24) % ((u128{1} << 40) / r - 1);
      const Rational h(h_num, u128{1} << 40);
      const int k0 = match_depth(r, x, h);
      int depth = k0;
      if (r % 2 == 1) depth = std::min(k0, match_depth_shifted(r, x, h));
      const std::size_t m = scale_index(r, h);
      for (int k = 1; k <= depth && k <= static_cast<int>(m); ++k) {
        CHECK(linear_defect(r, x, h, k) == 0.0);
      }
    }
  }
}

TEST_CASE("increment decomposition") {
  std::mt19937_64 gen(5);
  for (unsigned r : {2u, 3u, 10u}) {
    const FractalFunction f(r, WeightSequence(WeightSpec::power(0.25)));
    for (int i = 0; i < 100; ++i) {
      const Rational x(gen() >> 11, u128{1} << 53);
      const Rational h(1 + (gen() >> 11) % ((std::uint64_t{1} << 53) / r - 1), u128{1} << 53);
      const auto d = decompose_increment(f, x, h, 1e-10);
      CHECK(std::fabs(d.residual) <= 4e-10);
      CHECK(d.linear_depth <= static_cast<int>(d.m) + 1);
      const auto inc = f.increment(x, h, 1e-11);
      CHECK(std::fabs(inc.value - d.increment) <= 3e-10);
    }
  }
  const auto f = unit_function(3);
  CHECK_THROWS(decompose_increment(f, Rational(1, 5), Rational(1, 3), 1e-10));
}

TEST_CASE("increment on the torus wraps") {
  const auto f = unit_function(2);
  const auto inc = f.increment(Rational(7, 8), Rational(1, 4), 1e-13);
  const double expected = f.eval(Rational(1, 8), 1e-14).value - f.eval(Rational(7, 8), 1e-14).value;
  CHECK(inc.value == doctest::Approx(expected).epsilon(1e-12));
}
