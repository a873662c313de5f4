#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tvdw/erwvrp.hpp"
#include "tvdw/limits/stats.hpp"

using namespace tvdw;

namespace {

// E[(S_n - S_m)^2] by summing over all 2^n sign paths with their probabilities.
double enumerated_moment(double p, const std::vector<double>& a, std::size_t m, std::size_t n) {
  double total = 0.0;
  for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
    double prob = 0.5;
    double s = 0.0;
    int prev = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      const int x = (bits >> (k - 1)) & 1 ? 1 : -1;
      if (k > 1) prob *= x == prev ? p : 1.0 - p;
      if (k > m) s += a[k] * x;
      prev = x;
    }
    total += prob * s * s;
  }
  return total;
}

}  // namespace

TEST_CASE("parameters are validated") {
  const WeightSequence w(WeightSpec::constant_weights());
  CHECK_THROWS(ErwvrpParams(0.0, w, 10));
  CHECK_THROWS(ErwvrpParams(1.0, w, 10));
  CHECK_THROWS(ErwvrpParams(0.5, w, 0));
  CHECK(ErwvrpParams(0.8, w, 1).alpha() == doctest::Approx(0.6));
}

TEST_CASE("sign stepper follows the raw stream") {
  const double p = 0.3;
  SignStepper stepper(p, 9, stream_id(StreamKind::walk, 2));
  StreamRng raw(9, stream_id(StreamKind::walk, 2));
  const long double threshold = std::ldexp(static_cast<long double>(p), 64);
  int last = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t u = raw.next_u64();
    const int expected = last == 0 ? (u < (std::uint64_t{1} << 63) ? 1 : -1) : (u < threshold ? last : -last);
    const int got = stepper.next();
    REQUIRE(got == expected);
    last = got;
  }
}

TEST_CASE("simulated path layout") {
  const ErwvrpParams params(0.7, WeightSequence(WeightSpec::power(0.5)), 100);
  const auto path = simulate(params, 4, 17);
  CHECK(path.length() == 100);
  CHECK(path.signs[0] == 0);
  CHECK(path.partial_sums[0] == 0.0);
  double s = 0.0;
  for (std::size_t k = 1; k <= 100; ++k) {
    s += std::sqrt(static_cast<double>(k)) * path.signs[k];
    CHECK(path.partial_sums[k] == doctest::Approx(s));
  }
  const auto again = simulate(params, 4, 17);
  CHECK(again.signs == path.signs);
}

TEST_CASE("exact second moments match path enumeration") {
  const std::vector<double> a = {0.0, 1.0, -0.5, 2.0, 0.0, 1.5, 0.25, -1.0, 3.0, 0.5, 1.0};
  const ErwvrpParams params(0.65, WeightSequence(WeightSpec::explicit_list({a.begin() + 1, a.end()})), 10);
  for (std::size_t m = 0; m < 10; m += 3) {
    for (std::size_t n = m + 1; n <= 10; ++n) {
      const double oracle = enumerated_moment(0.65, a, m, n);
      CHECK(exact_second_moment(params, m, n) == doctest::Approx(oracle).epsilon(1e-12));
      CHECK(exact_second_moment(params, m, n, MomentMethod::double_sum) == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
  CHECK_THROWS(exact_second_moment(params, 5, 5));
}

TEST_CASE("prefix moments agree with single evaluations") {
  const ErwvrpParams params(0.2, WeightSequence(WeightSpec::alternating(2.0)), 500);
  const auto t = params.weights.table(500);
  const auto prefix = second_moment_prefix(params.alpha(), *t, 500);
  CHECK(prefix[0] == 0.0);
  for (std::size_t n : {1u, 2u, 77u, 500u}) {
    CHECK(prefix[n] == doctest::Approx(exact_second_moment(params, 0, n)).epsilon(1e-12));
  }
}

TEST_CASE("cross moments and mixing") {
  CHECK(exact_cross_moment(0.75, 3, 3) == 1.0);
  CHECK(exact_cross_moment(0.75, 3, 6) == doctest::Approx(0.125));
  CHECK(exact_cross_moment(0.25, 6, 3) == doctest::Approx(-0.125));
  CHECK(K_of_p(0.75) == doctest::Approx(3.0));
  CHECK(K_of_p(0.25) == doctest::Approx(3.0));
  CHECK(K_of_p(0.5) == 1.0);
  CHECK(phi_mixing(0.75, 2) == doctest::Approx(0.125));
  CHECK_THROWS(phi_mixing(0.75, 0));
}

TEST_CASE("Monte Carlo agrees with exact moments") {
  const std::size_t n = 200;
  const ErwvrpParams params(0.8, WeightSequence(WeightSpec::power(0.5)), n);
  RunningStats sq, xy;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    const auto path = simulate(params, 21, stream_id(StreamKind::walk, i));
    sq.add(path.partial_sums[n] * path.partial_sums[n]);
    xy.add(path.signs[10] * path.signs[13]);
  }
  const double s2 = exact_second_moment(params, 0, n);
  CHECK(std::fabs(sq.mean() - s2) <= 4.0 * sq.standard_error());
  CHECK(std::fabs(xy.mean() - std::pow(0.6, 3)) <= 4.0 * xy.standard_error());
}

TEST_CASE("quadrupling replicas halves the standard error") {
  const ErwvrpParams params(0.75, WeightSequence(WeightSpec::constant_weights()), 50);
  RunningStats small, large;
  for (std::uint64_t i = 0; i < 16000; ++i) {
    const double s = simulate(params, 2, stream_id(StreamKind::walk, i)).partial_sums[50];
    if (i < 4000) small.add(s);
    large.add(s);
  }
  CHECK(small.standard_error() / large.standard_error() == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("Doob decomposition reconstructs the walk") {
  for (double p : {0.1, 0.5, 0.9}) {
    const ErwvrpParams params(p, WeightSequence(WeightSpec::power(0.7)), 2000);
    const auto path = simulate(params, 8, 3);
    const auto d = doob_decompose(params, path);
    CHECK(d.max_residual <= 1e-12 * std::max(1.0, std::fabs(path.partial_sums.back())) * 10);
    CHECK(d.martingale[0] == 0.0);
    CHECK(d.differences[1] == path.signs[1]);
  }
}

TEST_CASE("martingale differences are centred given the past") {
  const ErwvrpParams params(0.7, WeightSequence(WeightSpec::constant_weights()), 20);
  RunningStats up, down;
  for (std::uint64_t i = 0; i < 40000; ++i) {
    const auto path = simulate(params, 5, stream_id(StreamKind::walk, i));
    const auto d = doob_decompose(params, path);
    (path.signs[9] > 0 ? up : down).add(d.differences[10]);
  }
  CHECK(std::fabs(up.mean()) <= 4 * up.standard_error());
  CHECK(std::fabs(down.mean()) <= 4 * down.standard_error());
}

TEST_CASE("csv writers") {
  const ErwvrpParams params(0.75, WeightSequence(WeightSpec::constant_weights()), 3);
  std::ostringstream path_out, moment_out;
  write_path_csv(path_out, simulate(params, 1, 0));
  write_moment_csv(moment_out, params, {{0, 3}});
  CHECK(path_out.str().rfind("k,X_k,S_k\n0,0,0\n", 0) == 0);
  CHECK(moment_out.str().rfind("m,n,exact,A_diff,ratio\n0,3,", 0) == 0);
}
