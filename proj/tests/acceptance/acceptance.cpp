// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance --list
//   acceptance --criterion N
//   acceptance            (all criteria)
//
// Every stochastic criterion runs under seed 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tvdw/blocking.hpp"
#include "tvdw/erwvrp.hpp"
#include "tvdw/fractal.hpp"
#include "tvdw/kernels.hpp"
#include "tvdw/limits/experiments.hpp"
#include "tvdw/limits/profile.hpp"

using namespace tvdw;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [violated]");
  }
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// s_n^2 for unit weights: n + 2 sum_{d<n} (n-d) alpha^d.
double unit_weight_moment(double alpha, std::size_t n) {
  double s = static_cast<double>(n);
  double power = 1.0;
  for (std::size_t d = 1; d < n; ++d) {
    power *= alpha;
    s += 2.0 * static_cast<double>(n - d) * power;
  }
  return s;
}

// sum_{m<k,l<=n} a_k a_l alpha^{|k-l|}, evaluated pair by pair.
double double_sum_moment(const std::vector<double>& a, double alpha, std::size_t m, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = m + 1; k <= n; ++k) {
    double power = 1.0;
    s += a[k] * a[k];
    for (std::size_t l = k + 1; l <= n; ++l) {
      power *= alpha;
      s += 2.0 * a[k] * a[l] * power;
    }
  }
  return s;
}

Outcome criterion_1() {
  Outcome out;
  const std::size_t n = 10000;
  const ErwvrpParams unit(0.75, WeightSequence(WeightSpec::constant_weights()), n);
  const double s2 = exact_second_moment(unit, 0, n);
  const double oracle = unit_weight_moment(unit.alpha(), n);
  out.require(std::fabs(s2 - oracle) <= 1e-10 * oracle, "closed form agreement " + num(std::fabs(s2 - oracle) / oracle));
  const double ratio = s2 / (3.0 * n) - 1.0;
  out.require(std::fabs(ratio) <= 0.01, "|s_n^2/(3n) - 1| = " + num(std::fabs(ratio)) + " <= 0.01");

  const ErwvrpParams alternating(0.75, WeightSequence(WeightSpec::alternating()), n);
  const double s2_alt = exact_second_moment(alternating, 0, n);
  const double alt_ratio = s2_alt / ((0.25 / 0.75) * n) - 1.0;
  out.require(std::fabs(alt_ratio) <= 0.01, "alternating |s_n^2/(n(1-p)/p) - 1| = " + num(std::fabs(alt_ratio)));
  return out;
}

Outcome criterion_2() {
  Outcome out;
  std::mt19937_64 gen(kSeed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t violations = 0, oracle_mismatch = 0;
  double worst_oracle = 0.0;
  const std::size_t cases = 10000;
  for (std::size_t c = 0; c < cases; ++c) {
    const double p = 0.01 + 0.98 * unif(gen);
    const std::size_t n = 2 + static_cast<std::size_t>(unif(gen) * 150);
    const std::size_t m = static_cast<std::size_t>(unif(gen) * static_cast<double>(n));
    WeightSpec spec;
    switch (c % 5) {
      case 0: {
        std::vector<double> v(n);
        for (double& x : v) x = 4.0 * unif(gen) - 2.0;
        spec = WeightSpec::explicit_list(v);
        break;
      }
      case 1: spec = WeightSpec::power(2.0 * unif(gen)); break;
      case 2: spec = WeightSpec::alternating(0.1 + 3.0 * unif(gen)); break;
      case 3: spec = WeightSpec::odd_indicator(); break;
      default: spec = WeightSpec::constant_weights(0.1 + 3.0 * unif(gen)); break;
    }
    const WeightSequence seq(spec);
    const ErwvrpParams params(p, seq, n);
    const auto table = seq.table(n);
    const double moment = exact_second_moment(params, m, n);
    const double energy = seq.energy_difference(m, n);
    const double k = K_of_p(p);
    const double slack = 1e-10 * std::max(energy * k, 1e-300);
    if (energy / k > moment + slack || moment > k * energy + slack) ++violations;
    const double oracle = double_sum_moment(table->a, params.alpha(), m, n);
    const double diff = std::fabs(oracle - moment) / std::max(energy, 1e-300);
    worst_oracle = std::max(worst_oracle, diff);
    if (diff > 1e-9) ++oracle_mismatch;
  }
  out.require(violations == 0, std::to_string(violations) + " sandwich violations in " + std::to_string(cases) + " cases");
  out.require(oracle_mismatch == 0, "pairwise-sum oracle max relative gap " + num(worst_oracle));
  return out;
}

Outcome criterion_3() {
  Outcome out;
  const double alpha_sq = 0.25;
  const std::size_t n_id = 1000;
  const ErwvrpParams params(0.75, WeightSequence(WeightSpec::odd_indicator()), 10000);
  const auto table = params.weights.table(10000);
  const auto prefix = second_moment_prefix(params.alpha(), *table, 10000);
  double worst = 0.0;
  for (std::size_t n = 1; n <= n_id; ++n) {
    const std::size_t c = (n + 1) / 2;
    double closed = static_cast<double>(c);
    double power = 1.0;
    for (std::size_t i = 1; i < c; ++i) {
      power *= alpha_sq;
      closed += 2.0 * static_cast<double>(c - i) * power;
    }
    worst = std::max(worst, std::fabs(prefix[n] - closed) / closed);
  }
  out.require(worst <= 1e-10, "max relative gap to the closed form over n <= 1000: " + num(worst));
  const double ratio = prefix[10000] / 5000.0;
  out.require(std::fabs(ratio / (5.0 / 3.0) - 1.0) <= 0.01, "s_n^2/ceil(n/2) = " + num(ratio) + " vs 5/3");
  return out;
}

// E[w_n(U)^2] by exact enumeration: psi_k for k <= n is constant on cells of
// width 1/(2 r^n), so the average over left endpoints is exact.
double enumerated_profile(const FractalFunction& f, std::size_t n) {
  const u128 cells = 2 * checked_pow(f.base(), static_cast<unsigned>(n));
  double sum = 0.0;
  for (u128 j = 0; j < cells; ++j) {
    const double w = f.weighted_walk(Rational(j, cells), n);
    sum += w * w;
  }
  return sum / static_cast<double>(cells);
}

Outcome criterion_4() {
  Outcome out;
  for (unsigned r : {2u, 4u, 10u}) {
    for (const auto& spec : {WeightSpec::constant_weights(), WeightSpec::power(0.5), WeightSpec::alternating(1.5)}) {
      const WeightSequence seq(spec);
      const VarianceProfile profile(r, seq, 30);
      std::size_t mismatches = 0;
      for (std::size_t n = 0; n <= 30; ++n) mismatches += profile.at(n) != seq.partial_energy(n);
      out.require(mismatches == 0, "r=" + std::to_string(r) + " " + to_string(spec.kind) + ": V_n == A_n");
    }
  }
  const FractalFunction even(2, WeightSequence(WeightSpec::power(0.5)));
  const FractalFunction odd(3, WeightSequence(WeightSpec::constant_weights()));
  const VarianceProfile even_profile(2, even.weights(), 12);
  const VarianceProfile odd_profile(3, odd.weights(), 12);
  double worst = 0.0;
  for (std::size_t n : {2u, 5u, 10u}) {
    worst = std::max(worst, std::fabs(enumerated_profile(even, n) - even_profile.at(n)) / even_profile.at(n));
  }
  for (std::size_t n : {2u, 5u, 7u}) {
    worst = std::max(worst, std::fabs(enumerated_profile(odd, n) - odd_profile.at(n)) / odd_profile.at(n));
  }
  out.require(worst <= 1e-12, "exact enumeration relative gap " + num(worst));
  const auto rep = profile_consistency_experiment(odd, odd_profile, {2, 5, 10}, 1000000, kSeed);
  for (const auto& s : rep.statistics) {
    if (s.verdict == Verdict::info) continue;
    out.require(s.verdict == Verdict::pass, "r=3 Monte Carlo " + s.name + " = " + num(s.value) + " <= 3");
  }
  return out;
}

Outcome criterion_5() {
  Outcome out;
  const double eps = 1e-9;
  for (unsigned r : {2u, 3u, 10u}) {
    const FractalFunction f(r, WeightSequence(WeightSpec::constant_weights()));
    std::mt19937_64 gen(kSeed + r);
    const std::uint64_t h_limit = (std::uint64_t{1} << 53) / r;
    std::uniform_int_distribution<std::uint64_t> h_num(1, h_limit - 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < 1000; ++i) {
      const Rational x = sample_point(kSeed, i);
      const Rational h(h_num(gen), u128{1} << 53);
      const auto d = decompose_increment(f, x, h, eps);
      worst = std::max(worst, std::fabs(d.residual));
    }
    out.require(worst <= 4.0 * eps, "r=" + std::to_string(r) + " max residual " + num(worst) + " <= " + num(4 * eps));
  }
  return out;
}

Outcome criterion_6() {
  Outcome out;
  struct Case {
    double p;
    WeightSpec spec;
    const char* label;
  };
  const Case cases[] = {{0.5, WeightSpec::constant_weights(), "p=0.5 const"},
                        {0.75, WeightSpec::constant_weights(), "p=0.75 const"},
                        {0.75, WeightSpec::power(0.5), "p=0.75 power 0.5"},
                        {0.75, WeightSpec::odd_indicator(), "p=0.75 odd indicator"}};
  for (const auto& c : cases) {
    const ErwvrpParams params(c.p, WeightSequence(c.spec), 5000);
    const auto rep = clt_experiment(params, 5000, 10000, kSeed);
    out.require(rep.stat("ks_distance").verdict == Verdict::pass,
                std::string(c.label) + " KS " + num(rep.stat("ks_distance").value) + " < 0.02");
  }
  return out;
}

Outcome criterion_7() {
  Outcome out;
  struct Case {
    unsigned r;
    unsigned level;
    double tolerance;
  };
  for (const Case c : {Case{2, 20, 0.02}, Case{3, 12, 0.03}}) {
    const FractalFunction f(c.r, WeightSequence(WeightSpec::constant_weights()));
    const auto profile = variance_profile(c.r, f.weights(), c.level + 1);
    ModulusOptions options;
    options.ks_tolerance = c.tolerance;
    const Rational h(1, checked_pow(c.r, c.level));
    const auto rep = modulus_experiment(f, profile, {h}, 100000, kSeed, Exec::openmp, options);
    const auto& ks = rep.stat("ks_m" + std::to_string(c.level));
    out.require(ks.verdict == Verdict::pass, "r=" + std::to_string(c.r) + " h=" + std::to_string(c.r) + "^-" +
                                                 std::to_string(c.level) + " KS " + num(ks.value) + " < " +
                                                 num(c.tolerance));
  }
  return out;
}

Outcome criterion_8() {
  Outcome out;
  const std::size_t n = 1000000;
  const ErwvrpParams params(0.75, WeightSequence(WeightSpec::constant_weights()), n);
  for (auto norm : {LilNormalization::plain_A, LilNormalization::exact_s}) {
    const auto rep = lil_experiment(params, n, 50, kSeed, norm);
    for (const char* name : {"walk_fraction_in_band", "brownian_fraction_in_band"}) {
      const auto& s = rep.stat(name);
      out.require(s.verdict == Verdict::pass,
                  to_string(norm) + " " + name + " " + num(s.value) + " >= " + num(s.lower.value_or(0.0)));
    }
  }
  return out;
}

Outcome criterion_9() {
  Outcome out;
  const std::size_t n = 1000000;
  const ErwvrpParams params(0.75, WeightSequence(WeightSpec::constant_weights()), n);
  const auto rep = chung_experiment(params, n, 50, kSeed);
  const auto& s = rep.stat("median_difference");
  out.require(s.verdict == Verdict::pass, "|median walk - median Brownian| = " + num(s.value) + " <= 0.15");
  return out;
}

Outcome criterion_10() {
  Outcome out;
  const FractalFunction f(2, WeightSequence(WeightSpec::constant_weights()));
  const auto profile = variance_profile(2, f.weights(), 40);
  const auto rep = functional_clt_experiment(f, profile, 1.0, 40, {0.25, 0.5, 1.0}, 100000, kSeed);
  for (const auto& s : rep.statistics) {
    const bool wanted = s.name.starts_with("variance_t") || s.name == "covariance_0.5000_1.0000";
    if (!wanted) continue;
    out.require(s.verdict == Verdict::pass,
                s.name + " " + num(s.value) + " in [" + num(*s.lower) + ", " + num(*s.upper) + "]");
  }
  return out;
}

Outcome criterion_11() {
  Outcome out;
  const auto rep = linear_depth_tail_experiment(3, 12, 6, 100000, kSeed);
  for (const auto& s : rep.statistics) {
    if (s.verdict == Verdict::info) continue;
    out.require(s.verdict == Verdict::pass, s.name + " " + num(s.value) + " <= " + num(*s.upper));
  }
  return out;
}

Outcome criterion_12() {
  Outcome out;
  const WeightSequence unit(WeightSpec::constant_weights());
  const auto scheme = build_blocks(unit, 1.0, 6);
  // Unit weights: A_h = h, so the next boundary is the least integer h > h_n
  // with h - h_n >= sqrt(h_n).
  std::vector<std::size_t> oracle{0};
  while (oracle.size() < 6) {
    const std::size_t last = oracle.back();
    std::size_t next = last + 1;
    while (static_cast<double>((next - last) * (next - last)) < static_cast<double>(last)) ++next;
    oracle.push_back(next);
  }
  const bool sequence_ok = std::equal(oracle.begin(), oracle.end(), scheme.boundaries.begin());
  std::string seq_text;
  for (std::size_t k = 0; k < 6; ++k) seq_text += (k ? "," : "") + std::to_string(scheme.boundaries[k]);
  out.require(sequence_ok && oracle == std::vector<std::size_t>{0, 1, 2, 4, 6, 9}, "h = (" + seq_text + ")");

  const ErwvrpParams params(0.75, unit, 1);
  const auto rep = blocks_experiment(params, 1.0, 60, 4000, kSeed);
  for (const char* name : {"telescoping_residual_max", "xi_pooled_mean_z", "xi_block_mean_max_z"}) {
    const auto& s = rep.stat(name);
    out.require(s.verdict == Verdict::pass, std::string(name) + " " + num(s.value) + " <= " + num(*s.upper));
  }
  return out;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
  double budget_seconds;  // 0: no runtime bound
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "exact variance asymptotics", criterion_1, 1.0},
      {2, "variance sandwich", criterion_2, 0.0},
      {3, "odd-indicator weights closed form", criterion_3, 0.0},
      {4, "V_n consistency", criterion_4, 30.0},
      {5, "increment decomposition identity", criterion_5, 10.0},
      {6, "central limit theorem", criterion_6, 120.0},
      {7, "modulus-of-continuity CLT", criterion_7, 120.0},
      {8, "LIL bands", criterion_8, 0.0},
      {9, "Chung statistic", criterion_9, 0.0},
      {10, "functional CLT", criterion_10, 0.0},
      {11, "odd-r digit-tail bound", criterion_11, 0.0},
      {12, "blocking and martingale approximation", criterion_12, 0.0},
  };
  return all;
}

bool run_one(const Criterion& c) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = c.run();
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (c.budget_seconds > 0) out.require(seconds < c.budget_seconds, "runtime " + num(seconds) + " s < " + num(c.budget_seconds) + " s");
  std::printf("criterion %d (%s): %s  %s  [%.2f s]\n", c.id, c.title, out.pass ? "PASS" : "FAIL", out.detail.c_str(),
              seconds);
  std::fflush(stdout);
  return out.pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--list") {
      for (const auto& c : criteria()) std::printf("%d %s\n", c.id, c.title);
      return 0;
    }
    if (arg == "--criterion" && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
      continue;
    }
    std::fprintf(stderr, "usage: acceptance [--list] [--criterion N]...\n");
    return 1;
  }
  bool all_pass = true;
  bool any = false;
  for (const auto& c : criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    any = true;
    all_pass = run_one(c) && all_pass;
  }
  if (!any) {
    std::fprintf(stderr, "no such criterion\n");
    return 1;
  }
  return all_pass ? 0 : 1;
}
