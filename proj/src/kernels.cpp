#include "tvdw/kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tvdw/erwvrp.hpp"
#include "tvdw/rng.hpp"

namespace tvdw {

bool openmp_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

void set_thread_count(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

std::vector<double> walk_terminal_values(double p, const EnergyTable& table, std::size_t n, std::size_t replicas,
                                         std::uint64_t seed, Exec exec) {
  if (n > table.size()) throw std::out_of_range("walk_terminal_values: table too short");
  std::vector<double> out(replicas);
  for_each_index(replicas, exec, [&](std::size_t i) {
    SignStepper stepper(p, seed, stream_id(StreamKind::walk, i));
    double s = 0.0;
    for (std::size_t k = 1; k <= n; ++k) s += table.a[k] * stepper.next();
    out[i] = s;
  });
  return out;
}

namespace {

template <class Step>
PathFunctionals trace_path(const PathFunctionalInputs& in, Step&& step) {
  const std::size_t norms = in.lil_scales.size();
  PathFunctionals r;
  r.running_max.assign(norms, -std::numeric_limits<double>::infinity());
  r.coverage.assign(norms, 0u);
  r.chung_min = std::numeric_limits<double>::infinity();
  const bool chung = !in.chung_scale.empty();
  double z = 0.0;
  double abs_max = 0.0;
  for (std::size_t k = 1; k <= in.n; ++k) {
    z += step(k);
    for (std::size_t j = 0; j < norms; ++j) {
      const double s = in.lil_scales[j][k];
      if (s <= 0.0) continue;
      const double v = s * z;
      if (v > r.running_max[j]) r.running_max[j] = v;
      if (v >= -0.9 && v < 0.9) {
        const int bin = std::min(kCoverageBins - 1, static_cast<int>((v + 0.9) / 0.2));
        r.coverage[j] |= 1u << bin;
      }
    }
    if (chung) {
      abs_max = std::max(abs_max, std::fabs(z));
      const double s = in.chung_scale[k];
      if (s > 0.0) r.chung_min = std::min(r.chung_min, s * abs_max);
    }
  }
  r.terminal = z;
  return r;
}

}  // namespace

std::vector<PathFunctionals> path_functionals(const PathSource& source, const PathFunctionalInputs& inputs,
                                              std::size_t replicas, std::uint64_t seed, Exec exec) {
  for (const auto& s : inputs.lil_scales) {
    if (s.size() <= inputs.n) throw std::invalid_argument("path_functionals: scale shorter than the horizon");
  }
  if (!inputs.chung_scale.empty() && inputs.chung_scale.size() <= inputs.n) {
    throw std::invalid_argument("path_functionals: chung scale shorter than the horizon");
  }
  if (source.kind == PathSource::Kind::walk && (!source.table || source.table->size() < inputs.n)) {
    throw std::invalid_argument("path_functionals: walk weights do not cover the horizon");
  }
  if (source.kind == PathSource::Kind::brownian && (!source.gap_sd || source.gap_sd->size() <= inputs.n)) {
    throw std::invalid_argument("path_functionals: Brownian gaps do not cover the horizon");
  }
  std::vector<PathFunctionals> out(replicas);
  for_each_index(replicas, exec, [&](std::size_t i) {
    if (source.kind == PathSource::Kind::walk) {
      SignStepper stepper(source.p, seed, stream_id(StreamKind::walk, i));
      const auto& a = source.table->a;
      out[i] = trace_path(inputs, [&](std::size_t k) { return a[k] * stepper.next(); });
    } else {
      StreamRng rng(seed, stream_id(StreamKind::brownian, i));
      const auto& sd = *source.gap_sd;
      out[i] = trace_path(inputs, [&](std::size_t k) { return sd[k] * rng.normal(); });
    }
  });
  return out;
}

Rational sample_point(std::uint64_t seed, std::uint64_t index) {
  StreamRng rng(seed, stream_id(StreamKind::sample, index));
  return Rational(rng.next_u64() >> 11, u128{1} << 53);
}

std::vector<double> sampled_increments(const FractalFunction& f, const Rational& h, std::size_t samples,
                                       std::uint64_t seed, double eps, Exec exec) {
  std::vector<double> out(samples);
  for_each_index(samples, exec, [&](std::size_t i) { out[i] = f.increment(sample_point(seed, i), h, eps).value; });
  return out;
}

std::vector<double> sampled_weighted_walks(const FractalFunction& f, std::size_t n, std::size_t samples,
                                           std::uint64_t seed, Exec exec) {
  std::vector<double> out(samples);
  for_each_index(samples, exec, [&](std::size_t i) { out[i] = f.weighted_walk(sample_point(seed, i), n); });
  return out;
}

std::vector<int> sampled_linear_depths(unsigned r, const Rational& h, std::size_t samples, std::uint64_t seed,
                                       Exec exec) {
  std::vector<int> out(samples);
  for_each_index(samples, exec, [&](std::size_t i) {
    const Rational x = sample_point(seed, i);
    int depth = match_depth(r, x, h);
    if (r % 2 == 1) depth = std::min(depth, match_depth_shifted(r, x, h));
    out[i] = depth;
  });
  return out;
}

}  // namespace tvdw
