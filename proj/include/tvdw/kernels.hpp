#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <vector>

#include "tvdw/fractal.hpp"
#include "tvdw/rational.hpp"
#include "tvdw/weights.hpp"

namespace tvdw {

/// Every kernel has a serial reference and an OpenMP variant. Replica i always
/// draws from its own stream, so both produce bitwise identical output.
enum class Exec { serial, openmp };

bool openmp_available();
/// Sets the OpenMP thread count (no-op without OpenMP).
void set_thread_count(int threads);

/// Runs body(i) for i in [0, count); rethrows the first exception on the caller.
template <class Body>
void for_each_index(std::size_t count, Exec exec, Body&& body) {
  if (exec == Exec::serial || !openmp_available()) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex guard;
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(guard);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

/// S_n of replica i on stream (walk, i).
std::vector<double> walk_terminal_values(double p, const EnergyTable& table, std::size_t n, std::size_t replicas,
                                         std::uint64_t seed, Exec exec);

/// Per-index scales applied to a path Z_k: 0 marks an inactive index.
struct PathFunctionalInputs {
  std::size_t n = 0;
  std::vector<std::vector<double>> lil_scales;  // running max of scale[k] * Z_k, one entry per normalisation
  std::vector<double> chung_scale;              // running min of scale[k] * max_{i<=k} |Z_i|; empty to skip
};

/// Bins of width 0.2 covering [-0.9, 0.9].
inline constexpr int kCoverageBins = 9;
inline constexpr std::uint32_t kFullCoverage = (1u << kCoverageBins) - 1;

struct PathFunctionals {
  std::vector<double> running_max;       // per normalisation
  std::vector<std::uint32_t> coverage;   // per normalisation, bit b set when bin b was visited
  double chung_min = 0.0;
  double terminal = 0.0;                 // Z_n
};

/// Z_k = S_k of an ERWVRP (stream (walk, i)) or Z_k = B(t_k) with
/// Gaussian increments of standard deviation gap_sd[k] (stream (brownian, i)).
struct PathSource {
  enum class Kind { walk, brownian };
  Kind kind = Kind::walk;
  double p = 0.5;
  const EnergyTable* table = nullptr;         // walk weights
  const std::vector<double>* gap_sd = nullptr;  // brownian increments, index 1..n
};

std::vector<PathFunctionals> path_functionals(const PathSource& source, const PathFunctionalInputs& inputs,
                                              std::size_t replicas, std::uint64_t seed, Exec exec);

/// x_i = 53-bit dyadic uniform drawn from stream (sample, i).
Rational sample_point(std::uint64_t seed, std::uint64_t index);

/// f(x_i + h) - f(x_i) for i < samples, each certified to eps.
std::vector<double> sampled_increments(const FractalFunction& f, const Rational& h, std::size_t samples,
                                       std::uint64_t seed, double eps, Exec exec);

/// w_n(x_i) for i < samples.
std::vector<double> sampled_weighted_walks(const FractalFunction& f, std::size_t n, std::size_t samples,
                                           std::uint64_t seed, Exec exec);

/// min(k0, k0_shifted)(x_i, h) for i < samples (k0 alone for even r).
std::vector<int> sampled_linear_depths(unsigned r, const Rational& h, std::size_t samples, std::uint64_t seed,
                                       Exec exec);

}  // namespace tvdw
