// Serial reference vs OpenMP timing for the Monte Carlo kernels.
//
//   bench_kernels [scale]     scale multiplies every workload (default 1)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>

#include "tvdw/kernels.hpp"

using namespace tvdw;

namespace {

double seconds_of(const std::function<void()>& body) {
  const auto start = std::chrono::steady_clock::now();
  body();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <class Kernel>
void compare(const char* name, Kernel&& kernel) {
  decltype(kernel(Exec::serial)) serial_out, parallel_out;
  const double serial = seconds_of([&] { serial_out = kernel(Exec::serial); });
  const double parallel = seconds_of([&] { parallel_out = kernel(Exec::openmp); });
  std::printf("%-26s %10.3f %10.3f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
              serial_out == parallel_out ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t scale = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1;
  std::printf("openmp: %s, hardware threads: %u\n", openmp_available() ? "yes" : "no",
              std::thread::hardware_concurrency());
  std::printf("%-26s %10s %10s %9s\n", "kernel", "serial s", "openmp s", "speedup");

  const std::size_t n = 5000;
  const auto table = WeightSequence(WeightSpec::power(0.5)).table(n);
  compare("walk_terminal_values", [&](Exec e) { return walk_terminal_values(0.75, *table, n, 4000 * scale, 1, e); });

  PathFunctionalInputs in;
  in.n = 100000;
  const auto unit = WeightSequence(WeightSpec::constant_weights()).table(in.n);
  std::vector<double> lil(in.n + 1, 0.0), sd(in.n + 1, 1.0);
  for (std::size_t k = 16; k <= in.n; ++k) lil[k] = 1.0 / std::sqrt(2.0 * k * std::log(std::log(double(k))));
  in.lil_scales = {lil};
  compare("path_functionals (walk)", [&](Exec e) {
    const auto out = path_functionals({PathSource::Kind::walk, 0.75, unit.get(), nullptr}, in, 64 * scale, 1, e);
    std::vector<double> maxima;
    for (const auto& p : out) maxima.push_back(p.running_max[0]);
    return maxima;
  });

  const FractalFunction f(3, WeightSequence(WeightSpec::constant_weights()));
  const Rational h(1, 531441);
  compare("sampled_increments", [&](Exec e) { return sampled_increments(f, h, 20000 * scale, 1, 1e-9, e); });
  compare("sampled_weighted_walks", [&](Exec e) { return sampled_weighted_walks(f, 12, 50000 * scale, 1, e); });
  compare("sampled_linear_depths", [&](Exec e) { return sampled_linear_depths(3, h, 50000 * scale, 1, e); });
  return 0;
}
