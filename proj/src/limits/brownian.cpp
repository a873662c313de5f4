#include "tvdw/limits/brownian.hpp"

#include <cmath>
#include <stdexcept>

#include "tvdw/rng.hpp"

namespace tvdw {

std::vector<double> brownian_path(const std::vector<double>& times, std::uint64_t seed, std::uint64_t stream) {
  std::vector<double> out(times.size(), 0.0);
  if (times.empty()) return out;
  if (!(times[0] >= 0.0)) throw std::invalid_argument("brownian_path: times must start at t >= 0");
  StreamRng rng(seed, stream);
  double prev_t = 0.0;
  double value = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double gap = times[i] - prev_t;
    if (!(gap >= 0.0)) throw std::invalid_argument("brownian_path: times must be nondecreasing");
    if (gap > 0.0) value += std::sqrt(gap) * rng.normal();
    out[i] = value;
    prev_t = times[i];
  }
  return out;
}

}  // namespace tvdw
