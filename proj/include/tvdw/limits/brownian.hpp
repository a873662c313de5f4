#pragma once

#include <cstdint>
#include <vector>

namespace tvdw {

/// B(t_0), B(t_1), ... for nondecreasing times starting at t_0 >= 0, with
/// B(0) = 0. Deterministic in (seed, stream).
std::vector<double> brownian_path(const std::vector<double>& times, std::uint64_t seed, std::uint64_t stream);

}  // namespace tvdw
