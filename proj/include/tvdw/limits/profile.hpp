#pragma once

#include <cstddef>
#include <vector>

#include "tvdw/rational.hpp"
#include "tvdw/weights.hpp"

namespace tvdw {

/// V_n = E[w_n(U)^2] for U uniform on [0, 1), n = 0..n_max, and the
/// interpolant sigma(h) with sigma(r^{-n}) = V_n.
///
/// Between grid points sigma is linear in log h; for h <= r^{-n_max} it stays
/// at V_{n_max}.
class VarianceProfile {
 public:
  VarianceProfile(unsigned base, const WeightSequence& weights, std::size_t n_max);

  unsigned base() const { return base_; }
  std::size_t n_max() const { return values_.size() - 1; }
  /// Correlation of neighbouring slopes: 0 for even r, 1/r for odd r.
  double alpha() const { return alpha_; }
  double at(std::size_t n) const { return values_.at(n); }
  const std::vector<double>& values() const { return values_; }

  double sigma(const Rational& h) const;
  double sigma(double h) const;

 private:
  unsigned base_;
  double alpha_;
  std::vector<double> values_;
};

VarianceProfile variance_profile(unsigned base, const WeightSequence& weights, std::size_t n_max);

}  // namespace tvdw
