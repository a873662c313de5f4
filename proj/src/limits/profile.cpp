#include "tvdw/limits/profile.hpp"

#include <cmath>
#include <stdexcept>

#include "tvdw/erwvrp.hpp"
#include "tvdw/fractal.hpp"

namespace tvdw {

VarianceProfile::VarianceProfile(unsigned base, const WeightSequence& weights, std::size_t n_max)
    : base_(base), alpha_(base % 2 == 0 ? 0.0 : 1.0 / base) {
  if (base < 2 || base > 255) throw std::invalid_argument("variance_profile: base must lie in [2, 255]");
  if (n_max == 0) throw std::invalid_argument("variance_profile: n_max must be at least 1");
  const auto table = weights.table(n_max);
  if (alpha_ == 0.0) {
    values_.resize(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) values_[n] = table->energy(n);
  } else {
    values_ = second_moment_prefix(alpha_, *table, n_max);
  }
}

double VarianceProfile::sigma(const Rational& h) const {
  if (h.is_zero()) throw std::invalid_argument("sigma: h must be positive");
  const std::size_t m = scale_index(base_, h);
  if (m >= n_max()) return values_.back();
  // exact grid point h = r^{-m}
  if (h.num() == 1 && h.den() == checked_pow(base_, static_cast<unsigned>(m))) return values_[m];
  const double lr = std::log(static_cast<double>(base_));
  const double theta = std::clamp((-std::log(h.to_double()) - static_cast<double>(m) * lr) / lr, 0.0, 1.0);
  return values_[m] + theta * (values_[m + 1] - values_[m]);
}

double VarianceProfile::sigma(double h) const {
  if (!(h > 0.0)) throw std::invalid_argument("sigma: h must be positive");
  return sigma(Rational::from_double(h));
}

VarianceProfile variance_profile(unsigned base, const WeightSequence& weights, std::size_t n_max) {
  return VarianceProfile(base, weights, n_max);
}

}  // namespace tvdw
