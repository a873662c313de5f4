#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace tvdw {

/// Standard normal CDF through erfc.
double normal_cdf(double x);

/// sup_x |F_n(x) - Phi(x)| for the empirical CDF of `samples`.
double ks_statistic(std::vector<double> samples);

/// Welford accumulator.
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance (0 with fewer than two samples).
  double variance() const;
  double standard_error() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

double median(std::vector<double> v);
/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> v, double q);
double sample_variance(const std::vector<double>& v);
double sample_covariance(const std::vector<double>& x, const std::vector<double>& y);

double chi_square_quantile(double dof, double probability);

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double critical = 0.0;  // upper quantile at the requested level
  bool pass = false;
};

/// Goodness of fit of `counts` against the uniform law over its cells.
ChiSquareResult chi_square_uniform(const std::vector<std::uint64_t>& counts, double level = 0.01);

}  // namespace tvdw
