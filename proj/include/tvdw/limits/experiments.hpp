#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tvdw/blocking.hpp"
#include "tvdw/erwvrp.hpp"
#include "tvdw/fractal.hpp"
#include "tvdw/kernels.hpp"
#include "tvdw/limits/profile.hpp"
#include "tvdw/report.hpp"

namespace tvdw {

/// Raised when an experiment's standing hypothesis does not hold for its input.
class PreconditionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// pi / sqrt(8)
inline constexpr double kChungConstant = 1.1107207345395915;

struct CltOptions {
  double ks_tolerance = 0.02;
  std::size_t min_replicas = 1000;
};

/// KS distance of S_n / s_n (exact s_n) to the standard normal.
ExperimentReport clt_experiment(const ErwvrpParams& params, std::size_t n, std::size_t replicas, std::uint64_t seed,
                                Exec exec = Exec::openmp, CltOptions options = {});

/// Denominator D_n in S_n / sqrt(2 D_n log log D_n).
enum class LilNormalization {
  exact_s,     // s_n^2
  plain_A,     // A_n
  scaled_A,    // p/(1-p) A_n
  appendix_b,  // A_n, compared with sqrt((2p^2-2p+1) / (2p(1-p)))
};

std::string to_string(LilNormalization n);
LilNormalization lil_normalization_from_string(const std::string& name);

/// Terminal running maxima must fall in [lower, upper] for at least
/// `min_fraction` of replicas, or, with `use_median`, their median must.
struct LilBands {
  double lower = 0.0;
  double upper = 0.0;
  double min_fraction = 0.9;
  bool use_median = false;
};

LilBands default_lil_bands(LilNormalization normalization, double p);

struct LilOptions {
  std::optional<LilBands> bands;
  double coverage_min_fraction = 0.8;
  std::size_t min_horizon = 100000;
};

ExperimentReport lil_experiment(const ErwvrpParams& params, std::size_t n_max, std::size_t replicas,
                                std::uint64_t seed, LilNormalization normalization, Exec exec = Exec::openmp,
                                LilOptions options = {});

struct ChungOptions {
  double median_tolerance = 0.15;
  std::size_t min_horizon = 100000;
};

/// Running minimum of sqrt(loglog s_n^2 / s_n^2) max_{k<=n} |S_k| for the walk
/// and for B(s_k^2) on the same grid.
ExperimentReport chung_experiment(const ErwvrpParams& params, std::size_t n_max, std::size_t replicas,
                                  std::uint64_t seed, Exec exec = Exec::openmp, ChungOptions options = {});

struct ModulusOptions {
  double ks_tolerance = 0.02;
  double eps_relative = 1e-6;      // certified error per increment, relative to h sqrt(sigma(h))
  std::size_t sup_samples = 2000;  // x-samples used for the running-sup statistic
};

/// Normalised increments (f(x+h) - f(x)) / (h sqrt(sigma(h))) over uniform x.
ExperimentReport modulus_experiment(const FractalFunction& f, const VarianceProfile& profile,
                                    const std::vector<Rational>& h_grid, std::size_t x_samples, std::uint64_t seed,
                                    Exec exec = Exec::openmp, ModulusOptions options = {});

struct FcltOptions {
  double tolerance = 0.05;
  double regular_variation_tolerance = 0.05;
  double eps_relative = 1e-6;
};

/// Paths t -> (f(x + h_t) - f(x)) / (h_t sqrt(V_n)), h_t = r^{-floor(n t^{1/beta})}.
/// Throws PreconditionFailed when the weights are not validated or V is not
/// regularly varying with index beta on the grid.
ExperimentReport functional_clt_experiment(const FractalFunction& f, const VarianceProfile& profile, double beta,
                                           std::size_t n, const std::vector<double>& t_grid, std::size_t x_samples,
                                           std::uint64_t seed, Exec exec = Exec::openmp, FcltOptions options = {});

/// Monte Carlo E[w_n(U)^2] against V_n, within `se_multiple` standard errors.
ExperimentReport profile_consistency_experiment(const FractalFunction& f, const VarianceProfile& profile,
                                                const std::vector<std::size_t>& levels, std::size_t x_samples,
                                                std::uint64_t seed, Exec exec = Exec::openmp,
                                                double se_multiple = 3.0);

/// P(level - min(k0, k0_shifted) >= j) against 2 r^{-(j-1)} + 3 SE, h = r^{-level}.
ExperimentReport linear_depth_tail_experiment(unsigned r, std::size_t level, std::size_t j_max, std::size_t x_samples,
                                              std::uint64_t seed, Exec exec = Exec::openmp);

struct BlocksOptions {
  double tol = 1e-12;
  GordinOptions gordin;
};

/// Blocking scheme table, telescoping residuals and the mean of xi_j over paths.
ExperimentReport blocks_experiment(const ErwvrpParams& params, double delta, std::size_t count, std::size_t replicas,
                                   std::uint64_t seed, Exec exec = Exec::openmp, BlocksOptions options = {});

}  // namespace tvdw
