#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <utility>
#include <vector>

#include "tvdw/rng.hpp"
#include "tvdw/weights.hpp"

namespace tvdw {

/// Elephant random walk remembering the very recent past, with step weights.
struct ErwvrpParams {
  ErwvrpParams(double p, WeightSequence weights, std::size_t horizon);

  double p;
  WeightSequence weights;
  std::size_t horizon;

  /// 2p - 1, so that E[X_{n+1} | F_n] = alpha X_n.
  double alpha() const { return 2.0 * p - 1.0; }
};

/// Draws the sign sequence X_1, X_2, ... of one walk from a counter-based stream.
///
/// X_1 = +1 iff the first 64-bit draw is below 2^63; afterwards the walk keeps
/// its previous sign iff the draw is below p 2^64. One draw per step.
class SignStepper {
 public:
  SignStepper(double p, std::uint64_t seed, std::uint64_t stream);
  int next();

 private:
  StreamRng rng_;
  std::uint64_t stay_threshold_;
  int last_ = 0;
};

struct WalkPath {
  std::vector<int> signs;            // signs[k] = X_k for 1 <= k <= n, signs[0] = X_0 = 0
  std::vector<double> partial_sums;  // partial_sums[k] = S_k, S_0 = 0
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::size_t length() const { return partial_sums.empty() ? 0 : partial_sums.size() - 1; }
};

WalkPath simulate(const ErwvrpParams& params, std::uint64_t seed, std::uint64_t stream);

/// E[X_k X_l] = alpha^{|k-l|}.
double exact_cross_moment(double p, std::size_t k, std::size_t l);

enum class MomentMethod { recursion, double_sum };

/// E[(S_n - S_m)^2] for 0 <= m < n.
double exact_second_moment(const ErwvrpParams& params, std::size_t m, std::size_t n,
                           MomentMethod method = MomentMethod::recursion);
double exact_second_moment(double alpha, const EnergyTable& table, std::size_t m, std::size_t n,
                           MomentMethod method = MomentMethod::recursion);

/// (E[S_n^2])_{n=0..n_max}, one linear pass.
std::vector<double> second_moment_prefix(double alpha, const EnergyTable& table, std::size_t n_max);

/// max(p/(1-p), (1-p)/p).
double K_of_p(double p);

/// |alpha|^m / 2.
double phi_mixing(double p, std::size_t m);

/// S_n = M_n/(1-alpha) + first_drift_n + second_drift_n with
///   M_n = sum_{k<=n} a_k d_k,  d_k = X_k - alpha X_{k-1},  X_0 = 0,
///   first_drift_n  = alpha/(1-alpha) sum_{k<n} (a_{k+1} - a_k) X_k,
///   second_drift_n = -alpha a_n X_n / (1-alpha).
struct DoobDecomposition {
  double alpha = 0.0;
  std::vector<double> differences;   // d_k, index 0 unused
  std::vector<double> martingale;    // M_0..M_n
  std::vector<double> first_drift;   // index 0..n
  std::vector<double> second_drift;  // index 0..n
  double max_residual = 0.0;         // max_n |S_n - (M_n/(1-alpha) + drifts)|
};

DoobDecomposition doob_decompose(const ErwvrpParams& params, const WalkPath& path);

/// Columns k, X_k, S_k.
void write_path_csv(std::ostream& out, const WalkPath& path);
/// Columns m, n, exact, A_diff, ratio.
void write_moment_csv(std::ostream& out, const ErwvrpParams& params,
                      const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

}  // namespace tvdw
