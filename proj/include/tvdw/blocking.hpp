#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "tvdw/erwvrp.hpp"
#include "tvdw/fractal.hpp"
#include "tvdw/weights.hpp"

namespace tvdw {

/// Block boundaries 0 = h_1 < h_2 < ... with energies B_n = A_{h_n} growing by
/// at least B_n^{1-delta/2} per block, and delays H_n.
///
/// Vectors are 0-based: boundaries[n-1] = h_n. Block j covers (h_j, h_{j+1}].
struct BlockingScheme {
  double delta = 1.0;
  double alpha = 0.0;
  std::vector<std::size_t> boundaries;
  std::vector<double> energies;
  std::vector<std::size_t> delays;

  std::size_t block_count() const { return boundaries.empty() ? 0 : boundaries.size() - 1; }
  std::size_t h(std::size_t n) const { return boundaries.at(n - 1); }
};

/// H = floor(24 log B / log(1/|alpha|)) + 1 when B > 1 and alpha != 0, else 1.
std::size_t delay_length(double energy, double alpha);

/// Throws when the weights stop adding energy before `count` boundaries form.
BlockingScheme build_blocks(const WeightSequence& seq, double delta, std::size_t count, double alpha = 0.0,
                            std::size_t max_index = std::size_t{1} << 28);

struct BlockStatistics {
  std::vector<double> block_sums;       // Y_j, j = 1..M at index j-1
  std::vector<double> block_variances;  // sigma_j^2 = E[Y_j^2]
  std::vector<double> prefix_moments;   // s^2_{h_j}, j = 1..M+1 at index j-1
};

BlockStatistics block_statistics(const ErwvrpParams& params, const BlockingScheme& scheme, const WalkPath& path);

/// Which sign multiplies the series in u_j.
enum class AnchorPolicy {
  preceding_block_end,  // X_{h_j}, the last sign of block j-1
  displayed_index,      // X_{h_{j-1}}
};

struct GordinOptions {
  AnchorPolicy anchor = AnchorPolicy::preceding_block_end;
  // u_j sums a_{k+h_j} alpha^{k + exponent_offset}. Offset 0 is the exact
  // conditional expectation of the future given X_{h_j}.
  int exponent_offset = 1;
  std::size_t base_budget = 64;
  std::size_t validation_horizon = 1 << 14;
};

struct CorrectorValue {
  double value = 0.0;
  double tail_bound = 0.0;
  std::size_t terms = 0;
};

/// Deterministic series c_j = sum_{k>=1} a_{k+h_j} alpha^{k+offset}, so that
/// u_j = anchor_sign * c_j.
/// All c_j for j = 1..M+1 are certified to `tol` at construction.
class GordinCorrector {
 public:
  GordinCorrector(const ErwvrpParams& params, const BlockingScheme& scheme, double tol, GordinOptions options = {});

  /// u_j for 1 <= j <= M+1; anchor_sign in {-1, 0, +1}.
  CorrectorValue value(std::size_t j, int anchor_sign) const;
  /// Index of the sign that multiplies the series for block j (0 means X_0 = 0).
  std::size_t anchor_index(std::size_t j) const;

  double tol() const { return tol_; }
  const GordinOptions& options() const { return options_; }

 private:
  BlockingScheme scheme_;
  double tol_;
  GordinOptions options_;
  std::vector<CorrectorValue> series_;
};

CorrectorValue gordin_corrector(const ErwvrpParams& params, const BlockingScheme& scheme, std::size_t j,
                                int anchor_sign, double tol, GordinOptions options = {});

struct XiSequence {
  std::vector<double> block_sums;  // Y_j
  std::vector<double> correctors;  // u_j, j = 1..M+1 at index j-1
  std::vector<double> xi;          // xi_j = Y_j - u_j + u_{j+1}
  std::vector<double> v;           // v_j = u_j - u_{j+1}
  double tail_bound_sum = 0.0;
  double telescoping_residual = 0.0;  // |sum xi + u_1 - u_{M+1} - sum Y|
};

XiSequence xi_sequence(const ErwvrpParams& params, const BlockingScheme& scheme, const WalkPath& path, double tol,
                       GordinOptions options = {});
XiSequence xi_sequence(const GordinCorrector& corrector, const BlockingScheme& scheme, const WalkPath& path);

/// Columns j, h_j, B_j, H_j, sigma_j_sq, s_sq_h_j (sigma_j_sq empty on the last boundary).
void write_block_csv(std::ostream& out, const ErwvrpParams& params, const BlockingScheme& scheme);

}  // namespace tvdw
