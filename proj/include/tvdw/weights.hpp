#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace tvdw {

enum class WeightKind { constant, power, alternating, odd_indicator, explicit_list, geometric };

/// Generator rule for the deterministic step weights a_k, k >= 1.
///
///   constant       a_k = value
///   power          a_k = k^beta
///   alternating    a_k = value * (-1)^k
///   odd_indicator  a_k = 1 for odd k, 0 for even k
///   explicit_list  a_k = values[k-1], zero past the end of the list
///   geometric      a_k = ratio^k (negative-test generator)
struct WeightSpec {
  WeightKind kind = WeightKind::constant;
  double value = 1.0;
  double beta = 0.0;
  double ratio = 2.0;
  std::vector<double> values;

  static WeightSpec constant_weights(double value = 1.0) { return {WeightKind::constant, value, 0.0, 2.0, {}}; }
  static WeightSpec power(double beta) { return {WeightKind::power, 1.0, beta, 2.0, {}}; }
  static WeightSpec alternating(double value = 1.0) { return {WeightKind::alternating, value, 0.0, 2.0, {}}; }
  static WeightSpec odd_indicator() { return {WeightKind::odd_indicator, 1.0, 0.0, 2.0, {}}; }
  static WeightSpec explicit_list(std::vector<double> v) { return {WeightKind::explicit_list, 1.0, 0.0, 2.0, std::move(v)}; }
  static WeightSpec geometric(double ratio) { return {WeightKind::geometric, 1.0, 0.0, ratio, {}}; }

  /// {"kind": ..., parameters...} with only the parameters the kind uses.
  nlohmann::json to_json() const;
  /// Accepts the object form or a bare kind name ("const", "power", ...).
  static WeightSpec from_json(const nlohmann::json& j);

  /// a_k for k >= 1, evaluated directly from the rule.
  double at(std::size_t k) const;
  /// Index of the last possibly nonzero weight, when the support is finite.
  std::optional<std::size_t> support() const;
  /// A delta for which (A2) holds for this rule, if one is known in closed form.
  std::optional<double> natural_delta() const;

  friend bool operator==(const WeightSpec&, const WeightSpec&) = default;
};

std::string to_string(WeightKind kind);
WeightKind weight_kind_from_string(const std::string& name);

/// Immutable snapshot of the first n weights and their partial energies.
///
/// A_n is accumulated as an unevaluated double-double (hi + lo) so that
/// differences A_n - A_m keep full relative precision.
struct EnergyTable {
  std::vector<double> a;   // a[k] = a_k, a[0] unused
  std::vector<double> hi;  // A_k = hi[k] + lo[k], A_0 = 0
  std::vector<double> lo;

  std::size_t size() const { return a.empty() ? 0 : a.size() - 1; }
  double energy(std::size_t n) const { return hi[n] + lo[n]; }
  double energy_difference(std::size_t m, std::size_t n) const { return (hi[n] - hi[m]) + (lo[n] - lo[m]); }
};

/// Weight sequence with a memoised, internally synchronised energy cache.
///
/// Copies share the cache. Snapshots returned by table() are immutable and
/// may be read from any thread while another thread extends the cache.
class WeightSequence {
 public:
  explicit WeightSequence(WeightSpec spec, std::optional<double> delta_hint = std::nullopt,
                          std::optional<double> k_hint = std::nullopt);

  const WeightSpec& spec() const { return spec_; }
  std::optional<double> delta_hint() const { return delta_hint_; }
  std::optional<double> k_hint() const { return k_hint_; }

  double a(std::size_t k) const { return spec_.at(k); }

  /// A_n = sum_{k<=n} a_k^2, A_0 = 0.
  double partial_energy(std::size_t n) const;
  /// A_n - A_m for m <= n, at double-double accuracy.
  double energy_difference(std::size_t m, std::size_t n) const;

  /// Snapshot covering at least indices 0..n.
  std::shared_ptr<const EnergyTable> table(std::size_t n) const;

 private:
  struct State;

  WeightSpec spec_;
  std::optional<double> delta_hint_;
  std::optional<double> k_hint_;
  std::shared_ptr<State> state_;
};

/// Finite-horizon check of a_n^2 <= K A_n^{1-delta}.
struct AssumptionDiagnostics {
  double delta = 1.0;
  std::size_t n_max = 0;
  double k_hat = 0.0;            // max_n a_n^2 / A_n^{1-delta}, with 0/0 := 0
  std::size_t worst_index = 0;   // argmax of the ratio
  double trailing_slope = 0.0;   // least-squares slope of log ratio vs log n, last quarter
  double slope_threshold = 0.0;
  bool pass = false;
};

/// Slope above which the trailing ratio is read as diverging.
inline constexpr double kDivergenceSlope = 0.05;

AssumptionDiagnostics validate_assumptions(const WeightSequence& seq, double delta, std::size_t n_max);

/// Polynomial and geometric growth checks for A_n.
struct GrowthDiagnostics {
  double delta = 1.0;
  double q = 2.0;
  std::size_t n0 = 1;
  std::size_t n_max = 0;
  double sup_polynomial_ratio = 0.0;  // sup_{n<=n_max} A_n / n^{1/delta}
  double polynomial_slope = 0.0;      // trailing slope of log(A_n / n^{1/delta})
  bool polynomial_pass = false;
  bool exponential_pass = false;       // A_{n+k} <= A_n q^k for all n0 <= n < n+k <= n_max
  std::optional<std::size_t> smallest_n0;  // smallest admissible n0 within the horizon
  bool pass() const { return polynomial_pass && exponential_pass; }
};

GrowthDiagnostics growth_report(const WeightSequence& seq, double delta, double q, std::size_t n0,
                                std::size_t n_max);

/// Pointwise envelope |a_{n+j}| <= sqrt(K (A_n q^j)^{1-delta}) for n >= n0,
/// built from a validated delta and a verified geometric growth bound.
///
/// The envelope is what turns the summability of the weights into a numeric
/// tail certificate; it is only as good as the finite horizon it was checked on,
/// so the constant carries a safety factor over the observed K_hat.
struct TailEnvelope {
  double k_bound = 0.0;
  double delta = 1.0;
  double q = 1.0;
  std::size_t n0 = 1;
  std::size_t checked_to = 0;
  std::optional<std::size_t> support;

  /// Upper bound for |a_{n+j}|, valid when n >= n0 and n lies in `table`.
  double abs_bound(const EnergyTable& table, std::size_t n, std::size_t j) const;
};

inline constexpr double kEnvelopeSafety = 2.0;

/// Returns nullopt when (A2) does not validate for delta or no admissible n0
/// exists for q within the horizon.
std::optional<TailEnvelope> certify_envelope(const WeightSequence& seq, double delta, double q,
                                             std::size_t horizon);

}  // namespace tvdw
