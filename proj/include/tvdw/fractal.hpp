#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tvdw/rational.hpp"
#include "tvdw/weights.hpp"

namespace tvdw {

/// Raised when a series tail cannot be bounded within the term budget.
class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Distance from x to its nearest integer.
double dist_nearest_int(double x);

/// r-ary expansion of a point, digits[0] = integer part, digits[k] = k-th digit.
/// Greedy expansion of an exact rational, so it never ends in an all-(r-1) tail.
struct DigitExpansion {
  unsigned base = 2;
  std::vector<std::uint32_t> digits;

  /// sum_{k<=L} digits[k] r^{-k}
  Rational truncation(std::size_t length) const;
};

DigitExpansion expand_digits(unsigned base, const Rational& x, std::size_t count);

/// Iterates the residues N_k = r^{k-1} num mod den of a point num/den, so that
/// frac(r^{k-1} x) = N_k / den exactly.
class ResidueWalk {
 public:
  ResidueWalk(unsigned base, u128 num, u128 den);

  u128 residue() const { return residue_; }
  u128 den() const { return den_; }
  /// Right-hand slope of the k-th sawtooth at the current index.
  int slope() const { return 2 * residue_ < den_ ? 1 : -1; }
  /// Numerator of d(r^{k-1} x) over den.
  u128 distance_numerator() const { return std::min(residue_, den_ - residue_); }
  void advance() { residue_ = (residue_ * base_) % den_; }

 private:
  u128 residue_;
  u128 den_;
  u128 base_;
};

struct Evaluation {
  double value = 0.0;
  double error_bound = 0.0;
  std::size_t terms = 0;
};

struct FractalOptions {
  std::size_t max_terms = 4096;
  std::size_t validation_horizon = 4096;
};

/// Weighted Takagi-van der Waerden function
///   f(x) = sum_k a_k r^{-(k-1)} d(r^{k-1} x).
class FractalFunction {
 public:
  FractalFunction(unsigned base, WeightSequence weights, FractalOptions options = {});

  unsigned base() const { return base_; }
  bool even() const { return base_ % 2 == 0; }
  /// 1/2 for even r, (r+1)/(2r) for odd r.
  double memory_parameter() const;
  const WeightSequence& weights() const { return weights_; }
  const std::optional<TailEnvelope>& envelope() const { return envelope_; }
  /// delta used for the tail envelope (hint, else the generator's closed form).
  std::optional<double> delta() const { return delta_; }

  Evaluation eval(double x, double eps) const;
  Evaluation eval(const Rational& x, double eps) const;

  /// f(x + h) - f(x) on the torus, summed term by term from exact residues.
  Evaluation increment(const Rational& x, const Rational& h, double eps) const;

  /// (psi_k^+(x))_{k=1..n}
  std::vector<int> sign_walk(const Rational& x, std::size_t n) const;
  std::vector<int> sign_walk(double x, std::size_t n) const { return sign_walk(Rational::from_double(x), n); }
  /// w_n(x) = sum_{k<=n} a_k psi_k^+(x)
  double weighted_walk(const Rational& x, std::size_t n) const;
  double weighted_walk(double x, std::size_t n) const { return weighted_walk(Rational::from_double(x), n); }

  /// Upper bound on (1/2) sum_{k>n} |a_k| r^{-(k-1)}; throws CertificationError
  /// without an envelope.
  double tail_bound(std::size_t n) const;

 private:
  // Sums a_k * term_k(k) for k >= 1 until the certified tail drops below eps.
  template <class Term>
  Evaluation sum_series(Term&& term, double eps) const;

  unsigned base_;
  WeightSequence weights_;
  FractalOptions options_;
  std::optional<double> delta_;
  std::optional<TailEnvelope> envelope_;
};

/// psi_k^+(x): +1 if frac(r^{k-1} x) < 1/2, else -1 (right-hand branch at 1/2).
int psi_slope(unsigned r, std::size_t k, const Rational& x);
int psi_slope(unsigned r, std::size_t k, double x);

/// m(h): the unique m with r^{-(m+1)} < h <= r^{-m}, by exact comparison.
std::size_t scale_index(unsigned r, const Rational& h);

/// k0(x, h): length of the common digit prefix of x and x+h (-1 on wrap past 1).
int match_depth(unsigned r, const Rational& x, const Rational& h);
inline int match_depth(unsigned r, double x, double h) {
  return match_depth(r, Rational::from_double(x), Rational::from_double(h));
}
/// k0(x + 1/2 mod 1, h).
int match_depth_shifted(unsigned r, const Rational& x, const Rational& h);
inline int match_depth_shifted(unsigned r, double x, double h) {
  return match_depth_shifted(r, Rational::from_double(x), Rational::from_double(h));
}

/// f(x+h) - f(x) = h w_m(x) + midrange + tail, with the residual against
/// independently evaluated f values.
struct IncrementDecomposition {
  std::size_t m = 0;
  int k0 = 0;
  std::optional<int> k0_shifted;  // odd r only
  int linear_depth = 0;           // k0 for even r, min(k0, k0_shifted) for odd r
  double linear_term = 0.0;
  double midrange_term = 0.0;
  double tail_term = 0.0;
  double tail_bound = 0.0;
  std::vector<double> midrange_contributions;  // index k - (linear_depth + 1)
  double increment = 0.0;    // eval(x+h) - eval(x)
  double eval_error = 0.0;   // combined certified error of the two evaluations
  double residual = 0.0;
};

IncrementDecomposition decompose_increment(const FractalFunction& f, const Rational& x, const Rational& h,
                                           double eps);
inline IncrementDecomposition decompose_increment(const FractalFunction& f, double x, double h, double eps) {
  return decompose_increment(f, Rational::from_double(x), Rational::from_double(h), eps);
}

/// psi_k(x+h) - psi_k(x) - h psi_k^+(x) for 1 <= k <= m(h), rounded once from
/// its exact rational value.
double linear_defect(unsigned r, const Rational& x, const Rational& h, std::size_t k);

}  // namespace tvdw
