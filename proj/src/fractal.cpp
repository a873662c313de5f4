#include "tvdw/fractal.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tvdw {

namespace {

constexpr double kUnitRoundoff = 0x1.0p-53;

void check_base(unsigned r) {
  if (r < 2 || r > 255) throw std::invalid_argument("base r must lie in [2, 255]");
}

using i128 = __int128;

// Neumaier-compensated running sum.
struct CompensatedSum {
  long double sum = 0;
  long double comp = 0;
  void add(long double v) {
    const long double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) comp += (sum - t) + v;
    else comp += (v - t) + sum;
    sum = t;
  }
  long double value() const { return sum + comp; }
};

}  // namespace

double dist_nearest_int(double x) {
  const double f = x - std::floor(x);
  return std::min(f, 1.0 - f);
}

Rational DigitExpansion::truncation(std::size_t length) const {
  if (length + 1 > digits.size()) throw std::out_of_range("truncation longer than the expansion");
  const u128 scale = checked_pow(base, static_cast<unsigned>(length));
  u128 num = checked_mul(digits[0], scale);
  u128 place = scale;
  for (std::size_t k = 1; k <= length; ++k) {
    place /= base;
    num = checked_add(num, checked_mul(digits[k], place));
  }
  return Rational(num, scale);
}

DigitExpansion expand_digits(unsigned base, const Rational& x, std::size_t count) {
  check_base(base);
  DigitExpansion e;
  e.base = base;
  e.digits.reserve(count + 1);
  e.digits.push_back(static_cast<std::uint32_t>(x.floor()));
  u128 residue = x.num() % x.den();
  for (std::size_t k = 1; k <= count; ++k) {
    const u128 t = residue * base;
    e.digits.push_back(static_cast<std::uint32_t>(t / x.den()));
    residue = t % x.den();
  }
  return e;
}

ResidueWalk::ResidueWalk(unsigned base, u128 num, u128 den) : residue_(num % den), den_(den), base_(base) {
  check_base(base);
  if (den > (u128{1} << Rational::kMaxDenominatorBits)) throw std::overflow_error("ResidueWalk: denominator too large");
}

int psi_slope(unsigned r, std::size_t k, const Rational& x) {
  if (k == 0) throw std::invalid_argument("psi_slope: k starts at 1");
  ResidueWalk walk(r, x.num(), x.den());
  for (std::size_t i = 1; i < k; ++i) walk.advance();
  return walk.slope();
}

int psi_slope(unsigned r, std::size_t k, double x) { return psi_slope(r, k, Rational::from_double(std::fabs(x))); }

std::size_t scale_index(unsigned r, const Rational& h) {
  check_base(r);
  if (h.is_zero()) throw std::invalid_argument("scale_index: h must be positive");
  if (h.num() >= h.den()) return 0;
  std::size_t m = 0;
  u128 p = h.num();
  while (p * r <= h.den()) {  // p <= den <= 2^120, so p * r cannot overflow
    p *= r;
    ++m;
  }
  return m;
}

int match_depth(unsigned r, const Rational& x, const Rational& h) {
  check_base(r);
  if (h.is_zero()) throw std::invalid_argument("match_depth: h must be positive");
  if (x.num() >= x.den()) throw std::invalid_argument("match_depth: x must lie in [0, 1)");
  const CommonForm c = common_form(x, h);
  const u128 y = checked_add(c.a, c.b);
  if (y >= c.den) return -1;  // integer digit of x+h is 1
  u128 nx = c.a;
  u128 ny = y;
  for (int k = 1;; ++k) {
    const u128 tx = nx * r;
    const u128 ty = ny * r;
    if (tx / c.den != ty / c.den) return k - 1;
    nx = tx % c.den;
    ny = ty % c.den;
  }
}

int match_depth_shifted(unsigned r, const Rational& x, const Rational& h) {
  return match_depth(r, torus_add(x, Rational(1, 2)), h);
}

double linear_defect(unsigned r, const Rational& x, const Rational& h, std::size_t k) {
  check_base(r);
  const std::size_t m = scale_index(r, h);
  if (k == 0 || k > m) throw std::invalid_argument("linear_defect: need 1 <= k <= m(h)");
  const CommonForm c = common_form(x.frac(), h);
  ResidueWalk wx(r, c.a, c.den);
  ResidueWalk wy(r, (c.a + c.b) % c.den, c.den);
  u128 hr = c.b;
  long double scale = 1.0L;
  for (std::size_t i = 1; i < k; ++i) {
    wx.advance();
    wy.advance();
    hr *= r;  // hr <= den * r^{k-1-m} <= den
    scale /= r;
  }
  const i128 num = (static_cast<i128>(wy.distance_numerator()) - static_cast<i128>(wx.distance_numerator())) -
                   static_cast<i128>(wx.slope()) * static_cast<i128>(hr);
  if (num == 0) return 0.0;
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(c.den) * scale);
}

FractalFunction::FractalFunction(unsigned base, WeightSequence weights, FractalOptions options)
    : base_(base), weights_(std::move(weights)), options_(options) {
  check_base(base);
  delta_ = weights_.delta_hint() ? weights_.delta_hint() : weights_.spec().natural_delta();
  if (delta_) {
    const double q = *delta_ < 1.0 ? std::pow(static_cast<double>(base_), 1.0 / (1.0 - *delta_)) : 2.0;
    envelope_ = certify_envelope(weights_, *delta_, q, options_.validation_horizon);
  } else if (weights_.spec().support()) {
    envelope_ = certify_envelope(weights_, 1.0, 2.0, options_.validation_horizon);
  }
}

double FractalFunction::memory_parameter() const {
  return even() ? 0.5 : (base_ + 1.0) / (2.0 * base_);
}

double FractalFunction::tail_bound(std::size_t n) const {
  if (!envelope_) {
    throw CertificationError("no validated tail envelope for weights " + weights_.spec().to_json().dump() +
                             "; the continuity condition cannot be certified");
  }
  const TailEnvelope& env = *envelope_;
  if (env.support && n >= *env.support) return 0.0;
  if (n < env.n0) return std::numeric_limits<double>::infinity();
  const auto table = weights_.table(n);
  const double c = env.delta >= 1.0 ? 1.0 : std::pow(env.q, 0.5 * (1.0 - env.delta));
  const double theta = c / base_;
  if (!(theta < 1.0)) return std::numeric_limits<double>::infinity();
  const double b0 = env.abs_bound(*table, n, 0);
  const double log_tail = std::log(0.5 * b0) - static_cast<double>(n - 1) * std::log(static_cast<double>(base_)) +
                          std::log(theta / (1.0 - theta));
  return std::exp(log_tail);
}

template <class Term>
Evaluation FractalFunction::sum_series(Term&& term, double eps) const {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!envelope_) tail_bound(0);  // throws with the reason
  const auto table = weights_.table(options_.max_terms);
  CompensatedSum sum;
  long double abs_sum = 0;
  for (std::size_t k = 1; k <= options_.max_terms; ++k) {
    const long double summand = static_cast<long double>(table->a[k]) * term();
    sum.add(summand);
    abs_sum += std::fabs(summand);
    const double tail = tail_bound(k);
    if (tail <= 0.5 * eps) {
      Evaluation e;
      e.value = static_cast<double>(sum.value());
      e.terms = k;
      const double rounding = 8.0 * kUnitRoundoff * static_cast<double>(abs_sum) + kUnitRoundoff * std::fabs(e.value);
      e.error_bound = tail + rounding;
      if (e.error_bound > eps) {
        throw CertificationError("requested eps " + std::to_string(eps) + " is below the floating-point resolution");
      }
      return e;
    }
  }
  throw CertificationError("tail bound not certified within " + std::to_string(options_.max_terms) + " terms");
}

Evaluation FractalFunction::eval(double x, double eps) const {
  // f is even and 1-periodic
  return eval(Rational::from_double(std::fabs(x)).frac(), eps);
}

Evaluation FractalFunction::eval(const Rational& x, double eps) const {
  ResidueWalk walk(base_, x.num(), x.den());
  const long double den = static_cast<long double>(x.den());
  long double scale = 1.0L;
  auto term = [&]() {
    const long double v = static_cast<long double>(walk.distance_numerator()) / den * scale;
    walk.advance();
    scale /= base_;
    return v;
  };
  return sum_series(term, eps);
}

Evaluation FractalFunction::increment(const Rational& x, const Rational& h, double eps) const {
  const CommonForm c = common_form(x.frac(), h.frac());
  ResidueWalk wx(base_, c.a, c.den);
  ResidueWalk wy(base_, (c.a + c.b) % c.den, c.den);
  const long double den = static_cast<long double>(c.den);
  long double scale = 1.0L;
  auto term = [&]() {
    const i128 diff = static_cast<i128>(wy.distance_numerator()) - static_cast<i128>(wx.distance_numerator());
    const long double v = static_cast<long double>(diff) / den * scale;
    wx.advance();
    wy.advance();
    scale /= base_;
    return v;
  };
  return sum_series(term, eps);
}

std::vector<int> FractalFunction::sign_walk(const Rational& x, std::size_t n) const {
  if (n == 0) throw std::invalid_argument("sign_walk: n must be at least 1");
  const Rational p = x.frac();
  ResidueWalk walk(base_, p.num(), p.den());
  std::vector<int> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = walk.slope();
    walk.advance();
  }
  return out;
}

double FractalFunction::weighted_walk(const Rational& x, std::size_t n) const {
  if (n == 0) throw std::invalid_argument("weighted_walk: n must be at least 1");
  const Rational p = x.frac();
  ResidueWalk walk(base_, p.num(), p.den());
  const auto table = weights_.table(n);
  CompensatedSum sum;
  for (std::size_t k = 1; k <= n; ++k) {
    sum.add(static_cast<long double>(table->a[k]) * walk.slope());
    walk.advance();
  }
  return static_cast<double>(sum.value());
}

IncrementDecomposition decompose_increment(const FractalFunction& f, const Rational& x, const Rational& h,
                                           double eps) {
  const unsigned r = f.base();
  if (h.is_zero() || !(checked_mul(h.num(), r) < h.den())) {
    throw std::invalid_argument("decompose_increment: h must lie in (0, 1/r), got " + h.to_string());
  }
  if (!(eps > 0.0)) throw std::invalid_argument("decompose_increment: eps must be positive");
  const Rational px = x.frac();
  const CommonForm c = common_form(px, h);
  const u128 y_num = (c.a + c.b) % c.den;

  IncrementDecomposition d;
  d.m = scale_index(r, h);
  d.k0 = match_depth(r, px, h);
  d.linear_depth = d.k0;
  if (!f.even()) {
    d.k0_shifted = match_depth_shifted(r, px, h);
    d.linear_depth = std::min(d.k0, *d.k0_shifted);
  }

  const auto table = f.weights().table(d.m + 1);
  const long double den = static_cast<long double>(c.den);
  ResidueWalk wx(r, c.a, c.den);
  ResidueWalk wy(r, y_num, c.den);
  long double scale = 1.0L;
  u128 hr = c.b;
  CompensatedSum walk_sum, mid_sum;
  for (std::size_t k = 1; k <= d.m; ++k) {
    const int s = wx.slope();
    walk_sum.add(static_cast<long double>(table->a[k]) * s);
    if (static_cast<int>(k) > d.linear_depth) {
      const i128 num = (static_cast<i128>(wy.distance_numerator()) - static_cast<i128>(wx.distance_numerator())) -
                       static_cast<i128>(s) * static_cast<i128>(hr);
      const long double contrib = static_cast<long double>(table->a[k]) * (static_cast<long double>(num) / den * scale);
      mid_sum.add(contrib);
      d.midrange_contributions.push_back(static_cast<double>(contrib));
    }
    wx.advance();
    wy.advance();
    if (k < d.m) hr *= r;
    scale /= r;
  }
  d.linear_term = static_cast<double>(static_cast<long double>(c.b) / den * walk_sum.value());
  d.midrange_term = static_cast<double>(mid_sum.value());

  // Tail k > m, summed from the same residue walks until the certified bound drops below eps.
  CompensatedSum tail_sum;
  std::size_t k = d.m;
  double bound = f.tail_bound(k);
  const std::size_t limit = d.m + 4096;
  const auto tail_table = f.weights().table(limit);
  while (bound > eps) {
    ++k;
    if (k > limit) throw CertificationError("decompose_increment: tail not certified");
    const i128 diff = static_cast<i128>(wy.distance_numerator()) - static_cast<i128>(wx.distance_numerator());
    tail_sum.add(static_cast<long double>(tail_table->a[k]) * (static_cast<long double>(diff) / den * scale));
    wx.advance();
    wy.advance();
    scale /= r;
    bound = f.tail_bound(k);
  }
  d.tail_term = static_cast<double>(tail_sum.value());
  d.tail_bound = bound;

  const Evaluation fx = f.eval(px, eps);
  const Evaluation fy = f.eval(Rational(y_num, c.den), eps);
  d.increment = fy.value - fx.value;
  d.eval_error = fx.error_bound + fy.error_bound;
  d.residual = d.increment - (d.linear_term + d.midrange_term + d.tail_term);
  return d;
}

}  // namespace tvdw
