#include "tvdw/blocking.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tvdw {

std::size_t delay_length(double energy, double alpha) {
  if (!(energy > 1.0) || alpha == 0.0) return 1;
  return static_cast<std::size_t>(std::floor(24.0 * std::log(energy) / std::log(1.0 / std::fabs(alpha)))) + 1;
}

BlockingScheme build_blocks(const WeightSequence& seq, double delta, std::size_t count, double alpha,
                            std::size_t max_index) {
  if (count < 2) throw std::invalid_argument("build_blocks: need at least 2 boundaries (one block)");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("build_blocks: delta must lie in (0, 1]");
  if (!(alpha > -1.0 && alpha < 1.0)) throw std::invalid_argument("build_blocks: alpha must lie in (-1, 1)");
  BlockingScheme s;
  s.delta = delta;
  s.alpha = alpha;
  s.boundaries.push_back(0);
  s.energies.push_back(0.0);
  s.delays.push_back(delay_length(0.0, alpha));
  const auto support = seq.spec().support();
  std::size_t capacity = 1024;
  auto table = seq.table(capacity);
  std::size_t h = 0;
  while (s.boundaries.size() < count) {
    const std::size_t start = s.boundaries.back();
    const double energy = s.energies.back();
    const double need = energy > 0.0 ? std::pow(energy, 1.0 - 0.5 * delta) : 0.0;
    for (;;) {
      ++h;
      if ((support && h > *support) || h > max_index) {
        throw std::runtime_error("build_blocks: weights exhausted after " + std::to_string(s.boundaries.size()) +
                                 " boundaries (asked for " + std::to_string(count) + ")");
      }
      if (h > table->size()) {
        capacity *= 2;
        table = seq.table(capacity);
      }
      if (table->energy_difference(start, h) >= need && table->energy_difference(start, h) > 0.0) break;
    }
    s.boundaries.push_back(h);
    s.energies.push_back(table->energy(h));
    s.delays.push_back(delay_length(table->energy(h), alpha));
  }
  return s;
}

BlockStatistics block_statistics(const ErwvrpParams& params, const BlockingScheme& scheme, const WalkPath& path) {
  const std::size_t last = scheme.boundaries.back();
  if (path.length() < last) {
    throw std::invalid_argument("block_statistics: path horizon " + std::to_string(path.length()) +
                                " is shorter than the last boundary " + std::to_string(last));
  }
  const auto table = params.weights.table(std::max<std::size_t>(last, 1));
  const auto prefix = second_moment_prefix(params.alpha(), *table, last);
  BlockStatistics b;
  for (std::size_t j = 1; j <= scheme.block_count(); ++j) {
    const std::size_t lo = scheme.h(j);
    const std::size_t hi = scheme.h(j + 1);
    b.block_sums.push_back(path.partial_sums[hi] - path.partial_sums[lo]);
    b.block_variances.push_back(exact_second_moment(params.alpha(), *table, lo, hi));
  }
  for (std::size_t j = 1; j <= scheme.boundaries.size(); ++j) b.prefix_moments.push_back(prefix[scheme.h(j)]);
  return b;
}

namespace {

CorrectorValue certified_series(const WeightSequence& weights, double alpha, std::size_t start, int offset,
                                std::size_t budget, double tol, const std::optional<TailEnvelope>& env) {
  if (!(tol > 0.0)) throw std::invalid_argument("gordin_corrector: tol must be positive");
  CorrectorValue out;
  if (alpha == 0.0) return out;
  const auto table = weights.table(start + budget + 1);
  const auto support = weights.spec().support();
  double coef = std::pow(alpha, static_cast<double>(offset));
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t k = 1; k <= budget; ++k) {
    coef *= alpha;
    const double term = table->a[start + k] * coef;
    const double t = sum + term;
    comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
    const std::size_t n = start + k;
    double tail = std::numeric_limits<double>::infinity();
    if (support && n >= *support) {
      tail = 0.0;
    } else if (env && n >= env->n0) {
      const double rho = std::pow(std::fabs(alpha), env->delta >= 1.0 ? 1.0 : 0.5 * (1.0 + env->delta));
      tail = std::fabs(coef) * env->abs_bound(*table, n, 0) * rho / (1.0 - rho);
    }
    if (tail <= tol) {
      out.value = sum + comp;
      out.tail_bound = tail;
      out.terms = k;
      return out;
    }
  }
  throw CertificationError("gordin_corrector: series not certified within " + std::to_string(budget) + " terms");
}

std::optional<TailEnvelope> corrector_envelope(const ErwvrpParams& params, double delta, std::size_t horizon) {
  const double a = std::fabs(params.alpha());
  if (a == 0.0) return std::nullopt;
  return certify_envelope(params.weights, delta, 1.0 / a, horizon);
}

std::size_t budget_for(const BlockingScheme& scheme, const GordinOptions& options, std::size_t j) {
  return options.base_budget + 4 * scheme.delays.at(j - 1);
}

void check_scheme(const ErwvrpParams& params, const BlockingScheme& scheme, const GordinOptions& options) {
  if (scheme.alpha != params.alpha() && scheme.alpha != 0.0) {
    throw std::invalid_argument("gordin_corrector: scheme was built for a different alpha");
  }
  if (options.exponent_offset < 0) throw std::invalid_argument("gordin_corrector: exponent offset must be >= 0");
}

}  // namespace

GordinCorrector::GordinCorrector(const ErwvrpParams& params, const BlockingScheme& scheme, double tol,
                                 GordinOptions options)
    : scheme_(scheme), tol_(tol), options_(options) {
  check_scheme(params, scheme, options);
  const auto env = corrector_envelope(params, scheme.delta, options.validation_horizon);
  for (std::size_t j = 1; j <= scheme.boundaries.size(); ++j) {
    series_.push_back(certified_series(params.weights, params.alpha(), scheme.h(j), options.exponent_offset,
                                       budget_for(scheme, options, j), tol, env));
  }
}

std::size_t GordinCorrector::anchor_index(std::size_t j) const {
  if (j == 0 || j > scheme_.boundaries.size()) throw std::out_of_range("anchor_index: block index out of range");
  if (options_.anchor == AnchorPolicy::preceding_block_end) return scheme_.h(j);
  return j == 1 ? 0 : scheme_.h(j - 1);
}

CorrectorValue GordinCorrector::value(std::size_t j, int anchor_sign) const {
  if (j == 0 || j > series_.size()) throw std::out_of_range("GordinCorrector: block index out of range");
  CorrectorValue v = series_[j - 1];
  v.value *= anchor_sign;
  if (anchor_sign == 0) v.tail_bound = 0.0;
  return v;
}

CorrectorValue gordin_corrector(const ErwvrpParams& params, const BlockingScheme& scheme, std::size_t j,
                                int anchor_sign, double tol, GordinOptions options) {
  check_scheme(params, scheme, options);
  if (j == 0 || j > scheme.boundaries.size()) throw std::out_of_range("gordin_corrector: block index out of range");
  if (anchor_sign < -1 || anchor_sign > 1) throw std::invalid_argument("gordin_corrector: anchor sign must be -1, 0 or +1");
  const auto env = corrector_envelope(params, scheme.delta, options.validation_horizon);
  CorrectorValue v = certified_series(params.weights, params.alpha(), scheme.h(j), options.exponent_offset,
                                      budget_for(scheme, options, j), tol, env);
  v.value *= anchor_sign;
  if (anchor_sign == 0) v.tail_bound = 0.0;
  return v;
}

XiSequence xi_sequence(const GordinCorrector& corrector, const BlockingScheme& scheme, const WalkPath& path) {
  const std::size_t last = scheme.boundaries.back();
  if (path.length() < last) throw std::invalid_argument("xi_sequence: path shorter than the last boundary");
  const std::size_t blocks = scheme.block_count();
  XiSequence x;
  for (std::size_t j = 1; j <= blocks + 1; ++j) {
    const CorrectorValue u = corrector.value(j, path.signs[corrector.anchor_index(j)]);
    x.correctors.push_back(u.value);
    x.tail_bound_sum += u.tail_bound;
  }
  double sum_y = 0.0;
  double sum_xi = 0.0;
  for (std::size_t j = 1; j <= blocks; ++j) {
    const double y = path.partial_sums[scheme.h(j + 1)] - path.partial_sums[scheme.h(j)];
    x.block_sums.push_back(y);
    x.v.push_back(x.correctors[j - 1] - x.correctors[j]);
    x.xi.push_back(y - x.correctors[j - 1] + x.correctors[j]);
    sum_y += y;
    sum_xi += x.xi.back();
  }
  x.telescoping_residual = std::fabs(sum_xi + x.correctors.front() - x.correctors.back() - sum_y);
  return x;
}

XiSequence xi_sequence(const ErwvrpParams& params, const BlockingScheme& scheme, const WalkPath& path, double tol,
                       GordinOptions options) {
  return xi_sequence(GordinCorrector(params, scheme, tol, options), scheme, path);
}

void write_block_csv(std::ostream& out, const ErwvrpParams& params, const BlockingScheme& scheme) {
  const std::size_t last = scheme.boundaries.back();
  const auto table = params.weights.table(std::max<std::size_t>(last, 1));
  const auto prefix = second_moment_prefix(params.alpha(), *table, last);
  out << "j,h_j,B_j,H_j,sigma_j_sq,s_sq_h_j\n";
  out.precision(17);
  for (std::size_t j = 1; j <= scheme.boundaries.size(); ++j) {
    out << j << ',' << scheme.h(j) << ',' << scheme.energies[j - 1] << ',' << scheme.delays[j - 1] << ',';
    if (j <= scheme.block_count()) out << exact_second_moment(params.alpha(), *table, scheme.h(j), scheme.h(j + 1));
    out << ',' << prefix[scheme.h(j)] << '\n';
  }
}

}  // namespace tvdw
