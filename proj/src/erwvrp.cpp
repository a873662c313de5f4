#include "tvdw/erwvrp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tvdw {

namespace {

void check_p(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("memory parameter p must lie in (0, 1), got " + std::to_string(p));
}

struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) comp += (sum - t) + v;
    else comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace

ErwvrpParams::ErwvrpParams(double p_, WeightSequence weights_, std::size_t horizon_)
    : p(p_), weights(std::move(weights_)), horizon(horizon_) {
  check_p(p);
  if (horizon == 0) throw std::invalid_argument("horizon must be at least 1");
}

SignStepper::SignStepper(double p, std::uint64_t seed, std::uint64_t stream)
    : rng_(seed, stream), stay_threshold_(static_cast<std::uint64_t>(std::ldexp(static_cast<long double>(p), 64))) {
  check_p(p);
}

int SignStepper::next() {
  const std::uint64_t u = rng_.next_u64();
  if (last_ == 0) {
    last_ = u < (std::uint64_t{1} << 63) ? 1 : -1;
  } else if (u >= stay_threshold_) {
    last_ = -last_;
  }
  return last_;
}

WalkPath simulate(const ErwvrpParams& params, std::uint64_t seed, std::uint64_t stream) {
  const auto table = params.weights.table(params.horizon);
  WalkPath path;
  path.seed = seed;
  path.stream = stream;
  path.signs.assign(params.horizon + 1, 0);
  path.partial_sums.assign(params.horizon + 1, 0.0);
  SignStepper stepper(params.p, seed, stream);
  for (std::size_t k = 1; k <= params.horizon; ++k) {
    path.signs[k] = stepper.next();
    path.partial_sums[k] = path.partial_sums[k - 1] + table->a[k] * path.signs[k];
  }
  return path;
}

double exact_cross_moment(double p, std::size_t k, std::size_t l) {
  check_p(p);
  if (k == 0 || l == 0) throw std::invalid_argument("exact_cross_moment: indices start at 1");
  const std::size_t lag = k > l ? k - l : l - k;
  return lag == 0 ? 1.0 : std::pow(2.0 * p - 1.0, static_cast<double>(lag));
}

double exact_second_moment(double alpha, const EnergyTable& table, std::size_t m, std::size_t n, MomentMethod method) {
  if (m >= n) throw std::invalid_argument("exact_second_moment: need m < n");
  if (n > table.size()) throw std::out_of_range("exact_second_moment: table too short");
  KahanSum total;
  if (method == MomentMethod::double_sum) {
    for (std::size_t k = m + 1; k <= n; ++k) {
      for (std::size_t l = m + 1; l <= n; ++l) {
        const std::size_t lag = k > l ? k - l : l - k;
        const double c = lag == 0 ? 1.0 : std::pow(alpha, static_cast<double>(lag));
        total.add(table.a[k] * table.a[l] * c);
      }
    }
    return total.value();
  }
  // C_l = sum_{m<k<l} a_k alpha^{l-k}
  double c = 0.0;
  for (std::size_t l = m + 1; l <= n; ++l) {
    if (l > m + 1) c = alpha * (c + table.a[l - 1]);
    total.add(table.a[l] * table.a[l] + 2.0 * table.a[l] * c);
  }
  return total.value();
}

double exact_second_moment(const ErwvrpParams& params, std::size_t m, std::size_t n, MomentMethod method) {
  return exact_second_moment(params.alpha(), *params.weights.table(n), m, n, method);
}

std::vector<double> second_moment_prefix(double alpha, const EnergyTable& table, std::size_t n_max) {
  if (n_max > table.size()) throw std::out_of_range("second_moment_prefix: table too short");
  std::vector<double> out(n_max + 1, 0.0);
  KahanSum total;
  double c = 0.0;
  for (std::size_t l = 1; l <= n_max; ++l) {
    if (l > 1) c = alpha * (c + table.a[l - 1]);
    total.add(table.a[l] * table.a[l] + 2.0 * table.a[l] * c);
    out[l] = total.value();
  }
  return out;
}

double K_of_p(double p) {
  check_p(p);
  return std::max(p / (1.0 - p), (1.0 - p) / p);
}

double phi_mixing(double p, std::size_t m) {
  check_p(p);
  if (m == 0) throw std::invalid_argument("phi_mixing: m must be at least 1");
  return 0.5 * std::pow(std::fabs(2.0 * p - 1.0), static_cast<double>(m));
}

DoobDecomposition doob_decompose(const ErwvrpParams& params, const WalkPath& path) {
  const std::size_t n = path.length();
  if (n == 0) throw std::invalid_argument("doob_decompose: empty path");
  const auto table = params.weights.table(n + 1);
  const double alpha = params.alpha();
  const double scale = alpha / (1.0 - alpha);
  DoobDecomposition d;
  d.alpha = alpha;
  d.differences.assign(n + 1, 0.0);
  d.martingale.assign(n + 1, 0.0);
  d.first_drift.assign(n + 1, 0.0);
  d.second_drift.assign(n + 1, 0.0);
  KahanSum mart, drift;
  for (std::size_t k = 1; k <= n; ++k) {
    d.differences[k] = path.signs[k] - alpha * path.signs[k - 1];
    mart.add(table->a[k] * d.differences[k]);
    d.martingale[k] = mart.value();
    if (k > 1) drift.add((table->a[k] - table->a[k - 1]) * path.signs[k - 1]);
    d.first_drift[k] = scale * drift.value();
    d.second_drift[k] = -scale * table->a[k] * path.signs[k];
    const double rebuilt = d.martingale[k] / (1.0 - alpha) + d.first_drift[k] + d.second_drift[k];
    d.max_residual = std::max(d.max_residual, std::fabs(path.partial_sums[k] - rebuilt));
  }
  return d;
}

void write_path_csv(std::ostream& out, const WalkPath& path) {
  out << "k,X_k,S_k\n";
  out.precision(17);
  for (std::size_t k = 0; k <= path.length(); ++k) out << k << ',' << path.signs[k] << ',' << path.partial_sums[k] << '\n';
}

void write_moment_csv(std::ostream& out, const ErwvrpParams& params,
                      const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  out << "m,n,exact,A_diff,ratio\n";
  out.precision(17);
  for (const auto& [m, n] : pairs) {
    const double exact = exact_second_moment(params, m, n);
    const double diff = params.weights.energy_difference(m, n);
    out << m << ',' << n << ',' << exact << ',' << diff << ',' << (diff > 0 ? exact / diff : 0.0) << '\n';
  }
}

}  // namespace tvdw
