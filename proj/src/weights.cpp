#include "tvdw/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

namespace tvdw {

using nlohmann::json;

std::string to_string(WeightKind kind) {
  switch (kind) {
    case WeightKind::constant: return "const";
    case WeightKind::power: return "power";
    case WeightKind::alternating: return "alternating";
    case WeightKind::odd_indicator: return "odd";
    case WeightKind::explicit_list: return "explicit";
    case WeightKind::geometric: return "geometric";
  }
  return "const";
}

WeightKind weight_kind_from_string(const std::string& name) {
  if (name == "const" || name == "constant") return WeightKind::constant;
  if (name == "power") return WeightKind::power;
  if (name == "alternating" || name == "alt") return WeightKind::alternating;
  if (name == "odd" || name == "odd_indicator" || name == "appendixB") return WeightKind::odd_indicator;
  if (name == "explicit" || name == "list") return WeightKind::explicit_list;
  if (name == "geometric" || name == "geom") return WeightKind::geometric;
  throw std::invalid_argument("unknown weight generator '" + name + "'");
}

json WeightSpec::to_json() const {
  json j;
  j["kind"] = to_string(kind);
  switch (kind) {
    case WeightKind::constant:
    case WeightKind::alternating: j["value"] = value; break;
    case WeightKind::power: j["beta"] = beta; break;
    case WeightKind::explicit_list: j["values"] = values; break;
    case WeightKind::geometric: j["ratio"] = ratio; break;
    case WeightKind::odd_indicator: break;
  }
  return j;
}

WeightSpec WeightSpec::from_json(const json& j) {
  WeightSpec spec;
  if (j.is_string()) {
    spec.kind = weight_kind_from_string(j.get<std::string>());
    if (spec.kind == WeightKind::explicit_list) throw std::invalid_argument("explicit weights need a values list");
    return spec;
  }
  if (!j.is_object() || !j.contains("kind")) throw std::invalid_argument("weight spec must be an object with a kind");
  spec.kind = weight_kind_from_string(j.at("kind").get<std::string>());
  for (const auto& [key, val] : j.items()) {
    if (key == "kind") continue;
    if (key == "value") spec.value = val.get<double>();
    else if (key == "beta") spec.beta = val.get<double>();
    else if (key == "ratio") spec.ratio = val.get<double>();
    else if (key == "values") spec.values = val.get<std::vector<double>>();
    else throw std::invalid_argument("unknown weight parameter '" + key + "'");
  }
  if (spec.kind == WeightKind::explicit_list && spec.values.empty()) {
    throw std::invalid_argument("explicit weights need a non-empty values list");
  }
  return spec;
}

double WeightSpec::at(std::size_t k) const {
  if (k == 0) throw std::out_of_range("weights are indexed from 1");
  switch (kind) {
    case WeightKind::constant: return value;
    case WeightKind::power: return beta == 0.0 ? 1.0 : std::pow(static_cast<double>(k), beta);
    case WeightKind::alternating: return (k % 2 == 0) ? value : -value;
    case WeightKind::odd_indicator: return (k % 2 == 1) ? 1.0 : 0.0;
    case WeightKind::explicit_list: return k <= values.size() ? values[k - 1] : 0.0;
    case WeightKind::geometric: return std::pow(ratio, static_cast<double>(k));
  }
  return 0.0;
}

std::optional<std::size_t> WeightSpec::support() const {
  if (kind == WeightKind::explicit_list) return values.size();
  if ((kind == WeightKind::constant || kind == WeightKind::alternating) && value == 0.0) return 0;
  return std::nullopt;
}

std::optional<double> WeightSpec::natural_delta() const {
  switch (kind) {
    case WeightKind::constant:
    case WeightKind::alternating:
    case WeightKind::odd_indicator:
    case WeightKind::explicit_list: return 1.0;
    case WeightKind::power: return beta > 0.0 ? 1.0 / (2.0 * beta + 1.0) : 1.0;
    case WeightKind::geometric: return std::nullopt;
  }
  return std::nullopt;
}

struct WeightSequence::State {
  std::mutex mu;
  std::shared_ptr<const EnergyTable> table;
};

WeightSequence::WeightSequence(WeightSpec spec, std::optional<double> delta_hint, std::optional<double> k_hint)
    : spec_(std::move(spec)), delta_hint_(delta_hint), k_hint_(k_hint), state_(std::make_shared<State>()) {
  if (delta_hint_ && !(*delta_hint_ > 0.0 && *delta_hint_ <= 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1]");
  }
  if (k_hint_ && !(*k_hint_ > 0.0)) throw std::invalid_argument("K must be positive");
  auto t = std::make_shared<EnergyTable>();
  t->a = {0.0};
  t->hi = {0.0};
  t->lo = {0.0};
  state_->table = std::move(t);
}

std::shared_ptr<const EnergyTable> WeightSequence::table(std::size_t n) const {
  std::lock_guard lock(state_->mu);
  const auto& cur = state_->table;
  if (cur->size() >= n) return cur;

  // Grow geometrically so repeated small extensions stay amortised O(1).
  const std::size_t target = std::max(n, 2 * cur->size());
  auto next = std::make_shared<EnergyTable>(*cur);
  next->a.reserve(target + 1);
  next->hi.reserve(target + 1);
  next->lo.reserve(target + 1);
  double hi = next->hi.back();
  double lo = next->lo.back();
  for (std::size_t k = cur->size() + 1; k <= target; ++k) {
    const double a = spec_.at(k);
    const double sq = a * a;
    const double sq_err = std::fma(a, a, -sq);
    // two-sum of hi + sq, then fold the error terms into lo
    const double s = hi + sq;
    const double bb = s - hi;
    const double err = (hi - (s - bb)) + (sq - bb);
    lo += err + sq_err;
    hi = s + lo;
    lo = lo - (hi - s);
    next->a.push_back(a);
    next->hi.push_back(hi);
    next->lo.push_back(lo);
  }
  state_->table = next;
  return next;
}

double WeightSequence::partial_energy(std::size_t n) const { return table(n)->energy(n); }

double WeightSequence::energy_difference(std::size_t m, std::size_t n) const {
  if (m > n) throw std::invalid_argument("energy_difference needs m <= n");
  return table(n)->energy_difference(m, n);
}

namespace {

// Least-squares slope of ys against xs.
double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto n = static_cast<double>(xs.size());
  if (xs.size() < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

double assumption_ratio(const EnergyTable& t, std::size_t n, double delta) {
  const double sq = t.a[n] * t.a[n];
  if (sq == 0.0) return 0.0;  // includes the 0/0 := 0 convention
  const double energy = t.energy(n);
  return sq / std::pow(energy, 1.0 - delta);
}

}  // namespace

AssumptionDiagnostics validate_assumptions(const WeightSequence& seq, double delta, std::size_t n_max) {
  if (n_max == 0) throw std::invalid_argument("validate_assumptions: n_max must be at least 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("validate_assumptions: delta must lie in (0, 1]");
  const auto t = seq.table(n_max);

  AssumptionDiagnostics d;
  d.delta = delta;
  d.n_max = n_max;
  d.slope_threshold = kDivergenceSlope;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double ratio = assumption_ratio(*t, n, delta);
    if (!(ratio <= d.k_hat)) {  // also catches inf / nan
      d.k_hat = ratio;
      d.worst_index = n;
    }
  }

  std::vector<double> xs, ys;
  const std::size_t start = n_max - n_max / 4;
  for (std::size_t n = std::max<std::size_t>(start, 1); n <= n_max; ++n) {
    const double ratio = assumption_ratio(*t, n, delta);
    if (ratio > 0.0 && std::isfinite(ratio)) {
      xs.push_back(std::log(static_cast<double>(n)));
      ys.push_back(std::log(ratio));
    }
  }
  d.trailing_slope = ls_slope(xs, ys);
  d.pass = std::isfinite(d.k_hat) && d.trailing_slope <= d.slope_threshold;
  return d;
}

GrowthDiagnostics growth_report(const WeightSequence& seq, double delta, double q, std::size_t n0,
                                std::size_t n_max) {
  if (!(q > 1.0)) throw std::invalid_argument("growth_report: q must exceed 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("growth_report: delta must lie in (0, 1]");
  if (n0 < 1 || n0 >= n_max) throw std::invalid_argument("growth_report: need 1 <= n0 < n_max");
  const auto t = seq.table(n_max);

  GrowthDiagnostics g;
  g.delta = delta;
  g.q = q;
  g.n0 = n0;
  g.n_max = n_max;

  if (!std::isfinite(t->energy(n_max))) {
    // energies overflowed: neither bound can be verified
    g.sup_polynomial_ratio = std::numeric_limits<double>::infinity();
    return g;
  }

  std::vector<double> xs, ys;
  const std::size_t start = n_max - n_max / 4;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double ratio = t->energy(n) / std::pow(static_cast<double>(n), 1.0 / delta);
    g.sup_polynomial_ratio = std::max(g.sup_polynomial_ratio, ratio);
    if (n >= start && ratio > 0.0 && std::isfinite(ratio)) {
      xs.push_back(std::log(static_cast<double>(n)));
      ys.push_back(std::log(ratio));
    }
  }
  g.polynomial_slope = ls_slope(xs, ys);
  g.polynomial_pass = std::isfinite(g.sup_polynomial_ratio) && g.polynomial_slope <= kDivergenceSlope;

  // worst[n] = max_{k>=1, n+k<=n_max} A_{n+k} q^{-k}; the bound holds at n iff A_n >= worst[n].
  // Ratios are compared in log space so q^k never overflows.
  const double log_q = std::log(q);
  std::vector<bool> ok(n_max + 1, true);
  double worst_log = -std::numeric_limits<double>::infinity();
  for (std::size_t n = n_max; n-- > 1;) {
    const double next = t->energy(n + 1);
    const double cand = next > 0.0 ? std::log(next) : -std::numeric_limits<double>::infinity();
    worst_log = std::max(cand, worst_log) - log_q;
    const double here = t->energy(n);
    const double here_log = here > 0.0 ? std::log(here) : -std::numeric_limits<double>::infinity();
    // a relative slack of a few ulps absorbs the rounding of the logarithms
    ok[n] = here_log >= worst_log - 1e-12 * std::max(1.0, std::abs(worst_log));
  }
  std::optional<std::size_t> smallest;
  for (std::size_t n = n_max - 1; n >= 1; --n) {
    if (!ok[n]) break;
    smallest = n;
  }
  g.smallest_n0 = smallest;
  g.exponential_pass = smallest.has_value() && *smallest <= n0;
  return g;
}

double TailEnvelope::abs_bound(const EnergyTable& table, std::size_t n, std::size_t j) const {
  if (support && n + j > *support) return 0.0;
  if (delta >= 1.0) return std::sqrt(k_bound);
  const double energy = table.energy(n);
  const double log_bound = 0.5 * (std::log(k_bound) + (1.0 - delta) * (std::log(energy) + static_cast<double>(j) * std::log(q)));
  return std::exp(log_bound);
}

std::optional<TailEnvelope> certify_envelope(const WeightSequence& seq, double delta, double q,
                                             std::size_t horizon) {
  TailEnvelope env;
  env.delta = delta;
  env.q = q;
  env.checked_to = horizon;
  env.support = seq.spec().support();
  if (env.support) {
    // Finite support: a uniform bound max |a_k| covers every index.
    env.delta = 1.0;
    const auto t = seq.table(std::max<std::size_t>(*env.support, 1));
    double k = 0.0;
    for (std::size_t n = 1; n <= *env.support; ++n) k = std::max(k, t->a[n] * t->a[n]);
    env.k_bound = kEnvelopeSafety * std::max(k, 1e-300);
    env.n0 = 1;
    return env;
  }
  const auto diag = validate_assumptions(seq, delta, horizon);
  if (!diag.pass) return std::nullopt;
  env.k_bound = kEnvelopeSafety * std::max(diag.k_hat, 1e-300);
  if (delta >= 1.0) {
    env.n0 = 1;
    return env;
  }
  const auto growth = growth_report(seq, delta, q, 1, horizon);
  if (!growth.smallest_n0) return std::nullopt;
  env.n0 = *growth.smallest_n0;
  // the first index with positive energy is the earliest usable anchor
  const auto t = seq.table(horizon);
  while (env.n0 < horizon && t->energy(env.n0) == 0.0) ++env.n0;
  if (t->energy(env.n0) == 0.0) return std::nullopt;
  return env;
}

}  // namespace tvdw
