#include "tvdw/limits/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "tvdw/limits/stats.hpp"

namespace tvdw {

namespace {

constexpr double kE2 = 7.38905609893065;  // e^2

std::string walk_streams() { return "walk replica i -> stream (0 << 56) | i"; }
std::string brownian_streams() { return "Brownian replica i -> stream (1 << 56) | i"; }
std::string sample_streams() { return "x-sample i -> stream (2 << 56) | i"; }

/// 1 / sqrt(2 D log log D), 0 while D <= e^2.
std::vector<double> lil_scale(const std::vector<double>& denominators) {
  std::vector<double> s(denominators.size(), 0.0);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double d = denominators[k];
    if (d > kE2) s[k] = 1.0 / std::sqrt(2.0 * d * std::log(std::log(d)));
  }
  return s;
}

/// Standard deviations of B(t_k) - B(t_{k-1}).
std::vector<double> gap_sd(const std::vector<double>& times) {
  std::vector<double> sd(times.size(), 0.0);
  for (std::size_t k = 1; k < times.size(); ++k) {
    double gap = times[k] - times[k - 1];
    if (gap < 0.0) {
      if (gap < -1e-9 * std::max(1.0, times[k])) {
        throw std::invalid_argument("Brownian time grid s_k^2 decreases at k = " + std::to_string(k));
      }
      gap = 0.0;
    }
    sd[k] = std::sqrt(gap);
  }
  return sd;
}

double fraction_in(const std::vector<double>& v, double lo, double hi) {
  if (v.empty()) return 0.0;
  std::size_t c = 0;
  for (double x : v) c += (x >= lo && x <= hi) ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(v.size());
}

double fraction_covered(const std::vector<PathFunctionals>& paths, std::size_t norm) {
  std::size_t c = 0;
  for (const auto& p : paths) c += p.coverage[norm] == kFullCoverage ? 1 : 0;
  return paths.empty() ? 0.0 : static_cast<double>(c) / static_cast<double>(paths.size());
}

nlohmann::json base_params(const ErwvrpParams& params) {
  return {{"p", params.p}, {"weights", params.weights.spec().to_json()}};
}

/// Thinned empirical CDF of `samples` next to the normal CDF.
Table ecdf_table(std::string name, std::vector<double> samples, std::size_t points = 200) {
  std::sort(samples.begin(), samples.end());
  Table t{std::move(name), {"z", "empirical_cdf", "normal_cdf"}, {}};
  if (samples.empty()) return t;
  const std::size_t step = std::max<std::size_t>(1, samples.size() / points);
  for (std::size_t i = 0; i < samples.size(); i += step) {
    t.rows.push_back({samples[i], static_cast<double>(i + 1) / static_cast<double>(samples.size()), normal_cdf(samples[i])});
  }
  return t;
}

void check_fractal_grid(const FractalFunction& f, const Rational& h) {
  if (h.is_zero() || !(checked_mul(h.num(), f.base()) < h.den())) {
    throw std::invalid_argument("h = " + h.to_string() + " lies outside (0, 1/r)");
  }
}

}  // namespace

ExperimentReport clt_experiment(const ErwvrpParams& params, std::size_t n, std::size_t replicas, std::uint64_t seed,
                                Exec exec, CltOptions options) {
  if (n == 0) throw std::invalid_argument("clt_experiment: n must be at least 1");
  if (replicas < options.min_replicas) {
    throw std::invalid_argument("clt_experiment: need at least " + std::to_string(options.min_replicas) + " replicas");
  }
  const auto table = params.weights.table(n);
  const double s2 = exact_second_moment(params.alpha(), *table, 0, n);
  if (!(s2 > 0.0)) throw std::invalid_argument("clt_experiment: s_n^2 = 0");
  auto values = walk_terminal_values(params.p, *table, n, replicas, seed, exec);
  const double s = std::sqrt(s2);
  RunningStats stats;
  for (double& v : values) {
    v /= s;
    stats.add(v);
  }
  ExperimentReport r;
  r.name = "clt";
  r.parameters = base_params(params);
  r.parameters["n"] = n;
  r.parameters["replicas"] = replicas;
  r.manifest = {seed, walk_streams(), replicas, kSoftwareVersion, ""};
  r.check("ks_distance", ks_statistic(values), 0.0, options.ks_tolerance, "sup |F_n - Phi| of S_n / s_n");
  r.info("s_n_sq", s2, "exact E[S_n^2]");
  r.info("mean", stats.mean(), "sample mean of S_n / s_n");
  r.info("variance", stats.variance(), "sample variance of S_n / s_n");
  if (params.weights.spec().kind == WeightKind::odd_indicator) {
    // closed form for weights 1, 0, 1, 0, ...
    const double c2 = params.alpha() * params.alpha();
    const std::size_t half = (n + 1) / 2;
    double closed = static_cast<double>(half);
    double power = 1.0;
    for (std::size_t i = 1; i < half; ++i) {
      power *= c2;
      closed += 2.0 * static_cast<double>(half - i) * power;
    }
    r.check("closed_form_relative_difference", std::fabs(closed - s2) / s2, 0.0, 1e-10,
            "recursion against the odd-indicator closed form");
  }
  r.tables.push_back(ecdf_table("ecdf", values));
  return r;
}

std::string to_string(LilNormalization n) {
  switch (n) {
    case LilNormalization::exact_s: return "exact_s";
    case LilNormalization::plain_A: return "plain_A";
    case LilNormalization::scaled_A: return "scaled_A";
    case LilNormalization::appendix_b: return "appendix_b";
  }
  return "exact_s";
}

LilNormalization lil_normalization_from_string(const std::string& name) {
  if (name == "exact_s") return LilNormalization::exact_s;
  if (name == "plain_A" || name == "A") return LilNormalization::plain_A;
  if (name == "scaled_A") return LilNormalization::scaled_A;
  if (name == "appendix_b" || name == "appendixB") return LilNormalization::appendix_b;
  throw std::invalid_argument("unknown LIL normalization '" + name + "'");
}

LilBands default_lil_bands(LilNormalization normalization, double p) {
  switch (normalization) {
    case LilNormalization::exact_s:
    case LilNormalization::scaled_A: return {0.5, 1.2, 0.9, false};
    case LilNormalization::plain_A:
      return {-std::numeric_limits<double>::infinity(), std::sqrt(K_of_p(p)) * 1.1, 0.95, false};
    case LilNormalization::appendix_b: {
      const double c = std::sqrt((2 * p * p - 2 * p + 1) / (2 * p * (1 - p)));
      return {c - 0.3, c + 0.3, 0.5, true};
    }
  }
  return {};
}

ExperimentReport lil_experiment(const ErwvrpParams& params, std::size_t n_max, std::size_t replicas,
                                std::uint64_t seed, LilNormalization normalization, Exec exec, LilOptions options) {
  if (n_max < options.min_horizon) {
    throw std::invalid_argument("lil_experiment: n_max must be at least " + std::to_string(options.min_horizon));
  }
  if (replicas == 0) throw std::invalid_argument("lil_experiment: need at least one replica");
  const auto table = params.weights.table(n_max);
  const auto s2 = second_moment_prefix(params.alpha(), *table, n_max);
  std::vector<double> denom(n_max + 1);
  for (std::size_t k = 0; k <= n_max; ++k) {
    switch (normalization) {
      case LilNormalization::exact_s: denom[k] = s2[k]; break;
      case LilNormalization::plain_A:
      case LilNormalization::appendix_b: denom[k] = table->energy(k); break;
      case LilNormalization::scaled_A: denom[k] = params.p / (1.0 - params.p) * table->energy(k); break;
    }
  }
  PathFunctionalInputs in;
  in.n = n_max;
  in.lil_scales.push_back(lil_scale(denom));
  const auto sd = gap_sd(s2);
  PathSource walk{PathSource::Kind::walk, params.p, table.get(), nullptr};
  PathSource brown{PathSource::Kind::brownian, params.p, nullptr, &sd};
  const auto walk_paths = path_functionals(walk, in, replicas, seed, exec);
  const auto brown_paths = path_functionals(brown, in, replicas, seed, exec);
  std::vector<double> walk_max, brown_max;
  for (const auto& p : walk_paths) walk_max.push_back(p.running_max[0]);
  for (const auto& p : brown_paths) brown_max.push_back(p.running_max[0]);

  const LilBands bands = options.bands.value_or(default_lil_bands(normalization, params.p));
  const std::optional<double> lo = std::isfinite(bands.lower) ? std::optional<double>(bands.lower) : std::nullopt;

  ExperimentReport r;
  r.name = "lil";
  r.parameters = base_params(params);
  r.parameters["n_max"] = n_max;
  r.parameters["replicas"] = replicas;
  r.parameters["normalization"] = to_string(normalization);
  r.manifest = {seed, walk_streams() + "; " + brownian_streams(), replicas, kSoftwareVersion, ""};
  const std::string band_text = "[" + std::to_string(bands.lower) + ", " + std::to_string(bands.upper) + "]";
  if (bands.use_median) {
    r.check("walk_median_running_max", median(walk_max), lo, bands.upper, "median of terminal running max");
    r.check("brownian_median_running_max", median(brown_max), lo, bands.upper, "Brownian oracle at the same grid");
  } else {
    const double lower = std::isfinite(bands.lower) ? bands.lower : -std::numeric_limits<double>::infinity();
    r.check("walk_fraction_in_band", fraction_in(walk_max, lower, bands.upper), bands.min_fraction, 1.0,
            "share of replicas with terminal running max in " + band_text);
    r.check("brownian_fraction_in_band", fraction_in(brown_max, lower, bands.upper), bands.min_fraction, 1.0,
            "Brownian oracle at the same grid, band " + band_text);
    r.info("walk_median_running_max", median(walk_max));
    r.info("brownian_median_running_max", median(brown_max));
  }
  r.check("walk_coverage_fraction", fraction_covered(walk_paths, 0), options.coverage_min_fraction, 1.0,
          "share of replicas visiting every width-0.2 bin of [-0.9, 0.9]");
  r.check("brownian_coverage_fraction", fraction_covered(brown_paths, 0), options.coverage_min_fraction, 1.0,
          "Brownian oracle coverage");
  Table t{"running_max", {"replica", "walk", "brownian"}, {}};
  for (std::size_t i = 0; i < replicas; ++i) t.rows.push_back({static_cast<double>(i), walk_max[i], brown_max[i]});
  r.tables.push_back(std::move(t));
  r.notes.push_back("limsup values are asymptotic; bands are finite-horizon sanity checks calibrated on the Brownian oracle");
  return r;
}

ExperimentReport chung_experiment(const ErwvrpParams& params, std::size_t n_max, std::size_t replicas,
                                  std::uint64_t seed, Exec exec, ChungOptions options) {
  if (n_max < options.min_horizon) {
    throw std::invalid_argument("chung_experiment: n_max must be at least " + std::to_string(options.min_horizon));
  }
  if (replicas == 0) throw std::invalid_argument("chung_experiment: need at least one replica");
  const auto table = params.weights.table(n_max);
  const auto s2 = second_moment_prefix(params.alpha(), *table, n_max);
  PathFunctionalInputs in;
  in.n = n_max;
  in.chung_scale.assign(n_max + 1, 0.0);
  for (std::size_t k = 0; k <= n_max; ++k) {
    if (s2[k] > kE2) in.chung_scale[k] = std::sqrt(std::log(std::log(s2[k])) / s2[k]);
  }
  const auto sd = gap_sd(s2);
  PathSource walk{PathSource::Kind::walk, params.p, table.get(), nullptr};
  PathSource brown{PathSource::Kind::brownian, params.p, nullptr, &sd};
  const auto walk_paths = path_functionals(walk, in, replicas, seed, exec);
  const auto brown_paths = path_functionals(brown, in, replicas, seed, exec);
  std::vector<double> w, b;
  for (const auto& p : walk_paths) w.push_back(p.chung_min);
  for (const auto& p : brown_paths) b.push_back(p.chung_min);

  ExperimentReport r;
  r.name = "chung";
  r.parameters = base_params(params);
  r.parameters["n_max"] = n_max;
  r.parameters["replicas"] = replicas;
  r.manifest = {seed, walk_streams() + "; " + brownian_streams(), replicas, kSoftwareVersion, ""};
  const double mw = median(w);
  const double mb = median(b);
  r.check("median_difference", std::fabs(mw - mb), 0.0, options.median_tolerance,
          "|median walk - median Brownian| of the running-min statistic");
  r.info("walk_median", mw);
  r.info("brownian_median", mb);
  r.info("limit_constant", kChungConstant, "pi / sqrt(8), the almost-sure liminf");
  r.info("brownian_fraction_near_constant", fraction_in(b, 0.8 * kChungConstant, 1.4 * kChungConstant),
         "share of Brownian replicas in [0.8, 1.4] pi/sqrt(8); not asserted at finite n");
  Table t{"running_min", {"replica", "walk", "brownian"}, {}};
  for (std::size_t i = 0; i < replicas; ++i) t.rows.push_back({static_cast<double>(i), w[i], b[i]});
  r.tables.push_back(std::move(t));
  return r;
}

ExperimentReport modulus_experiment(const FractalFunction& f, const VarianceProfile& profile,
                                    const std::vector<Rational>& h_grid, std::size_t x_samples, std::uint64_t seed,
                                    Exec exec, ModulusOptions options) {
  if (h_grid.empty()) throw std::invalid_argument("modulus_experiment: empty h grid");
  if (x_samples < 10) throw std::invalid_argument("modulus_experiment: need at least 10 x-samples");
  if (profile.base() != f.base()) throw std::invalid_argument("modulus_experiment: profile base differs from f");
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    check_fractal_grid(f, h_grid[i]);
    if (i > 0 && !(h_grid[i] < h_grid[i - 1])) throw std::invalid_argument("modulus_experiment: h grid must decrease");
  }
  const unsigned r = f.base();
  ExperimentReport rep;
  rep.name = "modulus";
  rep.parameters = {{"r", r}, {"weights", f.weights().spec().to_json()}, {"x_samples", x_samples}};
  auto hs = nlohmann::json::array();
  for (const auto& h : h_grid) hs.push_back(h.to_string());
  rep.parameters["h_grid"] = hs;
  rep.manifest = {seed, sample_streams(), x_samples, kSoftwareVersion, ""};

  Table summary{"per_h", {"m", "h", "sigma", "ks", "residual_median", "residual_q99"}, {}};
  for (const auto& h : h_grid) {
    const std::size_t m = scale_index(r, h);
    const double hd = h.to_double();
    const double sigma = profile.sigma(h);
    if (!(sigma > 0.0)) throw std::invalid_argument("modulus_experiment: sigma(h) = 0");
    const double norm = hd * std::sqrt(sigma);
    const auto inc = sampled_increments(f, h, x_samples, seed, options.eps_relative * norm, exec);
    const auto walks = sampled_weighted_walks(f, m, x_samples, seed, exec);
    std::vector<double> z(x_samples), residual(x_samples);
    for (std::size_t i = 0; i < x_samples; ++i) {
      z[i] = inc[i] / norm;
      residual[i] = std::fabs(inc[i] / hd - walks[i]);
    }
    const double ks = ks_statistic(z);
    const std::string tag = "m" + std::to_string(m);
    if (m <= 1) {
      rep.info("ks_" + tag, ks, "m(h) = 1: no asymptotics, report only");
    } else {
      rep.check("ks_" + tag, ks, 0.0, options.ks_tolerance, "KS of normalised increments, h = " + h.to_string());
    }
    const double rmed = median(residual);
    const double rq = quantile(residual, 0.99);
    rep.info("residual_median_" + tag, rmed, "|increment/h - w_m(x)|, median over x");
    rep.info("residual_q99_" + tag, rq, "|increment/h - w_m(x)|, 99% quantile");
    summary.rows.push_back({static_cast<double>(m), hd, sigma, ks, rmed, rq});
    rep.tables.push_back(ecdf_table("ecdf_" + tag, z));
  }
  rep.tables.push_back(std::move(summary));

  // sup_{T in [h, 1)} |f(x+T) - f(x)| / T over T = r^{-j}, tracked as h runs down the r-adic grid.
  const std::size_t levels = scale_index(r, h_grid.back());
  const std::size_t sup_n = std::min(options.sup_samples, x_samples);
  if (levels >= 1 && sup_n > 0) {
    std::vector<std::vector<double>> sup(sup_n, std::vector<double>(levels, 0.0));
    for_each_index(sup_n, exec, [&](std::size_t i) {
      const Rational x = sample_point(seed, i);
      double running = 0.0;
      u128 den = 1;
      for (std::size_t j = 1; j <= levels; ++j) {
        den *= r;
        const Rational t(1, den);
        const double td = t.to_double();
        const double d = f.increment(x, t, options.eps_relative * td).value;
        running = std::max(running, std::fabs(d) / td);
        sup[i][j - 1] = running;
      }
    });
    std::size_t violations = 0;
    for (const auto& row : sup) {
      for (std::size_t j = 1; j < row.size(); ++j) violations += row[j] < row[j - 1] ? 1 : 0;
    }
    rep.check("sup_statistic_monotonicity_violations", static_cast<double>(violations), 0.0, 0.0,
              "running sup must be non-decreasing in 1/h");
    Table trace{"sup_statistic", {"level", "median_normalised_sup", "brownian_constant"}, {}};
    for (std::size_t j = 1; j <= levels; ++j) {
      const double v = profile.at(std::min(j, profile.n_max()));
      std::vector<double> col;
      for (const auto& row : sup) col.push_back(row[j - 1]);
      const double scale = v > std::numbers::e ? std::sqrt(std::log(std::log(v)) / v) : std::nan("");
      trace.rows.push_back({static_cast<double>(j), scale * median(col), kChungConstant});
    }
    rep.info("sup_statistic_final_median", trace.rows.back()[1],
             "median of sqrt(loglog V/V) sup_T |f(x+T)-f(x)|/T at the finest level; compare with pi/sqrt(8)");
    rep.tables.push_back(std::move(trace));
  }
  return rep;
}

ExperimentReport functional_clt_experiment(const FractalFunction& f, const VarianceProfile& profile, double beta,
                                           std::size_t n, const std::vector<double>& t_grid, std::size_t x_samples,
                                           std::uint64_t seed, Exec exec, FcltOptions options) {
  if (!(beta > 0.0)) throw std::invalid_argument("functional_clt_experiment: beta must be positive");
  if (t_grid.empty()) throw std::invalid_argument("functional_clt_experiment: empty t grid");
  if (x_samples < 10) throw std::invalid_argument("functional_clt_experiment: need at least 10 x-samples");
  if (!f.envelope()) {
    throw PreconditionFailed("weights " + f.weights().spec().to_json().dump() +
                             " do not pass the growth assumptions; the functional CLT does not apply");
  }
  if (profile.n_max() < n) throw std::invalid_argument("functional_clt_experiment: profile shorter than n");
  const double vn = profile.at(n);
  std::vector<std::size_t> level;
  for (double t : t_grid) {
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("functional_clt_experiment: t must lie in (0, 1]");
    const auto l = static_cast<std::size_t>(std::floor(static_cast<double>(n) * std::pow(t, 1.0 / beta)));
    if (l == 0) throw std::invalid_argument("functional_clt_experiment: t too small for n");
    const double ratio = profile.at(l) / vn;
    const double target = std::pow(t, beta);
    if (std::fabs(ratio / target - 1.0) > options.regular_variation_tolerance) {
      throw PreconditionFailed("V_" + std::to_string(l) + " / V_" + std::to_string(n) + " = " + std::to_string(ratio) +
                               " differs from t^beta = " + std::to_string(target) + " by more than " +
                               std::to_string(options.regular_variation_tolerance * 100) + "%");
    }
    level.push_back(l);
  }
  const unsigned r = f.base();
  std::vector<std::vector<double>> paths(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const Rational h(1, checked_pow(r, static_cast<unsigned>(level[i])));
    const double hd = h.to_double();
    const double norm = hd * std::sqrt(vn);
    auto inc = sampled_increments(f, h, x_samples, seed, options.eps_relative * norm, exec);
    for (double& v : inc) v /= norm;
    paths[i] = std::move(inc);
  }
  ExperimentReport rep;
  rep.name = "fclt";
  rep.parameters = {{"r", r}, {"weights", f.weights().spec().to_json()}, {"beta", beta}, {"n", n},
                    {"t_grid", t_grid}, {"x_samples", x_samples}};
  rep.manifest = {seed, sample_streams(), x_samples, kSoftwareVersion, ""};
  Table cov{"covariance", {"s", "t", "empirical", "brownian"}, {}};
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    for (std::size_t j = i; j < t_grid.size(); ++j) {
      const double c = i == j ? sample_variance(paths[i]) : sample_covariance(paths[i], paths[j]);
      const double target = std::min(t_grid[i], t_grid[j]);
      const std::string name = i == j ? "variance_t" + std::to_string(t_grid[i]).substr(0, 6)
                                      : "covariance_" + std::to_string(t_grid[i]).substr(0, 6) + "_" +
                                            std::to_string(t_grid[j]).substr(0, 6);
      rep.check(name, c, target - options.tolerance, target + options.tolerance, "Brownian value min(s, t)");
      cov.rows.push_back({t_grid[i], t_grid[j], c, target});
    }
  }
  rep.tables.push_back(std::move(cov));
  return rep;
}

ExperimentReport profile_consistency_experiment(const FractalFunction& f, const VarianceProfile& profile,
                                                const std::vector<std::size_t>& levels, std::size_t x_samples,
                                                std::uint64_t seed, Exec exec, double se_multiple) {
  if (x_samples < 10) throw std::invalid_argument("profile_consistency_experiment: need at least 10 x-samples");
  ExperimentReport rep;
  rep.name = "profile";
  rep.parameters = {{"r", f.base()}, {"weights", f.weights().spec().to_json()}, {"levels", levels},
                    {"x_samples", x_samples}};
  rep.manifest = {seed, sample_streams(), x_samples, kSoftwareVersion, ""};
  Table t{"profile", {"n", "V_n", "monte_carlo", "standard_error"}, {}};
  for (std::size_t n : levels) {
    const auto w = sampled_weighted_walks(f, n, x_samples, seed, exec);
    RunningStats s;
    for (double v : w) s.add(v * v);
    const double v = profile.at(n);
    const double se = s.standard_error();
    rep.check("z_score_n" + std::to_string(n), std::fabs(s.mean() - v) / se, 0.0, se_multiple,
              "|mean w_n^2 - V_n| in standard errors");
    t.rows.push_back({static_cast<double>(n), v, s.mean(), se});
  }
  rep.tables.push_back(std::move(t));
  return rep;
}

ExperimentReport linear_depth_tail_experiment(unsigned r, std::size_t level, std::size_t j_max, std::size_t x_samples,
                                              std::uint64_t seed, Exec exec) {
  if (x_samples < 10) throw std::invalid_argument("linear_depth_tail_experiment: need at least 10 x-samples");
  const Rational h(1, checked_pow(r, static_cast<unsigned>(level)));
  if (level < 2) throw std::invalid_argument("linear_depth_tail_experiment: level must be at least 2");
  const auto depth = sampled_linear_depths(r, h, x_samples, seed, exec);
  ExperimentReport rep;
  rep.name = "linear_depth_tail";
  rep.parameters = {{"r", r}, {"level", level}, {"j_max", j_max}, {"x_samples", x_samples}};
  rep.manifest = {seed, sample_streams(), x_samples, kSoftwareVersion, ""};
  Table t{"tail", {"j", "empirical", "bound", "standard_error"}, {}};
  const double n = static_cast<double>(x_samples);
  for (std::size_t j = 1; j <= j_max; ++j) {
    std::size_t c = 0;
    for (int d : depth) c += static_cast<double>(level) - d >= static_cast<double>(j) ? 1 : 0;
    const double prob = static_cast<double>(c) / n;
    const double se = std::sqrt(std::max(prob * (1.0 - prob), 1.0 / n) / n);
    const double bound = 2.0 * std::pow(static_cast<double>(r), -static_cast<double>(j - 1));
    rep.check("tail_j" + std::to_string(j), prob, 0.0, bound + 3.0 * se, "P(level - linear depth >= j)");
    t.rows.push_back({static_cast<double>(j), prob, bound, se});
  }
  rep.tables.push_back(std::move(t));
  return rep;
}

ExperimentReport blocks_experiment(const ErwvrpParams& params, double delta, std::size_t count, std::size_t replicas,
                                   std::uint64_t seed, Exec exec, BlocksOptions options) {
  if (replicas < 2) throw std::invalid_argument("blocks_experiment: need at least two replicas");
  const BlockingScheme scheme = build_blocks(params.weights, delta, count, params.alpha());
  const std::size_t last = scheme.boundaries.back();
  const ErwvrpParams run(params.p, params.weights, std::max<std::size_t>(last, 1));
  const GordinCorrector corrector(run, scheme, options.tol, options.gordin);
  const std::size_t blocks = scheme.block_count();
  std::vector<XiSequence> xs(replicas);
  std::vector<double> lln(replicas);
  const auto table = params.weights.table(std::max<std::size_t>(last, 1));
  const double s2_end = last > 0 ? exact_second_moment(run.alpha(), *table, 0, last) : 0.0;
  for_each_index(replicas, exec, [&](std::size_t i) {
    const WalkPath path = simulate(run, seed, stream_id(StreamKind::walk, i));
    xs[i] = xi_sequence(corrector, scheme, path);
    double sq = 0.0;
    for (double y : xs[i].block_sums) sq += y * y;
    lln[i] = s2_end > 0 ? std::fabs(sq - s2_end) / s2_end : 0.0;
  });

  ExperimentReport rep;
  rep.name = "blocks";
  rep.parameters = base_params(params);
  rep.parameters["delta"] = delta;
  rep.parameters["count"] = count;
  rep.parameters["replicas"] = replicas;
  rep.parameters["tol"] = options.tol;
  rep.parameters["anchor"] =
      options.gordin.anchor == AnchorPolicy::preceding_block_end ? "preceding_block_end" : "displayed_index";
  rep.parameters["exponent_offset"] = options.gordin.exponent_offset;
  rep.manifest = {seed, walk_streams(), replicas, kSoftwareVersion, ""};

  double worst = 0.0;
  for (const auto& x : xs) worst = std::max(worst, x.telescoping_residual);
  rep.check("telescoping_residual_max", worst, 0.0, 2.0 * static_cast<double>(blocks) * options.tol,
            "max over paths of |sum xi + u_1 - u_{M+1} - sum Y|, bound 2 M tol");

  RunningStats pooled;
  std::vector<RunningStats> per_block(blocks);
  for (const auto& x : xs) {
    for (std::size_t j = 0; j < blocks; ++j) {
      per_block[j].add(x.xi[j]);
      pooled.add(x.xi[j]);
    }
  }
  double worst_z = 0.0;
  for (const auto& s : per_block) {
    if (s.standard_error() > 0) worst_z = std::max(worst_z, std::fabs(s.mean()) / s.standard_error());
  }
  rep.check("xi_pooled_mean_z", pooled.standard_error() > 0 ? std::fabs(pooled.mean()) / pooled.standard_error() : 0.0,
            0.0, 3.0, "|mean of all xi_j| in standard errors");
  // family-wise 3-sigma level (two-sided 0.27%) split over the blocks
  const double family = 0.0027 / static_cast<double>(std::max<std::size_t>(blocks, 1));
  const double z_crit = boost::math::quantile(boost::math::normal(), 1.0 - 0.5 * family);
  rep.check("xi_block_mean_max_z", worst_z, 0.0, z_crit, "max_j |mean xi_j| / SE_j against a Bonferroni 3-sigma level");
  rep.info("block_energy_last", scheme.energies.back(), "B at the last boundary");
  rep.info("block_lln_median_relative_deviation", median(lln), "|sum Y_j^2 - s^2| / s^2 at the last boundary");

  const auto prefix = second_moment_prefix(run.alpha(), *table, last);
  Table t{"blocks", {"j", "h_j", "B_j", "H_j", "sigma_j_sq", "s_sq_h_j", "mean_xi", "se_xi"}, {}};
  for (std::size_t j = 1; j <= blocks; ++j) {
    t.rows.push_back({static_cast<double>(j), static_cast<double>(scheme.h(j)), scheme.energies[j - 1],
                      static_cast<double>(scheme.delays[j - 1]),
                      exact_second_moment(run.alpha(), *table, scheme.h(j), scheme.h(j + 1)), prefix[scheme.h(j)],
                      per_block[j - 1].mean(), per_block[j - 1].standard_error()});
  }
  rep.tables.push_back(std::move(t));
  return rep;
}

}  // namespace tvdw
