#include "tvdw/cli/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tvdw/blocking.hpp"
#include "tvdw/erwvrp.hpp"
#include "tvdw/fractal.hpp"
#include "tvdw/kernels.hpp"
#include "tvdw/limits/experiments.hpp"
#include "tvdw/limits/profile.hpp"

namespace tvdw {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

WeightSequence weights_of(const RunConfig& c) { return WeightSequence(c.weights, c.delta); }

double delta_of(const RunConfig& c) {
  if (c.delta) return *c.delta;
  return c.weights.natural_delta().value_or(1.0);
}

ExperimentReport eval_report(const RunConfig& c) {
  const FractalFunction f(c.r, weights_of(c));
  const Evaluation e = f.eval(c.x, c.eps);
  ExperimentReport r;
  r.name = "eval";
  r.parameters = {{"r", c.r}, {"weights", c.weights.to_json()}, {"x", c.x}, {"eps", c.eps}};
  r.info("value", e.value, "f(x)");
  r.check("error_bound", e.error_bound, 0.0, c.eps, "certified |f(x) - value|");
  r.info("terms", static_cast<double>(e.terms), "series terms summed");
  return r;
}

ExperimentReport simulate_report(const RunConfig& c) {
  const ErwvrpParams params(c.p, weights_of(c), c.n);
  const WalkPath path = simulate(params, c.seed, stream_id(StreamKind::walk, 0));
  const DoobDecomposition d = doob_decompose(params, path);
  double scale = 1.0;
  for (double s : path.partial_sums) scale = std::max(scale, std::fabs(s));
  ExperimentReport r;
  r.name = "simulate";
  r.parameters = {{"p", c.p}, {"weights", c.weights.to_json()}, {"n", c.n}};
  r.check("doob_max_residual", d.max_residual, 0.0, 1e-12 * scale,
          "max_n |S_n - M_n/(1-alpha) - drift terms|, bound 1e-12 max(1, max|S_k|)");
  r.info("S_n", path.partial_sums.back(), "terminal value");
  r.info("M_n", d.martingale.back(), "martingale part at n");
  r.info("s_n_sq", exact_second_moment(params, 0, c.n), "exact E[S_n^2]");
  Table t{"path", {"k", "X_k", "S_k"}, {}};
  for (std::size_t k = 0; k <= c.n; ++k) {
    t.rows.push_back({static_cast<double>(k), static_cast<double>(path.signs[k]), path.partial_sums[k]});
  }
  r.tables.push_back(std::move(t));
  return r;
}

ExperimentReport validate_report(const RunConfig& c) {
  const WeightSequence seq = weights_of(c);
  const double delta = delta_of(c);
  const auto a = validate_assumptions(seq, delta, c.n);
  ExperimentReport r;
  r.name = "validate-weights";
  r.parameters = {{"weights", c.weights.to_json()}, {"delta", delta}, {"q", c.q}, {"n_max", c.n}};
  r.info("k_hat", a.k_hat, "max a_n^2 / A_n^{1-delta}");
  r.info("worst_index", static_cast<double>(a.worst_index));
  r.info("trailing_slope", a.trailing_slope, "log-log slope of the ratio over the last quarter");
  r.check("assumptions_pass", a.pass ? 1.0 : 0.0, 1.0, 1.0,
          "ratio bounded with trailing slope <= " + fmt(a.slope_threshold));
  if (c.n >= 2) {
    const auto g = growth_report(seq, delta, c.q, 1, c.n);
    r.info("sup_polynomial_ratio", g.sup_polynomial_ratio, "sup A_n / n^{1/delta}");
    r.check("polynomial_pass", g.polynomial_pass ? 1.0 : 0.0, 1.0, 1.0, "A_n << n^{1/delta} on the horizon");
    r.check("exponential_admissible", g.smallest_n0 ? 1.0 : 0.0, 1.0, 1.0,
            "some n0 gives A_{n+k} <= A_n q^k on the horizon");
    if (g.smallest_n0) r.info("smallest_n0", static_cast<double>(*g.smallest_n0));
  }
  return r;
}

ExperimentReport modulus_report(const RunConfig& c) {
  const FractalFunction f(c.r, weights_of(c));
  auto levels = c.levels;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<Rational> grid;
  for (std::size_t l : levels) {
    if (l < 2) throw ConfigError("'levels' must be at least 2 so that h = r^{-level} lies in (0, 1/r)");
    try {
      grid.emplace_back(1, checked_pow(c.r, static_cast<unsigned>(l)));
    } catch (const std::overflow_error&) {
      throw ConfigError("level " + std::to_string(l) + " is too fine for base " + std::to_string(c.r));
    }
  }
  const auto profile = variance_profile(c.r, f.weights(), levels.back() + 1);
  ModulusOptions options;
  options.ks_tolerance = c.ks_tolerance;
  return modulus_experiment(f, profile, grid, c.x_samples, c.seed, Exec::openmp, options);
}

ExperimentReport fclt_report(const RunConfig& c) {
  const FractalFunction f(c.r, weights_of(c));
  const auto profile = variance_profile(c.r, f.weights(), c.n);
  return functional_clt_experiment(f, profile, c.beta, c.n, c.t_grid, c.x_samples, c.seed);
}

ExperimentReport blocks_report(const RunConfig& c) {
  const ErwvrpParams params(c.p, weights_of(c), 1);
  BlocksOptions options;
  options.tol = c.tol;
  options.gordin.anchor =
      c.anchor == "displayed_index" ? AnchorPolicy::displayed_index : AnchorPolicy::preceding_block_end;
  options.gordin.exponent_offset = c.exponent_offset;
  return blocks_experiment(params, delta_of(c), c.count, c.replicas, c.seed, Exec::openmp, options);
}

}  // namespace

ExperimentReport build_report(const RunConfig& c) {
  ExperimentReport r;
  switch (c.kind) {
    case ExperimentKind::eval: r = eval_report(c); break;
    case ExperimentKind::simulate: r = simulate_report(c); break;
    case ExperimentKind::validate_weights: r = validate_report(c); break;
    case ExperimentKind::clt: {
      CltOptions options;
      options.ks_tolerance = c.ks_tolerance;
      r = clt_experiment(ErwvrpParams(c.p, weights_of(c), c.n), c.n, c.replicas, c.seed, Exec::openmp, options);
      break;
    }
    case ExperimentKind::lil:
      r = lil_experiment(ErwvrpParams(c.p, weights_of(c), c.n), c.n, c.replicas, c.seed,
                         lil_normalization_from_string(c.normalization));
      break;
    case ExperimentKind::chung: r = chung_experiment(ErwvrpParams(c.p, weights_of(c), c.n), c.n, c.replicas, c.seed); break;
    case ExperimentKind::modulus: r = modulus_report(c); break;
    case ExperimentKind::fclt: r = fclt_report(c); break;
    case ExperimentKind::blocks: r = blocks_report(c); break;
  }
  const auto m = manifest(c);
  r.manifest.seed = c.seed;
  r.manifest.stream_assignment = m["stream_assignment"].get<std::string>();
  r.manifest.replicas = m["replicas"].get<std::uint64_t>();
  r.manifest.version = kSoftwareVersion;
  r.manifest.config_hash = c.config_hash();
  return r;
}

std::string output_directory(const RunConfig& c) {
  const std::filesystem::path root = c.out.empty() ? default_output_root() : c.out;
  return (root / to_string(c.kind) / c.config_hash()).string();
}

void write_outputs(const RunConfig& c, const ExperimentReport& report) {
  const std::filesystem::path dir = output_directory(c);
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    out << report.to_json().dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "config.txt");
    out << c.canonical_text();
  }
  for (const auto& t : report.tables) {
    std::ofstream out(dir / (t.name + ".csv"));
    write_table_csv(out, t);
  }
  if (!c.svg) return;
  for (const auto& t : report.tables) {
    if (t.columns.size() < 2 || t.rows.empty()) continue;
    std::vector<SvgSeries> series;
    for (std::size_t col = 1; col < t.columns.size(); ++col) {
      SvgSeries s{t.columns[col], {}, {}};
      for (const auto& row : t.rows) {
        s.x.push_back(row[0]);
        s.y.push_back(row[col]);
      }
      series.push_back(std::move(s));
    }
    std::ofstream out(dir / (t.name + ".svg"));
    out << svg_line_chart(report.name + ": " + t.name, series);
  }
}

void print_summary(std::ostream& out, const ExperimentReport& report) {
  for (const auto& s : report.statistics) {
    std::string label = s.verdict == Verdict::pass ? "PASS" : s.verdict == Verdict::fail ? "FAIL" : "INFO";
    out << '[' << label << "] " << report.name << '.' << s.name << " = " << fmt(s.value);
    if (s.lower || s.upper) {
      out << "  in [" << (s.lower ? fmt(*s.lower) : "-inf") << ", " << (s.upper ? fmt(*s.upper) : "inf") << ']';
    }
    if (!s.note.empty()) out << "  (" << s.note << ')';
    out << '\n';
  }
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  ExperimentReport report;
  try {
    set_thread_count(config.threads);
    report = build_report(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const PreconditionFailed& e) {
    err << "precondition failed: " << e.what() << '\n';
    return kExitCheckFailed;
  } catch (const CertificationError& e) {
    err << "certification failed: " << e.what() << '\n';
    return kExitCheckFailed;
  } catch (const std::invalid_argument& e) {
    err << "invalid parameters: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (config.kind == ExperimentKind::eval) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", report.stat("value").value);
    out << buf << '\n';
  }
  try {
    write_outputs(config, report);
  } catch (const std::exception& e) {
    err << "cannot write outputs: " << e.what() << '\n';
    return kExitUsage;
  }
  print_summary(out, report);
  out << (report.passed() ? "verdict: pass" : "verdict: fail") << "  -> " << output_directory(config) << '\n';
  return report.passed() ? kExitPass : kExitCheckFailed;
}

}  // namespace tvdw
