#include "tvdw/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "tvdw/report.hpp"

namespace tvdw {

namespace {

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {ExperimentKind::eval, "eval"},       {ExperimentKind::simulate, "simulate"},
    {ExperimentKind::blocks, "blocks"},   {ExperimentKind::clt, "clt"},
    {ExperimentKind::lil, "lil"},         {ExperimentKind::chung, "chung"},
    {ExperimentKind::modulus, "modulus"}, {ExperimentKind::fclt, "fclt"},
    {ExperimentKind::validate_weights, "validate-weights"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F&& f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + f(v[i]);
  return s;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const std::vector<std::string> kOutputKeys = {"out", "svg", "threads"};

std::map<std::string, std::string> canonical_map(const RunConfig& c) {
  return {
      {"anchor", c.anchor},
      {"beta", fmt(c.beta)},
      {"count", std::to_string(c.count)},
      {"delta", c.delta ? fmt(*c.delta) : "none"},
      {"eps", fmt(c.eps)},
      {"exponent_offset", std::to_string(c.exponent_offset)},
      {"kind", to_string(c.kind)},
      {"ks_tolerance", fmt(c.ks_tolerance)},
      {"levels", join(c.levels, [](std::size_t v) { return std::to_string(v); })},
      {"n", std::to_string(c.n)},
      {"normalization", c.normalization},
      {"out", c.out},
      {"p", fmt(c.p)},
      {"q", fmt(c.q)},
      {"r", std::to_string(c.r)},
      {"replicas", std::to_string(c.replicas)},
      {"seed", std::to_string(c.seed)},
      {"svg", c.svg ? "true" : "false"},
      {"t_grid", join(c.t_grid, fmt)},
      {"threads", std::to_string(c.threads)},
      {"tol", fmt(c.tol)},
      {"weights", c.weights.to_json().dump()},
      {"x", fmt(c.x)},
      {"x_samples", std::to_string(c.x_samples)},
  };
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "eval";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (const auto& k : kKinds) {
    if (name == k.name) return k.kind;
  }
  if (name == "validate_weights") return ExperimentKind::validate_weights;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [key, value] : canonical_map(RunConfig{})) k.push_back(key);
    return k;
  }();
  return keys;
}

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = trim(raw_value);
  if (key == "kind") {
    kind = experiment_kind_from_string(value);
  } else if (key == "r") {
    const auto v = parse_unsigned(key, value);
    if (v < 2 || v > 255) throw ConfigError("'r' must lie in [2, 255], got " + value);
    r = static_cast<unsigned>(v);
  } else if (key == "weights") {
    try {
      weights = value.starts_with("{") ? WeightSpec::from_json(nlohmann::json::parse(value))
                                       : WeightSpec::from_json(nlohmann::json(value));
    } catch (const std::exception& e) {
      throw ConfigError("bad 'weights' value '" + value + "': " + e.what());
    }
  } else if (key == "p") {
    const double v = parse_double(key, value);
    if (!(v > 0.0 && v < 1.0)) throw ConfigError("'p' must lie in (0, 1), got " + value);
    p = v;
  } else if (key == "delta") {
    if (value == "none" || value.empty()) {
      delta.reset();
    } else {
      const double v = parse_double(key, value);
      if (!(v > 0.0 && v <= 1.0)) throw ConfigError("'delta' must lie in (0, 1], got " + value);
      delta = v;
    }
  } else if (key == "n") {
    n = parse_unsigned(key, value);
    if (n == 0) throw ConfigError("'n' must be at least 1");
  } else if (key == "replicas") {
    replicas = parse_unsigned(key, value);
    if (replicas == 0) throw ConfigError("'replicas' must be at least 1");
  } else if (key == "seed") {
    seed = parse_unsigned(key, value);
  } else if (key == "x") {
    x = parse_double(key, value);
  } else if (key == "eps") {
    eps = parse_double(key, value);
    if (!(eps > 0.0)) throw ConfigError("'eps' must be positive");
  } else if (key == "levels") {
    levels.clear();
    for (const auto& item : split_list(value)) levels.push_back(parse_unsigned(key, item));
    if (levels.empty()) throw ConfigError("'levels' must list at least one level");
  } else if (key == "t_grid") {
    t_grid.clear();
    for (const auto& item : split_list(value)) t_grid.push_back(parse_double(key, item));
    if (t_grid.empty()) throw ConfigError("'t_grid' must list at least one time");
  } else if (key == "beta") {
    beta = parse_double(key, value);
    if (!(beta > 0.0)) throw ConfigError("'beta' must be positive");
  } else if (key == "x_samples") {
    x_samples = parse_unsigned(key, value);
  } else if (key == "normalization") {
    if (value != "exact_s" && value != "plain_A" && value != "scaled_A" && value != "appendix_b") {
      throw ConfigError("'normalization' must be exact_s, plain_A, scaled_A or appendix_b");
    }
    normalization = value;
  } else if (key == "count") {
    count = parse_unsigned(key, value);
    if (count < 2) throw ConfigError("'count' must be at least 2");
  } else if (key == "tol") {
    tol = parse_double(key, value);
    if (!(tol > 0.0)) throw ConfigError("'tol' must be positive");
  } else if (key == "anchor") {
    if (value != "preceding_block_end" && value != "displayed_index") {
      throw ConfigError("'anchor' must be preceding_block_end or displayed_index");
    }
    anchor = value;
  } else if (key == "exponent_offset") {
    const auto v = parse_unsigned(key, value);
    if (v > 1) throw ConfigError("'exponent_offset' must be 0 or 1");
    exponent_offset = static_cast<int>(v);
  } else if (key == "q") {
    q = parse_double(key, value);
    if (!(q > 1.0)) throw ConfigError("'q' must exceed 1");
  } else if (key == "ks_tolerance") {
    ks_tolerance = parse_double(key, value);
    if (!(ks_tolerance > 0.0 && ks_tolerance <= 1.0)) throw ConfigError("'ks_tolerance' must lie in (0, 1]");
  } else if (key == "out") {
    out = value;
  } else if (key == "threads") {
    threads = static_cast<int>(parse_unsigned(key, value));
  } else if (key == "svg") {
    if (value != "true" && value != "false") throw ConfigError("'svg' must be true or false");
    svg = value == "true";
  } else {
    throw ConfigError("unknown configuration key '" + raw_key + "'");
  }
}

std::string RunConfig::canonical_text() const {
  std::string s;
  for (const auto& [key, value] : canonical_map(*this)) s += key + "=" + value + "\n";
  return s;
}

std::string RunConfig::manifest_text() const {
  std::string s;
  for (const auto& [key, value] : canonical_map(*this)) {
    if (std::find(kOutputKeys.begin(), kOutputKeys.end(), key) != kOutputKeys.end()) continue;
    s += key + "=" + value + "\n";
  }
  return s;
}

std::string RunConfig::config_hash() const {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(manifest_text())));
  return buf;
}

RunConfig parse_config_text(const std::string& text, std::optional<ExperimentKind> kind) {
  RunConfig c;
  bool has_kind = false;
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    c.set(key, line.substr(eq + 1));
    has_kind = has_kind || key == "kind";
  }
  if (kind) {
    c.kind = *kind;
  } else if (!has_kind) {
    throw ConfigError("configuration does not name an experiment kind");
  }
  return c;
}

RunConfig load_config_file(const std::string& path, std::optional<ExperimentKind> kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), kind);
}

nlohmann::json manifest(const RunConfig& c) {
  std::string streams;
  std::uint64_t replicas = 0;
  switch (c.kind) {
    case ExperimentKind::simulate:
      streams = "walk -> stream (0 << 56) | 0";
      replicas = 1;
      break;
    case ExperimentKind::clt:
    case ExperimentKind::blocks:
      streams = "walk replica i -> stream (0 << 56) | i";
      replicas = c.replicas;
      break;
    case ExperimentKind::lil:
    case ExperimentKind::chung:
      streams = "walk replica i -> stream (0 << 56) | i; Brownian replica i -> stream (1 << 56) | i";
      replicas = c.replicas;
      break;
    case ExperimentKind::modulus:
    case ExperimentKind::fclt:
      streams = "x-sample i -> stream (2 << 56) | i";
      replicas = c.x_samples;
      break;
    case ExperimentKind::eval:
    case ExperimentKind::validate_weights:
      streams = "none";
      break;
  }
  return {{"seed", c.seed},
          {"stream_assignment", streams},
          {"replicas", replicas},
          {"version", kSoftwareVersion},
          {"config_hash", c.config_hash()},
          {"config", c.manifest_text()}};
}

std::string default_output_root() {
  if (const char* env = std::getenv("TVDW_OUTPUT_DIR"); env && *env) return env;
  return "tvdw-out";
}

}  // namespace tvdw
