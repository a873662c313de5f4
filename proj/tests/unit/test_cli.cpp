#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "tvdw/cli/config.hpp"
#include "tvdw/cli/run.hpp"
#include "tvdw/kernels.hpp"

using namespace tvdw;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tvdw-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string(TVDW_CLI_PATH) + " " + args + " --out " + out.string() + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config text parsing") {
  const auto c = parse_config_text(
      "# comment\n"
      "kind = clt\n"
      "p = 0.6   # trailing comment\n"
      "weights = {\"kind\": \"power\", \"beta\": 0.5}\n"
      "t-grid = 0.2, 0.4\n"
      "levels = 4,8\n");
  CHECK(c.kind == ExperimentKind::clt);
  CHECK(c.p == 0.6);
  CHECK(c.weights == WeightSpec::power(0.5));
  CHECK(c.t_grid == std::vector<double>{0.2, 0.4});
  CHECK(c.levels == std::vector<std::size_t>{4, 8});
  CHECK_THROWS_AS(parse_config_text("p = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("kind = clt\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("kind = clt\np = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("kind = clt\nn = ten\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("kind = clt\njust words\n"), ConfigError);
  CHECK(parse_config_text("p = 0.6\n", ExperimentKind::lil).kind == ExperimentKind::lil);
}

TEST_CASE("canonical text round trips byte for byte") {
  RunConfig c;
  c.kind = ExperimentKind::modulus;
  c.set("weights", "alternating");
  c.set("delta", "0.5");
  c.set("p", "0.1");
  c.set("levels", "3,5");
  c.set("x", "0.1");
  c.set("svg", "true");
  const std::string text = c.canonical_text();
  const RunConfig back = parse_config_text(text);
  CHECK(back.canonical_text() == text);
  CHECK(back.config_hash() == c.config_hash());
  CHECK(back.x == 0.1);
  for (const auto& key : config_keys()) CHECK(text.find(key + "=") != std::string::npos);
}

TEST_CASE("hash depends on results-relevant keys only") {
  RunConfig a;
  a.kind = ExperimentKind::clt;
  RunConfig b = a;
  b.set("replicas", "20000");
  CHECK(a.config_hash() != b.config_hash());
  RunConfig c = a;
  c.set("out", "/somewhere/else");
  c.set("threads", "8");
  c.set("svg", "true");
  CHECK(a.config_hash() == c.config_hash());
  CHECK(a.config_hash().size() == 16);
}

TEST_CASE("manifest") {
  RunConfig c;
  c.kind = ExperimentKind::lil;
  c.set("replicas", "50");
  const auto m = manifest(c);
  CHECK(m["replicas"] == 50);
  CHECK(m["seed"] == 1);
  CHECK(m["version"] == kSoftwareVersion);
  CHECK(m["config_hash"] == c.config_hash());
  CHECK(m["stream_assignment"].get<std::string>().find("Brownian") != std::string::npos);
}

TEST_CASE("thread count does not change the report") {
  RunConfig c;
  c.kind = ExperimentKind::clt;
  c.set("n", "300");
  c.set("replicas", "2000");
  c.set("threads", "1");
  set_thread_count(1);
  const auto one = build_report(c).to_json().dump();
  c.set("threads", "8");
  set_thread_count(8);
  const auto eight = build_report(c).to_json().dump();
  set_thread_count(0);
  CHECK(one == eight);
}

TEST_CASE("run writes the output layout") {
  const auto dir = scratch_dir("layout");
  RunConfig c;
  c.kind = ExperimentKind::simulate;
  c.set("n", "50");
  c.set("svg", "true");
  c.out = dir.string();
  std::ostringstream out, err;
  CHECK(run(c, out, err) == kExitPass);
  const fs::path target = dir / "simulate" / c.config_hash();
  CHECK(output_directory(c) == target.string());
  CHECK(fs::exists(target / "report.json"));
  CHECK(fs::exists(target / "config.txt"));
  CHECK(fs::exists(target / "path.csv"));
  CHECK(fs::exists(target / "path.svg"));
  std::ifstream report(target / "report.json");
  const auto j = nlohmann::json::parse(report);
  CHECK(j["schema"] == kReportSchema);
  CHECK(j["manifest"]["config_hash"] == c.config_hash());
  CHECK(out.str().find("verdict: pass") != std::string::npos);
  std::ifstream config_file(target / "config.txt");
  std::stringstream text;
  text << config_file.rdbuf();
  CHECK(parse_config_text(text.str()).config_hash() == c.config_hash());
  fs::remove_all(dir);
}

TEST_CASE("exit codes of the command-line tool") {
  const auto dir = scratch_dir("exit");
  CHECK(cli("run eval --x 0.3", dir) == 0);
  CHECK(cli("run eval --weights geometric", dir) == 2);
  CHECK(cli("run lil --p 2.0", dir) == 1);
  CHECK(cli("run nonsense", dir) == 1);
  CHECK(cli("run clt --replicas 10 --n 50", dir) == 1);
  CHECK(cli("run fclt --weights '{\"kind\":\"geometric\",\"ratio\":2}' --n 20 --x-samples 100", dir) == 2);
  CHECK(cli("run modulus --levels 1", dir) == 1);
  CHECK(cli("manifest blocks --replicas 7", dir) == 0);
  CHECK(cli("run", dir) == 1);

  const fs::path config = dir / "c.txt";
  std::ofstream(config) << "kind = simulate\nn = 20\nseed = 4\n";
  CHECK(cli("run simulate --config " + config.string() + " --seed 5", dir) == 0);
  RunConfig expected = load_config_file(config.string());
  expected.set("seed", "5");
  CHECK(fs::exists(dir / "simulate" / expected.config_hash() / "report.json"));
  fs::remove_all(dir);
}

TEST_CASE("default output root honours the environment") {
  setenv("TVDW_OUTPUT_DIR", "/tmp/tvdw-env-root", 1);
  CHECK(default_output_root() == "/tmp/tvdw-env-root");
  unsetenv("TVDW_OUTPUT_DIR");
  CHECK(default_output_root() == "tvdw-out");
}
