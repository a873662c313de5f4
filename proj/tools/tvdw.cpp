#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tvdw/cli/config.hpp"
#include "tvdw/cli/run.hpp"

namespace {

std::string flag_name(std::string key) {
  for (char& ch : key) {
    if (ch == '_') ch = '-';
  }
  return "--" + key;
}

struct Command {
  CLI::App* app = nullptr;
  std::string kind;
  std::string config_file;
  std::map<std::string, std::string> values;
};

void add_config_options(Command& cmd) {
  cmd.app->add_option("kind", cmd.kind,
                      "eval | simulate | blocks | clt | lil | chung | modulus | fclt | validate-weights")
      ->required();
  cmd.app->add_option("--config", cmd.config_file, "key = value file; flags override it");
  for (const auto& key : tvdw::config_keys()) {
    if (key == "kind") continue;
    cmd.app->add_option(flag_name(key), cmd.values[key], key)->default_str("");
  }
}

tvdw::RunConfig resolve(const Command& cmd) {
  const auto kind = tvdw::experiment_kind_from_string(cmd.kind);
  tvdw::RunConfig config = cmd.config_file.empty() ? tvdw::RunConfig{} : tvdw::load_config_file(cmd.config_file, kind);
  config.kind = kind;
  for (const auto& [key, value] : cmd.values) {
    if (cmd.app->count(flag_name(key)) > 0) config.set(key, value);
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Takagi-van der Waerden functions and elephant random walks: evaluation and limit-theorem experiments"};
  app.require_subcommand(1);

  Command run_cmd;
  run_cmd.app = app.add_subcommand("run", "run an experiment and write its report");
  add_config_options(run_cmd);

  Command manifest_cmd;
  manifest_cmd.app = app.add_subcommand("manifest", "print the seed manifest of a configuration");
  add_config_options(manifest_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tvdw::kExitUsage;
  }

  try {
    if (*run_cmd.app) return tvdw::run(resolve(run_cmd), std::cout, std::cerr);
    const auto config = resolve(manifest_cmd);
    std::cout << tvdw::manifest(config).dump(2) << '\n';
    return tvdw::kExitPass;
  } catch (const tvdw::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return tvdw::kExitUsage;
  }
}
