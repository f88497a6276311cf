// pcnsim: command-line front end. Every subcommand takes --config FILE plus
// one --flag per recipe key; flags override the file.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "pcnsim/commands.hpp"

namespace {

std::string flag_name(std::string_view key) {
  std::string s(key);
  for (auto& ch : s)
    if (ch == '_') ch = '-';
  return "--" + s;
}

struct SubcommandOptions {
  CLI::App* app{nullptr};
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> options;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcnsim: Monte Carlo failure-time simulator for payment channel networks"};
  app.set_version_flag("--version", std::string(pcnsim::kToolName) + " " + pcnsim::kToolVersion);
  app.require_subcommand(1);

  const std::map<std::string, std::string> descriptions = {
      {"simulate", "run a Monte Carlo campaign of the random payment process"},
      {"sweep", "repeat a campaign over a range of uniform capacities"},
      {"betweenness", "edge betweenness, selection probabilities and xi bounds"},
      {"redistribute", "total-preserving capacity plan (uniform or xi_optimized)"},
      {"couple-check", "verify tau1 == tau2 for the clique coupling over many seeds"},
      {"fit", "least-squares scale fit of mean failure times"},
      {"graph", "generate or convert a graph to an edge list"},
  };

  std::map<std::string, SubcommandOptions> subs;
  for (const auto& [command, keys] : pcnsim::command_keys()) {
    auto& so = subs[command];
    so.app = app.add_subcommand(command, descriptions.at(command));
    so.app->add_option("--config", so.config_path, "recipe file (key = value lines)");
    for (const auto& key : keys) {
      const auto* spec = pcnsim::find_key(key);
      std::string help(spec->help);
      if (!spec->default_value.empty()) help += " [default: " + std::string(spec->default_value) + "]";
      if (spec->type == pcnsim::KeyType::boolean) {
        so.options[key] = so.app->add_flag(flag_name(key), so.flags[key], help);
      } else {
        so.options[key] = so.app->add_option(flag_name(key), so.values[key], help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? pcnsim::kExitOk : pcnsim::kExitConfig;
  }

  for (auto& [command, so] : subs) {
    if (!so.app->parsed()) continue;
    try {
      pcnsim::KeyValues file;
      if (!so.config_path.empty()) {
        std::ifstream is(so.config_path);
        if (!is) throw pcnsim::ConfigError("cannot open config file '" + so.config_path + "'");
        file = pcnsim::parse_recipe(is, so.config_path);
      }
      pcnsim::KeyValues flags;
      for (const auto& [key, opt] : so.options) {
        if (opt->count() == 0) continue;
        const auto* spec = pcnsim::find_key(key);
        const std::string value = spec->type == pcnsim::KeyType::boolean ? (so.flags[key] ? "true" : "false") : so.values[key];
        flags.set(key, value, "flag " + flag_name(key));
      }
      std::optional<std::string> env_seed;
      if (const char* s = std::getenv("PCN_SIM_SEED"); s && *s) env_seed = s;
      const auto recipe = pcnsim::resolve_recipe(command, file, flags, env_seed);
      return pcnsim::run_command(recipe, std::cout, std::cerr);
    } catch (const pcnsim::ConfigError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return pcnsim::kExitConfig;
    }
  }
  return pcnsim::kExitConfig;
}
