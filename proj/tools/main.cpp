#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "aloha/cli.hpp"

namespace {

int run(const std::string& subcommand, const std::string& config_path,
        const std::string& out_dir, const std::string& seed_arg) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot read config file " << config_path << "\n";
    return 2;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  std::optional<std::uint64_t> seed_override;
  if (!seed_arg.empty()) {
    if (seed_arg == "random") {
      std::random_device rd;
      seed_override = (static_cast<std::uint64_t>(rd()) << 32) | rd();
    } else {
      try {
        seed_override = std::stoull(seed_arg);
      } catch (const std::exception&) {
        std::cerr << "error: --seed must be an unsigned integer or 'random'\n";
        return 2;
      }
    }
  }

  aloha::RunConfig cfg;
  try {
    cfg = aloha::parse_config(buf.str());
  } catch (const aloha::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const aloha::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  const char* expected = nullptr;
  switch (cfg.experiment.index()) {
    case 0: expected = "simulate"; break;
    case 1: expected = "fluid"; break;
    case 2: expected = "equilibrium"; break;
    case 3: expected = "converge"; break;
    default: expected = "validate"; break;
  }
  if (subcommand != expected) {
    std::cerr << "error: config defines a '" << expected << "' experiment but the '"
              << subcommand << "' subcommand was invoked\n";
    return 2;
  }
  return aloha::dispatch(cfg, out_dir, seed_override);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiclass slotted-ALOHA workload simulator and fluid-model toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::string out_dir = ".";
  std::string seed_arg;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (default: current)");
  app.add_option("--seed", seed_arg, "master seed override: unsigned integer or 'random'");

  static const char* kSubcommands[] = {"simulate", "fluid", "equilibrium", "converge",
                                       "validate"};
  static const char* kHelp[] = {
      "run one workload path and write path.csv",
      "integrate the fluid trajectory and write fluid.csv",
      "solve for the equilibrium point and write equilibrium.json",
      "run the fluid-limit ladder experiment and write converge.csv",
      "run the model self-checks and write validate.txt"};
  for (int s = 0; s < 5; ++s) app.add_subcommand(kSubcommands[s], kHelp[s]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  for (const char* name : kSubcommands)
    if (app.got_subcommand(name)) return run(name, config_path, out_dir, seed_arg);
  return 2;
}
