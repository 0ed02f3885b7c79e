#include "fraclab/errors.hpp"
#include "fraclab/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"fraclab: numerical experiments for the prescribed fractional curvature problem on S^n"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool quiet = false;
  app.add_option("command", command, "spectrum, bubble-residual, expansion-verify, flow or existence")
      ->required()
      ->check(CLI::IsMember(fraclab::kCommands));
  app.add_option("--config", config_path, "run configuration file")->required();
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_flag("--quiet", quiet, "no summary on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fraclab::kConfigurationFailure;
  }

  fraclab::RunConfig config;
  try {
    config = fraclab::load_config(config_path, command);
  } catch (const fraclab::Error& e) {
    std::cerr << e.what() << '\n';
    return fraclab::kConfigurationFailure;
  }
  if (*out_opt) config.output_dir = out_dir;
  if (*seed_opt) config.seed = seed;
  return fraclab::run_command(command, config, quiet);
}
