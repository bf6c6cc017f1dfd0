// fastdiff: batch driver for the fast diffusion solver.
//
//   fastdiff run    --config run.cfg [--samples 16] [--seed 1]
//   fastdiff verify --config run.cfg
//   fastdiff depth  --config run.cfg [--samples 16] [--seed 1]

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fastdiff/commands.hpp"
#include "fastdiff/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Implicit solver for fast diffusion with dynamic boundary conditions"};
  app.require_subcommand(1);

  std::string config_path;
  int samples = 16;
  std::uint64_t seed = 1;

  auto* run = app.add_subcommand("run", "simulate and write series.csv, meta.txt");
  run->add_option("--config", config_path, "configuration file")->required();
  run->add_option("--samples", samples, "random starts for the best-constant estimate");
  run->add_option("--seed", seed, "seed for the best-constant estimate");

  auto* verify = app.add_subcommand("verify", "run the invariant battery");
  verify->add_option("--config", config_path, "configuration file")->required();

  auto* depth = app.add_subcommand("depth", "estimate the potential-well depth");
  depth->add_option("--config", config_path, "configuration file")->required();
  depth->add_option("--samples", samples, "random starts")->check(CLI::PositiveNumber);
  depth->add_option("--seed", seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fastdiff::kExitConfig;
  }

  fastdiff::RunConfig config;
  try {
    config = fastdiff::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return fastdiff::kExitConfig;
  }

  if (*run) return fastdiff::cmd_run(config, samples, seed, std::cerr);
  if (*verify) return fastdiff::cmd_verify(config, std::cout);
  return fastdiff::cmd_depth(config, samples, seed, std::cout);
}
