#include <iostream>

#include <CLI11.hpp>

#include "qmf/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quantum Markov fields on trees"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  CLI::App* run = app.add_subcommand("run", "Evaluate a qmf/1 config and write report.json / decay.csv");
  run->add_option("config", config, "Path to the JSON config")->required();
  auto* seed_opt = run->add_option("--seed", seed, "RNG seed; overrides the config's seed field");
  run->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qmf::kExitSchema;
  }

  qmf::RunOptions opts;
  if (*seed_opt) opts.seed = seed;
  opts.out_dir = out_dir;
  return qmf::run_file(config, opts, std::cerr);
}
