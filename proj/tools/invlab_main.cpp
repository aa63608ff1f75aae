#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "invlab/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"invlab: stability experiments for inverse wave/heat problems "
               "from partial boundary traces"};

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  bool lenient = false;
  bool strict = false;
  bool list_only = false;

  app.add_option("config", config_path, "experiment configuration file")->required();
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_option("--jobs", jobs, "worker threads (0 = hardware concurrency)");
  app.add_flag("--strict", strict, "reject unknown config keys (default)");
  app.add_flag("--lenient", lenient, "ignore unknown config keys");
  app.add_flag("--list-experiments", list_only, "list the experiments and exit");

  try {
    app.parse(argc, argv);
    seed_set = seed_opt->count() > 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? invlab::kExitConfigError : invlab::kExitOk;
  }
  if (strict && lenient) {
    std::cerr << "--strict and --lenient are mutually exclusive\n";
    return invlab::kExitConfigError;
  }

  invlab::ExperimentConfig cfg;
  try {
    cfg = invlab::load_config(config_path, !lenient);
  } catch (const invlab::config_error& e) {
    std::cerr << e.what() << "\n";
    return invlab::kExitConfigError;
  }

  if (list_only) {
    for (const auto& e : cfg.experiments) {
      std::printf("%-24s %s (m=%g, K=%d, %zu member(s))\n", e.name.c_str(),
                  invlab::problem_name(e.problem).c_str(), e.m, e.K,
                  e.family.alphas.size() * e.family.noise_levels.size());
    }
    return invlab::kExitOk;
  }

  invlab::RunOverrides overrides;
  if (seed_set) overrides.seed = seed;
  if (!out_dir.empty()) overrides.out_dir = out_dir;
  if (jobs > 0) overrides.jobs = jobs;

  invlab::RunOutcome outcome = invlab::run_experiments(cfg, overrides);
  for (const auto& msg : outcome.messages) std::cout << msg << "\n";
  return outcome.exit_code;
}
