// vtfem command line: configuration-driven experiment runner.
//
//   vtfem <converge|solve|stats|tree|homog> --config cfg.json
//         [--seed N] [--threads N] [--out DIR]
//
// The subcommand must match the "experiment" key of the configuration;
// --seed / --threads / --out override the corresponding config entries.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "vtfem/experiments.hpp"

int main(int argc, char **argv) {
  CLI::App app{"vtfem - immersed vessel forcing experiments for elastic tissue"};
  app.require_subcommand(1);

  struct Options {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    std::string out;
  };
  Options opt;

  const char *names[] = {"converge", "solve", "stats", "tree", "homog"};
  const char *descriptions[] = {
      "mesh-size convergence sweep against the axisymmetric oracle",
      "one configured solve with per-face force report",
      "seeded realizations of random vessel placements (face-force statistics)",
      "balancing-factor tree generation, statistics, and traction matrix",
      "homogenized volumetric source versus closed-form predictions",
  };
  for (int i = 0; i < 5; ++i) {
    CLI::App *sub = app.add_subcommand(names[i], descriptions[i]);
    sub->add_option("--config", opt.config, "JSON experiment configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "override run.master_seed")
        ->each([&](const std::string &) { opt.seed_set = true; });
    sub->add_option("--threads", opt.threads, "override run.threads");
    sub->add_option("--out", opt.out, "override output.dir");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    vtfem::ExperimentConfig cfg = vtfem::ExperimentConfig::from_file(opt.config);
    const std::string sub = app.get_subcommands().front()->get_name();
    if (cfg.experiment != sub) {
      std::fprintf(stderr, "error: config experiment '%s' does not match subcommand '%s'\n",
                   cfg.experiment.c_str(), sub.c_str());
      return 1;
    }
    if (opt.seed_set) cfg.master_seed = opt.seed;
    if (opt.threads > 0) cfg.threads = opt.threads;
    if (!opt.out.empty()) cfg.output_dir = opt.out;
    cfg.validate();

    const std::string csv = vtfem::run_experiment(cfg);
    std::printf("%s\n", csv.c_str());
    return 0;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
