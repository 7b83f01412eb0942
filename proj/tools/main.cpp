// Experiment driver: design / evaluate / beampattern subcommands over a JSON
// experiment config, emitting plot-ready CSV artifacts.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "epd/experiments.hpp"

namespace {

int threads_default() {
  if (const char* env = std::getenv("EPD_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ESPRIT-oriented precoder design and evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false, out_set = false;
  int threads = threads_default();

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "Override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--out-dir", out_dir, "Override the output directory")
        ->each([&](const std::string&) { out_set = true; });
    cmd->add_option("--threads", threads, "Worker pool size for sweep points");
  };

  auto* design = app.add_subcommand("design", "Run the precoder design and dump diagnostics");
  auto* evaluate = app.add_subcommand("evaluate", "Run the Monte Carlo RMSE benchmark");
  auto* pattern = app.add_subcommand("beampattern", "Dump the baseline codebook beampattern");
  add_common(design);
  add_common(evaluate);
  add_common(pattern);

  CLI11_PARSE(app, argc, argv);

  try {
    epd::ExperimentConfig cfg = epd::load_config(config_path);
    if (seed_set) cfg.seed = seed;
    if (out_set) cfg.out_dir = out_dir;
    cfg.threads = threads;

    if (design->parsed()) return epd::cmd_design(cfg);
    if (evaluate->parsed()) return epd::cmd_evaluate(cfg);
    return epd::cmd_beampattern(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
