// Command-line driver for the awareness analytics pipeline.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "cryptic.hpp"

namespace {

int exit_code(cryptic::ExitCode c) { return static_cast<int>(c); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Awareness diffusion analytics over e-commerce event logs"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  unsigned jobs = 0;
  std::string thresholds_path;
  std::string patterns_path;
  app.add_option("--config", config_path, "Run configuration (JSON)")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Random seed for simulation and sampling");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--jobs", jobs, "Worker threads (default: available cores)")->check(CLI::PositiveNumber);
  app.add_option("--phase-thresholds", thresholds_path, "Phase threshold overrides (JSON)")
      ->check(CLI::ExistingFile);
  app.add_option("--patterns", patterns_path, "Query pattern file, one pattern per line")
      ->check(CLI::ExistingFile);
  app.fallthrough();

  for (const auto& step : cryptic::pipeline_steps()) app.add_subcommand(step, "Run the " + step + " step");
  app.add_subcommand("all", "Run every step in order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(cryptic::ExitCode::kConfig);
  }

  try {
    cryptic::RunConfig cfg =
        config_path.empty() ? cryptic::RunConfig{} : cryptic::load_run_config(config_path);
    if (*seed_opt) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (jobs > 0) cfg.jobs = jobs;
    if (!thresholds_path.empty()) {
      cfg.phases = cryptic::phase_thresholds_from_json(
          cryptic::pipeline_detail::read_json_file(thresholds_path));
    }
    if (!patterns_path.empty()) cfg.patterns = cryptic::read_patterns_file(patterns_path);
    cfg.validate();

    cryptic::Pipeline pipeline(std::move(cfg));
    pipeline.run(app.get_subcommands().front()->get_name());
    return 0;
  } catch (const cryptic::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(cryptic::ExitCode::kDataIntegrity);
  }
}
