// eegkit: batch EEG feature extraction and classification.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eegkit/pipeline.hpp"

namespace {

using namespace eegkit;
using namespace eegkit::pipeline;

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string electrode_set;
  std::size_t jobs = 1;
  bool dry_run = false;
};

void add_flags(CLI::App* cmd, Flags& f, bool config_required) {
  auto* c = cmd->add_option("--config", f.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  if (config_required) c->required();
  cmd->add_option("--out", f.out, "Run directory");
  cmd->add_option("--seed", f.seed, "Top-level seed (overrides the config)");
  cmd->add_option("--electrode-set", f.electrode_set, "Electrode set (overrides the config)")
      ->check(CLI::IsMember({"homan", "all"}));
  cmd->add_option("--jobs", f.jobs, "Worker threads within a stage")->check(CLI::PositiveNumber);
  cmd->add_flag("--dry-run", f.dry_run, "Validate the config and print the stage plan");
}

// A stage subcommand runs the config's stages up to and including that stage.
Config for_stage(Config cfg, std::optional<Stage> last) {
  if (!last) return cfg;
  std::vector<Stage> kept;
  for (auto s : cfg.stages)
    if (s < *last) kept.push_back(s);
  kept.push_back(*last);
  cfg.stages = kept;
  return cfg;
}

int execute(const Flags& f, std::optional<Stage> last) {
  try {
    Config cfg;
    if (!f.config.empty()) {
      cfg = load_config(f.config);
    } else {
      cfg.synth = synth::CohortSpec{};  // only the synth subcommand runs without a config
      cfg.stages = {Stage::synth};
    }
    cfg = for_stage(std::move(cfg), last);
    if (f.seed) cfg.seed = *f.seed;
    if (!f.electrode_set.empty()) cfg.electrode_set = f.electrode_set;
    if (f.out.empty() && !f.dry_run) throw ConfigError("--out is required");
    const auto res = run(cfg, f.out, {f.jobs, f.dry_run, &std::cerr});
    if (!f.dry_run) std::cout << (std::filesystem::path(f.out) / "summary.json").string() << '\n';
    (void)res;
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error [config]: " << e.what() << '\n';
    return 2;
  } catch (const StageError& e) {
    std::cerr << "error [" << stage_name(e.stage()) << "]: " << e.what() << '\n';
    if (!f.out.empty()) std::cerr << "partial outputs kept in " << (std::filesystem::path(f.out) / "failed").string() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eegkit: EEG band power, scalogram, coherence features and classification"};
  app.require_subcommand(1);

  Flags flags;
  std::optional<Stage> last;
  auto* run_cmd = app.add_subcommand("run", "Run every stage listed in the config");
  add_flags(run_cmd, flags, true);
  run_cmd->callback([&] { last.reset(); });

  for (auto s : kStageOrder) {
    auto* cmd = app.add_subcommand(stage_name(s), std::string("Run the config up to the ") + stage_name(s) + " stage");
    add_flags(cmd, flags, s != Stage::synth);
    cmd->callback([&last, s] { last = s; });
  }

  CLI11_PARSE(app, argc, argv);
  return execute(flags, last);
}
