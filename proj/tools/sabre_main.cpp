// Command-line front end for the audio adversarial-robustness pipeline.
// Subcommands map 1:1 onto pipeline stages; `run` chains them end to end.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sabre/cli/commands.hpp"
#include "sabre/cli/config.hpp"
#include "sabre/errors.hpp"

namespace {

// Machine-readable failure record on stderr.
void emit_error(const std::string& type, const std::string& message,
                const std::vector<std::string>& violations = {}) {
  nlohmann::json j = {{"error", {{"type", type}, {"message", message}}}};
  if (!violations.empty()) j["error"]["violations"] = violations;
  std::cerr << j.dump() << std::endl;
}

constexpr int kExitConfig = 2;   // invalid config / arguments
constexpr int kExitRuntime = 3;  // pipeline failure (numerical, degenerate input, ...)
constexpr int kExitIo = 4;       // missing/corrupt files

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarial robustness pipeline for audio spectrogram classifiers"};
  app.require_subcommand(1);

  std::string config_path;
  bool dry_run = false;
  bool have_seed = false, have_workers = false, have_out = false;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out_dir;

  app.add_option("--config", config_path,
                 "JSON run config (defaults to the built-in toy configuration)")
      ->envname("SABRE_CONFIG");
  app.add_flag("--dry-run", dry_run, "validate the config and print it; touch nothing");
  auto* seed_opt = app.add_option("--seed", seed, "override the run seed");
  auto* workers_opt = app.add_option("--workers", workers, "override the worker count");
  auto* out_opt = app.add_option("--out", out_dir, "override the output directory");

  const std::vector<std::string> names = {"toy",    "ingest",   "augment", "spectrogram",
                                          "train",  "attack",   "transfer", "report",
                                          "run"};
  for (const std::string& n : names) app.add_subcommand(n)->fallthrough();

  CLI11_PARSE(app, argc, argv);

  std::vector<std::string> violations;
  sabre::cli::RunConfig cfg;
  if (!config_path.empty())
    cfg = sabre::cli::load_run_config(config_path, violations);
  else
    cfg = sabre::cli::default_toy_run_config();

  sabre::cli::apply_env_overrides(cfg, violations);
  have_seed = seed_opt->count() > 0;
  have_workers = workers_opt->count() > 0;
  have_out = out_opt->count() > 0;
  if (have_seed) cfg.seed = seed;
  if (have_workers) {
    if (workers < 1) violations.push_back("--workers: must be >= 1");
    cfg.workers = workers;
  }
  if (have_out) {
    if (out_dir.empty()) violations.push_back("--out: must be non-empty");
    cfg.out_dir = out_dir;
  }

  if (!violations.empty()) {
    emit_error("config", "invalid run configuration", violations);
    return kExitConfig;
  }

  if (dry_run) {
    std::cout << sabre::cli::run_config_to_json(cfg).dump(2) << std::endl;
    return 0;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    nlohmann::json summary;
    if (sub == "toy") summary = sabre::cli::cmd_toy(cfg);
    else if (sub == "ingest") summary = sabre::cli::cmd_ingest(cfg);
    else if (sub == "augment") summary = sabre::cli::cmd_augment(cfg);
    else if (sub == "spectrogram") summary = sabre::cli::cmd_spectrogram(cfg);
    else if (sub == "train") summary = sabre::cli::cmd_train(cfg);
    else if (sub == "attack") summary = sabre::cli::cmd_attack(cfg);
    else if (sub == "transfer") summary = sabre::cli::cmd_transfer(cfg);
    else if (sub == "report") summary = sabre::cli::cmd_report(cfg);
    else summary = sabre::cli::cmd_run(cfg);
    std::cout << summary.dump(2) << std::endl;
    return 0;
  } catch (const sabre::ConfigError& e) {
    emit_error("config", e.what());
    return kExitConfig;
  } catch (const sabre::IoError& e) {
    emit_error("io", e.what());
    return kExitIo;
  } catch (const sabre::FormatError& e) {
    emit_error("format", e.what());
    return kExitIo;
  } catch (const sabre::UnsupportedError& e) {
    emit_error("unsupported", e.what());
    return kExitIo;
  } catch (const sabre::Error& e) {
    emit_error("runtime", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return kExitRuntime;
  }
}
