#pragma once

#include <nlohmann/json.hpp>

#include "sabre/cli/config.hpp"

namespace sabre::cli {

// Pipeline stages behind the subcommands. Each writes its artifacts under
// cfg.out_dir, returns a machine-readable summary, and throws sabre errors
// on failure; the binary maps those to exit codes and stderr records.
nlohmann::json cmd_toy(const RunConfig& cfg);
nlohmann::json cmd_ingest(const RunConfig& cfg);
nlohmann::json cmd_augment(const RunConfig& cfg);
nlohmann::json cmd_spectrogram(const RunConfig& cfg);
nlohmann::json cmd_train(const RunConfig& cfg);
nlohmann::json cmd_attack(const RunConfig& cfg);
nlohmann::json cmd_transfer(const RunConfig& cfg);
nlohmann::json cmd_report(const RunConfig& cfg);
nlohmann::json cmd_run(const RunConfig& cfg);

}  // namespace sabre::cli
