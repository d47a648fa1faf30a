#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sabre/eval/metrics.hpp"

namespace sabre::eval {

// Documented AUC construction, embedded in every report header.
extern const char* const kAucDefinition;

struct AttackCell {
  std::string attack;
  double auc = 0.0;           // raw success rate when auc_degenerate
  bool auc_degenerate = false;
  double mean_cost = 0.0;
  double median_cost = 0.0;
  int outcomes = 0;
  std::vector<BudgetPoint> curve;  // sorted ascending by budget
};

struct ConfigRow {
  std::string dataset;
  std::string representation;  // stft | mfcc | dwt
  std::string config;          // human-readable config label
  double accuracy_pct = 0.0;   // clean recognition accuracy of the model
  std::vector<AttackCell> attacks;
};

struct RobustnessReport {
  std::string auc_definition;  // filled from kAucDefinition by default
  std::uint64_t seed = 0;
  std::string model_hash;
  std::vector<ConfigRow> rows;
  std::optional<TransferMatrix> transfer;

  RobustnessReport();
};

// Collapses a sweep into per-algorithm cells: each spec contributes one
// curve point at its budget (epsilon for fgsm/bim, max_iter otherwise).
// Cells come back sorted by attack name.
std::vector<AttackCell> summarize_sweep(const std::vector<attacks::SweepRun>& runs);

nlohmann::json transfer_to_json(const TransferMatrix& tm);
TransferMatrix transfer_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const RobustnessReport& r);
RobustnessReport report_from_json(const nlohmann::json& j);
// Table-style layout: config columns, accuracy, then one quoted
// "auc, mean_cost" cell per attack. Headers only for an empty report.
std::string report_to_csv(const RobustnessReport& r);

void emit_report_json(const RobustnessReport& r, const std::string& path);
void emit_report_csv(const RobustnessReport& r, const std::string& path);

// One SVG per config row; returns the written paths. The numbers inside the
// SVG text nodes are serialized exactly like the JSON report values.
std::vector<std::string> emit_plots(const RobustnessReport& r, const std::string& dir);

}  // namespace sabre::eval
