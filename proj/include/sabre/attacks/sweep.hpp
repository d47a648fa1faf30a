#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "sabre/attacks/attacks.hpp"

namespace sabre::attacks {

struct SweepRun {
  AttackSpec spec;
  std::vector<int> targets;  // -1 when untargeted
  std::vector<AdvOutcome> outcomes;
  std::int64_t meter_before = 0;
  std::int64_t meter_after = 0;
};

// Seeded uniform choice over the wrong labels; identical across reruns for
// the same (seed, spec index, sample index).
int pick_target_label(std::uint64_t seed, int spec_index, int sample_index, int label, int classes);

// Runs every spec in the grid over the batch. Per-sample attack errors
// become unsuccessful outcomes; the sweep itself never aborts. The model's
// meter batch size is set to the batch size for the duration.
std::vector<SweepRun> run_budget_sweep(nn::DifferentiableClassifier& model, const Mat& batch,
                                       const std::vector<int>& labels,
                                       const std::vector<AttackSpec>& grid, std::uint64_t seed,
                                       int workers);

nlohmann::json spec_to_json(const AttackSpec& spec);
AttackSpec spec_from_json(const nlohmann::json& j);
nlohmann::json outcome_to_json(const AdvOutcome& out, int spec_index, int sample_index);
// Inverse of outcome_to_json; the pixel payload (x_adv) stays empty.
AdvOutcome outcome_from_json(const nlohmann::json& j);

// One JSON record per (spec, sample) pair, one per line, without the pixel
// payloads (those go to .spg tensors when requested).
void write_outcome_jsonl(std::ostream& os, const std::vector<SweepRun>& runs);

}  // namespace sabre::attacks
