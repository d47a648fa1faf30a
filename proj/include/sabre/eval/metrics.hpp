#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sabre/attacks/sweep.hpp"

namespace sabre::eval {

// One point of a fooling-rate curve: an attack run at a fixed budget.
struct BudgetPoint {
  double budget = 0.0;
  int successes = 0;
  int total = 0;
};

// Area under the success-rate-vs-budget curve with budgets sorted ascending
// and mapped to evenly spaced positions on [0, 1]; duplicate budgets are
// merged first. Throws DegenerateInputError with fewer than two distinct
// budgets.
double fooling_auc(std::vector<BudgetPoint> points);

struct AucCell {
  double value = 0.0;    // AUC, or the raw success rate when degenerate
  bool degenerate = false;
};
// Like fooling_auc but a single budget point degrades to the flagged raw
// success rate instead of throwing.
AucCell fooling_auc_or_rate(std::vector<BudgetPoint> points);

struct CostSummary {
  double mean = 0.0;
  double median = 0.0;
};
CostSummary cost_summary(const std::vector<double>& costs);  // non-empty

struct TransferMatrix {
  std::vector<std::string> model_names;
  // ratio[i][j]: fraction of model-i successes that also fool model j;
  // nullopt when model i produced no successful adversarial examples.
  std::vector<std::vector<std::optional<double>>> ratio;
};

// outcomes_per_source[i] are model i's attack outcomes; only successful ones
// enter the counts. "Fools model j" means j's prediction differs from the
// true label.
TransferMatrix transfer_matrix(const std::vector<std::string>& names,
                               const std::vector<const nn::DifferentiableClassifier*>& models,
                               const std::vector<std::vector<attacks::AdvOutcome>>& outcomes_per_source);

}  // namespace sabre::eval
