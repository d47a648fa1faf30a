#include "sabre/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "sabre/errors.hpp"

namespace sabre::eval {

namespace {

// Sort by budget and merge points sharing one.
std::vector<BudgetPoint> canonicalize(std::vector<BudgetPoint> pts) {
  for (const BudgetPoint& p : pts) {
    if (p.total <= 0) throw InterfaceError("fooling_auc: budget point with no outcomes");
    if (p.successes < 0 || p.successes > p.total)
      throw InterfaceError("fooling_auc: successes outside [0, total]");
    if (!std::isfinite(p.budget)) throw InterfaceError("fooling_auc: non-finite budget");
  }
  std::sort(pts.begin(), pts.end(),
            [](const BudgetPoint& a, const BudgetPoint& b) { return a.budget < b.budget; });
  std::vector<BudgetPoint> merged;
  for (const BudgetPoint& p : pts) {
    if (!merged.empty() && merged.back().budget == p.budget) {
      merged.back().successes += p.successes;
      merged.back().total += p.total;
    } else {
      merged.push_back(p);
    }
  }
  return merged;
}

}  // namespace

double fooling_auc(std::vector<BudgetPoint> points) {
  const std::vector<BudgetPoint> pts = canonicalize(std::move(points));
  if (pts.size() < 2)
    throw DegenerateInputError("fooling_auc: need at least two distinct budget points");
  const int k = static_cast<int>(pts.size());
  double area = 0.0;
  for (int i = 0; i + 1 < k; ++i) {
    const double x0 = static_cast<double>(i) / (k - 1);
    const double x1 = static_cast<double>(i + 1) / (k - 1);
    const double y0 = static_cast<double>(pts[i].successes) / pts[i].total;
    const double y1 = static_cast<double>(pts[i + 1].successes) / pts[i + 1].total;
    area += (x1 - x0) * (y0 + y1) / 2.0;
  }
  return area;
}

AucCell fooling_auc_or_rate(std::vector<BudgetPoint> points) {
  const std::vector<BudgetPoint> pts = canonicalize(std::move(points));
  AucCell cell;
  if (pts.size() >= 2) {
    std::vector<BudgetPoint> copy(pts.begin(), pts.end());
    cell.value = fooling_auc(std::move(copy));
    cell.degenerate = false;
  } else if (pts.size() == 1) {
    cell.value = static_cast<double>(pts[0].successes) / pts[0].total;
    cell.degenerate = true;
  } else {
    throw DegenerateInputError("fooling_auc_or_rate: no budget points");
  }
  return cell;
}

CostSummary cost_summary(const std::vector<double>& costs) {
  if (costs.empty()) throw DegenerateInputError("cost_summary: empty outcome list");
  CostSummary s;
  std::vector<double> sorted = costs;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double c : sorted) {
    if (c < 0.0 || !std::isfinite(c)) throw InterfaceError("cost_summary: invalid gradient cost");
    sum += c;
  }
  s.mean = sum / sorted.size();
  const std::size_t n = sorted.size();
  s.median = (n % 2 == 1) ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  return s;
}

TransferMatrix transfer_matrix(const std::vector<std::string>& names,
                               const std::vector<const nn::DifferentiableClassifier*>& models,
                               const std::vector<std::vector<attacks::AdvOutcome>>& outcomes_per_source) {
  const int n = static_cast<int>(models.size());
  if (n < 2) throw ConfigError("transfer_matrix: need at least two models");
  if (static_cast<int>(names.size()) != n || static_cast<int>(outcomes_per_source.size()) != n)
    throw InterfaceError("transfer_matrix: names/outcomes must match model count");
  for (const auto* m : models)
    if (m == nullptr) throw InterfaceError("transfer_matrix: null model");

  TransferMatrix tm;
  tm.model_names = names;
  tm.ratio.assign(n, std::vector<std::optional<double>>(n));

  for (int i = 0; i < n; ++i) {
    std::vector<const attacks::AdvOutcome*> succ;
    for (const attacks::AdvOutcome& o : outcomes_per_source[i])
      if (o.success) succ.push_back(&o);

    tm.ratio[i][i] = 1.0;  // by construction, not by re-evaluation
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (succ.empty()) {
        tm.ratio[i][j] = std::nullopt;  // undefined, never zero
        continue;
      }
      int fooled = 0;
      for (const attacks::AdvOutcome* o : succ) {
        const int pred = nn::predict(*models[j], o->x_adv).first;
        if (pred != o->original_class) ++fooled;
      }
      tm.ratio[i][j] = static_cast<double>(fooled) / static_cast<double>(succ.size());
    }
  }
  return tm;
}

}  // namespace sabre::eval
