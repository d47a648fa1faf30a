#include <algorithm>
#include <cmath>

#include "sabre/attacks/attacks.hpp"
#include "sabre/errors.hpp"
#include "sabre/nn/classifier.hpp"

namespace sabre::attacks {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Success rule evaluated from one row of precomputed logits; mirrors
// judge_success.
bool judge_from_logits(const std::vector<double>& logits, int label, int target,
                       const AttackSpec& spec, int* pred_out) {
  const auto p = nn::softmax_row(logits);
  int pred = 0;
  for (int j = 1; j < static_cast<int>(p.size()); ++j)
    if (p[j] > p[pred]) pred = j;
  *pred_out = pred;
  bool ok = spec.targeted ? (pred == target) : (pred != label);
  if (ok && spec.enforce_confidence && p[pred] < spec.confidence_threshold) ok = false;
  return ok;
}

}  // namespace

double bim_step_size(const AttackSpec& spec) {
  return spec.epsilon / std::max(4.0, spec.max_iter / 2.0);
}

std::vector<AdvOutcome> bim_batch(const nn::DifferentiableClassifier& model, const Mat& batch,
                                  const std::vector<int>& labels, const std::vector<int>& targets,
                                  const AttackSpec& spec) {
  validate(spec);
  if (batch.rows == 0) return {};
  if (static_cast<int>(labels.size()) != batch.rows ||
      static_cast<int>(targets.size()) != batch.rows)
    throw InterfaceError("bim_batch: labels/targets must match batch rows");
  if (batch.cols != model.input_dim())
    throw InterfaceError("bim_batch: batch width != model input_dim");

  const bool variant_a = spec.algorithm == Algorithm::BIM_A;
  const double alpha = bim_step_size(spec);
  const double direction = spec.targeted ? -1.0 : 1.0;

  std::vector<int> loss_labels(batch.rows);
  std::vector<AdvOutcome> outcomes(batch.rows);
  for (int r = 0; r < batch.rows; ++r) {
    if (spec.targeted && targets[r] < 0)
      throw InterfaceError("bim_batch: targeted spec needs target labels");
    loss_labels[r] = spec.targeted ? targets[r] : labels[r];
    outcomes[r].original_class = labels[r];
    if (spec.targeted) outcomes[r].target_class = targets[r];
  }

  Mat cur = batch;
  std::vector<bool> frozen(batch.rows, false);
  int active = batch.rows;

  for (int iter = 1; iter <= spec.max_iter && active > 0; ++iter) {
    const Mat g = model.grad_input(cur, loss_labels, {nn::LossKind::CrossEntropy, 0.0});
    for (int r = 0; r < batch.rows; ++r) {
      if (frozen[r]) continue;
      for (int c = 0; c < batch.cols; ++c) {
        const double x0 = batch(r, c);
        const double lo = std::max(0.0, x0 - spec.epsilon);
        const double hi = std::min(255.0, x0 + spec.epsilon);
        cur(r, c) = std::clamp(cur(r, c) + direction * alpha * sign(g(r, c)), lo, hi);
      }
      outcomes[r].iterations = iter;
      outcomes[r].gradient_cost = iter;
    }
    if (variant_a) {  // stop each sample at its first success
      const Mat logits = model.forward(cur);
      for (int r = 0; r < batch.rows; ++r) {
        if (frozen[r]) continue;
        std::vector<double> row(logits.cols);
        for (int c = 0; c < logits.cols; ++c) row[c] = logits(r, c);
        int pred = -1;
        if (judge_from_logits(row, labels[r], spec.targeted ? targets[r] : -1, spec, &pred)) {
          outcomes[r].success = true;
          outcomes[r].predicted_class = pred;
          frozen[r] = true;
          --active;
        }
      }
    }
  }

  // Unresolved samples (all of variant b, failures of variant a) are judged
  // at their final iterate.
  bool any_open = false;
  for (int r = 0; r < batch.rows; ++r)
    if (!frozen[r]) any_open = true;
  if (any_open) {
    const Mat logits = model.forward(cur);
    for (int r = 0; r < batch.rows; ++r) {
      if (frozen[r]) continue;
      std::vector<double> row(logits.cols);
      for (int c = 0; c < logits.cols; ++c) row[c] = logits(r, c);
      int pred = -1;
      outcomes[r].success =
          judge_from_logits(row, labels[r], spec.targeted ? targets[r] : -1, spec, &pred);
      outcomes[r].predicted_class = pred;
    }
  }

  for (int r = 0; r < batch.rows; ++r) {
    std::vector<double> x(batch.cols), xa(batch.cols);
    for (int c = 0; c < batch.cols; ++c) {
      x[c] = batch(r, c);
      xa[c] = cur(r, c);
    }
    outcomes[r].x_adv = std::move(xa);
    fill_delta_norms(outcomes[r], x);
  }
  return outcomes;
}

AdvOutcome bim(const nn::DifferentiableClassifier& model, const std::vector<double>& x, int label,
               const AttackSpec& spec, std::optional<int> target) {
  Mat batch(1, static_cast<int>(x.size()));
  batch.v = x;
  return bim_batch(model, batch, {label}, {target.value_or(-1)}, spec)[0];
}

}  // namespace sabre::attacks
