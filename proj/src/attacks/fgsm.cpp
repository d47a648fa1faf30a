#include <algorithm>
#include <cmath>

#include "sabre/attacks/attacks.hpp"
#include "sabre/errors.hpp"

namespace sabre::attacks {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::vector<AdvOutcome> fgsm_batch(const nn::DifferentiableClassifier& model, const Mat& batch,
                                   const std::vector<int>& labels, const std::vector<int>& targets,
                                   const AttackSpec& spec) {
  validate(spec);
  if (batch.rows == 0) return {};
  if (static_cast<int>(labels.size()) != batch.rows ||
      static_cast<int>(targets.size()) != batch.rows)
    throw InterfaceError("fgsm_batch: labels/targets must match batch rows");
  if (batch.cols != model.input_dim())
    throw InterfaceError("fgsm_batch: batch width != model input_dim");

  // Ascend the loss at the true label, or descend it at the target; the
  // latter is the same step with the sign flipped.
  std::vector<int> loss_labels(batch.rows);
  for (int r = 0; r < batch.rows; ++r) {
    if (spec.targeted) {
      if (targets[r] < 0) throw InterfaceError("fgsm_batch: targeted spec needs target labels");
      loss_labels[r] = targets[r];
    } else {
      loss_labels[r] = labels[r];
    }
  }
  const Mat g = model.grad_input(batch, loss_labels, {nn::LossKind::CrossEntropy, 0.0});
  const double direction = spec.targeted ? -1.0 : 1.0;

  std::vector<AdvOutcome> outcomes(batch.rows);
  for (int r = 0; r < batch.rows; ++r) {
    AdvOutcome& out = outcomes[r];
    out.original_class = labels[r];
    if (spec.targeted) out.target_class = targets[r];
    out.gradient_cost = 1.0;
    out.iterations = 1;

    std::vector<double> x(batch.cols), step(batch.cols, 0.0);
    for (int c = 0; c < batch.cols; ++c) x[c] = batch(r, c);

    if (spec.norm == Norm::LINF) {
      for (int c = 0; c < batch.cols; ++c)
        step[c] = direction * spec.epsilon * sign(g(r, c));
    } else {  // L2
      double sq = 0.0;
      for (int c = 0; c < batch.cols; ++c) sq += g(r, c) * g(r, c);
      const double gn = std::sqrt(sq);
      if (gn == 0.0) {
        out.x_adv = x;
        out.stalled = true;
        fill_delta_norms(out, x);
        out.predicted_class = nn::predict(model, x).first;
        continue;
      }
      for (int c = 0; c < batch.cols; ++c)
        step[c] = direction * spec.epsilon * g(r, c) / gn;
    }
    std::vector<double> cand(batch.cols);
    for (int c = 0; c < batch.cols; ++c) cand[c] = x[c] + step[c];
    out.x_adv = clip_region(cand, x, spec.epsilon);
    fill_delta_norms(out, x);
    out.success = judge_success(model, out.x_adv, labels[r],
                                spec.targeted ? std::optional<int>(targets[r]) : std::nullopt,
                                spec, &out.predicted_class);
  }
  return outcomes;
}

AdvOutcome fgsm(const nn::DifferentiableClassifier& model, const std::vector<double>& x, int label,
                const AttackSpec& spec, std::optional<int> target) {
  Mat batch(1, static_cast<int>(x.size()));
  batch.v = x;
  auto outs = fgsm_batch(model, batch, {label}, {target.value_or(-1)}, spec);
  if (outs[0].stalled)
    throw ZeroGradientError("fgsm: gradient is exactly zero, l2 direction undefined");
  return outs[0];
}

}  // namespace sabre::attacks
