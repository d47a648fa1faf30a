#include <algorithm>
#include <cmath>
#include <limits>

#include "sabre/attacks/attacks.hpp"
#include "sabre/errors.hpp"

namespace sabre::attacks {

namespace {

constexpr double kOvershoot = 0.02;

std::vector<double> overshoot_and_clip(const std::vector<double>& x,
                                       const std::vector<double>& cur) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = std::clamp(x[i] + (1.0 + kOvershoot) * (cur[i] - x[i]), 0.0, 255.0);
  return out;
}

}  // namespace

AdvOutcome deepfool(const nn::DifferentiableClassifier& model, const std::vector<double>& x,
                    int label, const AttackSpec& spec, std::optional<int> target) {
  validate(spec);
  if (spec.algorithm != Algorithm::DEEPFOOL) throw ConfigError("deepfool: spec.algorithm mismatch");
  if (static_cast<int>(x.size()) != model.input_dim())
    throw InterfaceError("deepfool: input size != model input_dim");
  if (spec.targeted && (!target || *target < 0 || *target >= model.classes() || *target == label))
    throw InterfaceError("deepfool: targeted spec needs a target class != original label");

  const int dim = static_cast<int>(x.size());
  const int classes = model.classes();

  AdvOutcome out;
  out.original_class = label;
  if (spec.targeted) out.target_class = target;

  // cur accumulates the exact (pre-overshoot) boundary projections; the
  // overshoot is applied when judging and in the final product.
  std::vector<double> cur = x;
  Mat row(1, dim);
  bool done = false;

  for (int it = 0; it < spec.max_iter && !done; ++it) {
    int pred = -1;
    if (judge_success(model, overshoot_and_clip(x, cur), label, target, spec, &pred)) {
      out.predicted_class = pred;
      out.success = true;
      done = true;
      break;
    }

    row.v = cur;
    const Mat logits = model.forward(row);
    const Mat jac = model.jacobian_input(cur, nn::JacobianKind::Logits);
    out.gradient_cost += static_cast<double>(model.jacobian_charge());
    out.iterations = it + 1;

    // Linearized decision boundaries: f'_k = f_k - f_label with gradient
    // w'_k = w_k - w_label. Project onto the nearest one (or the target's).
    int k_star = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int k = 0; k < classes; ++k) {
      if (k == label) continue;
      if (spec.targeted && k != *target) continue;
      double wsq = 0.0;
      for (int i = 0; i < dim; ++i) {
        const double wk = jac(k, i) - jac(label, i);
        wsq += wk * wk;
      }
      if (wsq == 0.0) continue;
      const double fk = std::abs(logits(0, k) - logits(0, label));
      const double ratio = fk / std::sqrt(wsq);
      if (ratio < best_ratio) {
        best_ratio = ratio;
        k_star = k;
      }
    }
    if (k_star < 0)
      throw ZeroGradientError("deepfool: all boundary gradients are exactly zero");

    double wsq = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double wk = jac(k_star, i) - jac(label, i);
      wsq += wk * wk;
    }
    const double fk = std::abs(logits(0, k_star) - logits(0, label));
    const double scale = fk / wsq;
    for (int i = 0; i < dim; ++i)
      cur[i] += scale * (jac(k_star, i) - jac(label, i));
  }

  out.x_adv = overshoot_and_clip(x, cur);
  if (!done) {
    int pred = -1;
    out.success = judge_success(model, out.x_adv, label, target, spec, &pred);
    out.predicted_class = pred;
  }
  fill_delta_norms(out, x);
  return out;
}

}  // namespace sabre::attacks
