#include <algorithm>
#include <cmath>

#include "sabre/attacks/attacks.hpp"
#include "sabre/errors.hpp"

namespace sabre::attacks {

std::vector<double> jsma_saliency(const Mat& jac, int target,
                                  const std::vector<bool>& admissible) {
  if (target < 0 || target >= jac.rows) throw InterfaceError("jsma_saliency: target out of range");
  if (static_cast<int>(admissible.size()) != jac.cols)
    throw InterfaceError("jsma_saliency: admissible mask size mismatch");
  std::vector<double> s(jac.cols, 0.0);
  for (int i = 0; i < jac.cols; ++i) {
    if (!admissible[i]) continue;
    const double a = jac(target, i);
    double b = 0.0;
    for (int j = 0; j < jac.rows; ++j)
      if (j != target) b += jac(j, i);
    // Increasing-intensity case rule: a pixel only helps if it raises the
    // target output and lowers the others.
    s[i] = (a < 0.0 || b > 0.0) ? 0.0 : a * std::abs(b);
  }
  return s;
}

int jsma_iteration_budget(int dim, double gamma, int n) {
  if (dim < 1) throw ConfigError("jsma_iteration_budget: dim must be >= 1");
  if (n < 40 || n > 200) throw ConfigError("jsma_iteration_budget: scaling factor must lie in [40, 200]");
  if (!(gamma > 0.0 && gamma <= 1.5 / 255.0))
    throw ConfigError("jsma_iteration_budget: gamma must lie in (0, 1.5/255]");
  const long it = std::lround(dim * gamma * 255.0 / n);
  return static_cast<int>(std::max(1L, it));
}

AdvOutcome jsma(const nn::DifferentiableClassifier& model, const std::vector<double>& x, int label,
                int target, const AttackSpec& spec) {
  validate(spec);
  if (spec.algorithm != Algorithm::JSMA) throw ConfigError("jsma: spec.algorithm mismatch");
  if (static_cast<int>(x.size()) != model.input_dim())
    throw InterfaceError("jsma: input size != model input_dim");
  if (target < 0 || target >= model.classes() || target == label)
    throw InterfaceError("jsma: target must be a class other than the original label");

  AdvOutcome out;
  out.original_class = label;
  out.target_class = target;
  out.x_adv = x;

  if (judge_success(model, out.x_adv, label, target, spec, &out.predicted_class)) {
    out.success = true;
    fill_delta_norms(out, x);
    return out;
  }

  // Per-iteration pixel displacement: gamma caps the total distortion mass
  // (gamma * 255 mean intensity change per pixel across the image) and the
  // iteration budget divides that mass into per-step displacements, so the
  // step is the inverse of the iteration-budget formula, clamped to the
  // scaling-factor range the budgets are drawn from.
  const double mass = static_cast<double>(model.input_dim()) * spec.gamma * 255.0;
  const double step = std::clamp(mass / spec.max_iter, 40.0, 200.0);
  double spent = 0.0;  // applied distortion mass; gamma caps the total
  std::vector<bool> admissible(x.size());
  for (int iter = 1; iter <= spec.max_iter && spent + step <= mass; ++iter) {
    const Mat jac = model.jacobian_input(out.x_adv, nn::JacobianKind::Softmax);
    out.gradient_cost += static_cast<double>(model.jacobian_charge());
    for (std::size_t i = 0; i < x.size(); ++i) admissible[i] = out.x_adv[i] < 255.0;
    const std::vector<double> s = jsma_saliency(jac, target, admissible);
    int best = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i] > s[best]) best = static_cast<int>(i);
    if (!(s[best] > 0.0)) {
      throw StalledAttackError("jsma: saliency map is identically zero after " +
                               std::to_string(iter - 1) + " iterations");
    }
    const double before = out.x_adv[best];
    out.x_adv[best] = std::min(255.0, out.x_adv[best] + step);
    spent += out.x_adv[best] - before;
    out.iterations = iter;
    if (judge_success(model, out.x_adv, label, target, spec, &out.predicted_class)) {
      out.success = true;
      break;
    }
  }
  fill_delta_norms(out, x);
  return out;
}

}  // namespace sabre::attacks
