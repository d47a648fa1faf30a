#include <algorithm>
#include <cmath>
#include <limits>

#include "sabre/attacks/attacks.hpp"
#include "sabre/errors.hpp"

namespace sabre::attacks {

namespace {

constexpr double kClampEps = 1e-6;   // stabilization clamp before arctanh
constexpr double kLearningRate = 0.01;
constexpr double kInitialC = 1.0;

// Hinge objective value from one row of logits: targeted pushes the target
// logit above the runner-up, non-targeted pushes the original logit below.
double hinge_value(const std::vector<double>& logits, int ref, bool targeted, double kappa) {
  double other = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < static_cast<int>(logits.size()); ++j)
    if (j != ref) other = std::max(other, logits[j]);
  const double margin = targeted ? other - logits[ref] : logits[ref] - other;
  return std::max(margin, -kappa);
}

}  // namespace

std::vector<double> cw_to_w(const std::vector<double>& x_pixels) {
  std::vector<double> w(x_pixels.size());
  for (std::size_t i = 0; i < x_pixels.size(); ++i) {
    const double x01 = std::clamp(x_pixels[i] / 255.0, kClampEps, 1.0 - kClampEps);
    w[i] = std::atanh(2.0 * x01 - 1.0);
  }
  return w;
}

std::vector<double> cw_from_w(const std::vector<double>& w) {
  std::vector<double> x(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) x[i] = 255.0 * (std::tanh(w[i]) + 1.0) / 2.0;
  return x;
}

AdvOutcome cw_l2(const nn::DifferentiableClassifier& model, const std::vector<double>& x, int label,
                 const AttackSpec& spec, std::optional<int> target) {
  validate(spec);
  if (spec.algorithm != Algorithm::CW_L2) throw ConfigError("cw_l2: spec.algorithm mismatch");
  if (static_cast<int>(x.size()) != model.input_dim())
    throw InterfaceError("cw_l2: input size != model input_dim");
  if (spec.targeted && (!target || *target < 0 || *target >= model.classes() || *target == label))
    throw InterfaceError("cw_l2: targeted spec needs a target class != original label");

  const int dim = static_cast<int>(x.size());
  const std::vector<double> w0 = cw_to_w(x);
  const std::vector<double> x_ref = cw_from_w(w0);  // distance anchor, == x inside the clamp

  AdvOutcome out;
  out.original_class = label;
  if (spec.targeted) out.target_class = target;

  const int ref_label = spec.targeted ? *target : label;
  const nn::LossSpec hinge_loss{spec.targeted ? nn::LossKind::CwTargeted
                                              : nn::LossKind::CwUntargeted,
                                spec.kappa};

  double best_l2 = std::numeric_limits<double>::infinity();
  std::vector<double> best_adv;          // smallest-l2 success across all c runs
  double best_effort_f = std::numeric_limits<double>::infinity();
  std::vector<double> best_effort;       // most-adversarial iterate seen, for failures

  double c = kInitialC;
  double c_lo = 0.0;
  double c_hi = std::numeric_limits<double>::infinity();

  Mat row(1, dim);
  const int stall_window = std::max(10, spec.max_iter / 10);

  for (int step = 0; step < spec.c_search_steps; ++step) {
    std::vector<double> w = w0;
    bool run_success = false;
    double run_best_obj = std::numeric_limits<double>::infinity();
    int since_improve = 0;

    for (int it = 0; it < spec.max_iter; ++it) {
      const std::vector<double> cur = cw_from_w(w);
      row.v = cur;

      const Mat logits = model.forward(row);
      std::vector<double> lrow(logits.cols);
      for (int j = 0; j < logits.cols; ++j) lrow[j] = logits(0, j);
      const double fval = hinge_value(lrow, ref_label, spec.targeted, spec.kappa);

      double dist01_sq = 0.0;
      for (int i = 0; i < dim; ++i) {
        const double d01 = (cur[i] - x_ref[i]) / 255.0;
        dist01_sq += d01 * d01;
      }
      const double obj = dist01_sq + c * fval;

      int pred = -1;
      if (judge_success(model, cur, label, target, spec, &pred)) {
        run_success = true;
        double sq = 0.0;
        for (int i = 0; i < dim; ++i) sq += (cur[i] - x[i]) * (cur[i] - x[i]);
        if (std::sqrt(sq) < best_l2) {
          best_l2 = std::sqrt(sq);
          best_adv = cur;
          out.predicted_class = pred;
        }
      }
      if (fval < best_effort_f) {
        best_effort_f = fval;
        best_effort = cur;
      }

      if (obj < run_best_obj - 1e-9 * (1.0 + std::abs(obj))) {
        run_best_obj = obj;
        since_improve = 0;
      } else if (++since_improve > stall_window) {
        break;  // stagnated at this c
      }

      // One batch-gradient unit: d(hinge)/d(pixels) through the model. The
      // descent step is 0.01 per coordinate along the gradient sign — raw
      // gradients through the tanh reparametrization are orders of magnitude
      // too small for a fixed-step plain-descent loop to ever cross a
      // decision boundary inside the iteration budgets.
      const Mat gf = model.grad_input(row, {ref_label}, hinge_loss);
      out.gradient_cost += 1.0;
      for (int i = 0; i < dim; ++i) {
        const double sech2 = 1.0 - std::tanh(w[i]) * std::tanh(w[i]);
        const double dxdw01 = sech2 / 2.0;                            // d x01 / d w
        const double ddist = 2.0 * (cur[i] - x_ref[i]) / 255.0;       // d dist / d x01
        const double dfd01 = gf(0, i) * 255.0;                        // d f / d x01
        const double g = (ddist + c * dfd01) * dxdw01;
        if (g > 0.0)
          w[i] -= kLearningRate;
        else if (g < 0.0)
          w[i] += kLearningRate;
      }
      out.iterations += 1;
    }
    if (run_success) {
      c_hi = c;  // success: bisect down looking for a smaller distortion
      c = (c_lo + c_hi) / 2.0;
    } else {
      c_lo = c;  // failure: more weight on the adversarial term
      c = std::isinf(c_hi) ? c * 2.0 : (c_lo + c_hi) / 2.0;
    }
  }

  if (!best_adv.empty()) {
    out.success = true;
    out.x_adv = std::move(best_adv);
  } else {
    out.success = false;
    out.x_adv = best_effort.empty() ? x : std::move(best_effort);
    out.predicted_class = nn::predict(model, out.x_adv).first;
  }
  fill_delta_norms(out, x);
  return out;
}

}  // namespace sabre::attacks
