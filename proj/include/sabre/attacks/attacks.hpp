#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sabre/attacks/types.hpp"

namespace sabre::attacks {

// --- fast gradient sign / fast gradient L2 -------------------------------
// One batched gradient for the whole batch, so every outcome costs exactly
// one gradient unit. targets[i] < 0 means untargeted for that sample.
std::vector<AdvOutcome> fgsm_batch(const nn::DifferentiableClassifier& model, const Mat& batch,
                                   const std::vector<int>& labels, const std::vector<int>& targets,
                                   const AttackSpec& spec);
// Single-sample convenience wrapper; throws ZeroGradientError when the L2
// variant meets an exactly-zero gradient.
AdvOutcome fgsm(const nn::DifferentiableClassifier& model, const std::vector<double>& x, int label,
                const AttackSpec& spec, std::optional<int> target = std::nullopt);

// --- basic iterative method (variants a and b) ---------------------------
// Batched like fgsm; per-sample gradient_cost is the number of iterations
// that sample's trajectory consumed (variant a freezes a sample at its first
// success, variant b always runs max_iter).
std::vector<AdvOutcome> bim_batch(const nn::DifferentiableClassifier& model, const Mat& batch,
                                  const std::vector<int>& labels, const std::vector<int>& targets,
                                  const AttackSpec& spec);
AdvOutcome bim(const nn::DifferentiableClassifier& model, const std::vector<double>& x, int label,
               const AttackSpec& spec, std::optional<int> target = std::nullopt);
double bim_step_size(const AttackSpec& spec);

// --- Jacobian saliency map attack ----------------------------------------
// Throws StalledAttackError when the saliency map is identically zero.
AdvOutcome jsma(const nn::DifferentiableClassifier& model, const std::vector<double>& x, int label,
                int target, const AttackSpec& spec);
// Exposed for testing: saliency map for increasing-intensity perturbations.
// jac is (classes x dim), kind Softmax. admissible[i] == false forces 0.
std::vector<double> jsma_saliency(const Mat& jac, int target,
                                  const std::vector<bool>& admissible);
// Iteration budget scaled from the pixel count: (dim * gamma * 255) / n with
// the scaling factor n in [40, 200] (step 40 grid).
int jsma_iteration_budget(int dim, double gamma, int n);

// --- Carlini-Wagner L2 ---------------------------------------------------
AdvOutcome cw_l2(const nn::DifferentiableClassifier& model, const std::vector<double>& x, int label,
                 const AttackSpec& spec, std::optional<int> target = std::nullopt);
// Change-of-variable helpers (tanh box reparameterization), exposed for tests.
std::vector<double> cw_to_w(const std::vector<double>& x_pixels);
std::vector<double> cw_from_w(const std::vector<double>& w);

// --- DeepFool ------------------------------------------------------------
AdvOutcome deepfool(const nn::DifferentiableClassifier& model, const std::vector<double>& x,
                    int label, const AttackSpec& spec, std::optional<int> target = std::nullopt);

// --- box-constrained L-BFGS ----------------------------------------------
struct BoxLbfgsOptions {
  int max_iter = 100;
  int memory = 5;
  double tol = 1e-9;   // stop when the projected gradient norm drops below
  double lo = 0.0;
  double hi = 255.0;
};
struct BoxLbfgsResult {
  std::vector<double> x;
  double fval = 0.0;
  int iterations = 0;
  int grad_evals = 0;
};
// Minimizes fg over the [lo, hi] box. fg(x, g) returns f(x) and, when g is
// non-null, writes the gradient into *g.
BoxLbfgsResult minimize_box_lbfgs(
    const std::function<double(const std::vector<double>&, std::vector<double>*)>& fg,
    std::vector<double> x0, const BoxLbfgsOptions& opt);

AdvOutcome lbfgs_attack(const nn::DifferentiableClassifier& model, const std::vector<double>& x,
                        int label, int target, const AttackSpec& spec);

// Dispatches on spec.algorithm. target < 0 means untargeted; targeted
// algorithms (jsma, lbfgs) then throw ConfigError.
AdvOutcome run_attack(const nn::DifferentiableClassifier& model, const std::vector<double>& x,
                      int label, int target, const AttackSpec& spec);

}  // namespace sabre::attacks
