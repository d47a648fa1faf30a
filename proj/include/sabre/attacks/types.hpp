#pragma once

#include <optional>
#include <vector>

#include "sabre/nn/classifier.hpp"

namespace sabre::attacks {

enum class Algorithm { LBFGS, FGSM, BIM_A, BIM_B, JSMA, CW_L2, DEEPFOOL };
enum class Norm { L0, L2, LINF };

const char* algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& s);
const char* norm_name(Norm n);
Norm norm_from_name(const std::string& s);

struct AttackSpec {
  Algorithm algorithm = Algorithm::FGSM;
  bool targeted = false;
  Norm norm = Norm::LINF;
  double epsilon = 0.0;        // total distortion bound, pixel units
  int max_iter = 10;
  double kappa = 0.0;          // CW confidence margin
  int c_search_steps = 3;      // CW / L-BFGS outer search steps
  double gamma = 1.0 / 255.0;  // JSMA per-step intensity fraction
  double confidence_threshold = 0.65;
  bool enforce_confidence = false;  // require softmax confidence on success
};

void validate(const AttackSpec& spec);

// The attack's budget knob, used as the x-axis of fooling-rate curves:
// epsilon for FGSM/BIM, iterations for the rest.
double spec_budget(const AttackSpec& spec);

struct AdvOutcome {
  std::vector<double> x_adv;
  int original_class = -1;
  int predicted_class = -1;
  std::optional<int> target_class;
  bool success = false;
  double l0 = 0.0;  // changed-pixel count
  double l2 = 0.0;
  double linf = 0.0;
  double gradient_cost = 0.0;  // batch gradient units spent on this sample
  int iterations = 0;
  bool stalled = false;  // zero gradient / zero saliency map
};

// Eq.-6-style median projection into [max(0, x - delta), min(M, x + delta)].
std::vector<double> clip_region(const std::vector<double>& candidate,
                                const std::vector<double>& original, double delta,
                                double max_intensity = 255.0);

void fill_delta_norms(AdvOutcome& out, const std::vector<double>& x_original);

// Evaluates the success rule on x_adv: prediction == target (targeted) or
// != original (non-targeted), optionally also demanding the configured
// softmax confidence.
bool judge_success(const nn::DifferentiableClassifier& model, const std::vector<double>& x_adv,
                   int original_class, std::optional<int> target, const AttackSpec& spec,
                   int* predicted_out);

}  // namespace sabre::attacks
