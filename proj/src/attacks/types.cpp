#include "sabre/attacks/types.hpp"

#include <algorithm>
#include <cmath>

#include "sabre/errors.hpp"
#include "sabre/transforms/types.hpp"

namespace sabre::attacks {

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::LBFGS: return "lbfgs";
    case Algorithm::FGSM: return "fgsm";
    case Algorithm::BIM_A: return "bim_a";
    case Algorithm::BIM_B: return "bim_b";
    case Algorithm::JSMA: return "jsma";
    case Algorithm::CW_L2: return "cw_l2";
    case Algorithm::DEEPFOOL: return "deepfool";
  }
  throw ConfigError("unknown attack algorithm enum value");
}

Algorithm algorithm_from_name(const std::string& s) {
  if (s == "lbfgs") return Algorithm::LBFGS;
  if (s == "fgsm") return Algorithm::FGSM;
  if (s == "bim_a") return Algorithm::BIM_A;
  if (s == "bim_b") return Algorithm::BIM_B;
  if (s == "jsma") return Algorithm::JSMA;
  if (s == "cw_l2") return Algorithm::CW_L2;
  if (s == "deepfool") return Algorithm::DEEPFOOL;
  throw ConfigError("unknown attack algorithm name: " + s);
}

const char* norm_name(Norm n) {
  switch (n) {
    case Norm::L0: return "l0";
    case Norm::L2: return "l2";
    case Norm::LINF: return "linf";
  }
  throw ConfigError("unknown norm enum value");
}

Norm norm_from_name(const std::string& s) {
  if (s == "l0") return Norm::L0;
  if (s == "l2") return Norm::L2;
  if (s == "linf") return Norm::LINF;
  throw ConfigError("unknown norm name: " + s);
}

void validate(const AttackSpec& spec) {
  if (spec.epsilon < 0.0 || !std::isfinite(spec.epsilon))
    throw ConfigError("attack epsilon must be finite and >= 0");
  if (spec.max_iter < 1) throw ConfigError("attack max_iter must be >= 1");
  if (spec.kappa < 0.0) throw ConfigError("attack kappa must be >= 0");
  if (spec.c_search_steps < 1) throw ConfigError("attack c_search_steps must be >= 1");
  if (!(spec.gamma > 0.0 && spec.gamma <= 1.5 / 255.0))
    throw ConfigError("attack gamma must lie in (0, 1.5/255]");
  if (spec.confidence_threshold < 0.0 || spec.confidence_threshold > 1.0)
    throw ConfigError("attack confidence_threshold must lie in [0, 1]");
  switch (spec.algorithm) {
    case Algorithm::FGSM:
      if (spec.norm == Norm::L0) throw ConfigError("fgsm supports linf or l2 norms only");
      if (spec.epsilon <= 0.0) throw ConfigError("fgsm requires epsilon > 0");
      break;
    case Algorithm::BIM_A:
    case Algorithm::BIM_B:
      if (spec.norm != Norm::LINF) throw ConfigError("bim is an linf attack");
      if (spec.epsilon <= 0.0) throw ConfigError("bim requires epsilon > 0");
      break;
    case Algorithm::JSMA:
      if (!spec.targeted) throw ConfigError("jsma is a targeted attack");
      if (spec.norm != Norm::L0) throw ConfigError("jsma is an l0 attack");
      break;
    case Algorithm::CW_L2:
      if (spec.norm != Norm::L2) throw ConfigError("cw_l2 is an l2 attack");
      break;
    case Algorithm::DEEPFOOL:
      if (spec.norm != Norm::L2) throw ConfigError("deepfool is an l2 attack");
      if (spec.max_iter < 100 || spec.max_iter > 1000)
        throw ConfigError("deepfool max_iter must lie in [100, 1000]");
      break;
    case Algorithm::LBFGS:
      if (!spec.targeted) throw ConfigError("lbfgs is a targeted attack");
      if (spec.norm != Norm::L2) throw ConfigError("lbfgs is an l2 attack");
      break;
  }
}

double spec_budget(const AttackSpec& spec) {
  switch (spec.algorithm) {
    case Algorithm::FGSM:
    case Algorithm::BIM_A:
    case Algorithm::BIM_B:
      return spec.epsilon;
    default:
      return static_cast<double>(spec.max_iter);
  }
}

std::vector<double> clip_region(const std::vector<double>& candidate,
                                const std::vector<double>& original, double delta,
                                double max_intensity) {
  if (candidate.size() != original.size())
    throw InterfaceError("clip_region: candidate/original size mismatch");
  std::vector<double> out(candidate.size());
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    const double lo = std::max(0.0, original[i] - delta);
    const double hi = std::min(max_intensity, original[i] + delta);
    out[i] = std::clamp(candidate[i], lo, hi);
  }
  return out;
}

void fill_delta_norms(AdvOutcome& out, const std::vector<double>& x_original) {
  if (out.x_adv.size() != x_original.size())
    throw InterfaceError("fill_delta_norms: size mismatch");
  double l0 = 0.0, sq = 0.0, linf = 0.0;
  for (std::size_t i = 0; i < x_original.size(); ++i) {
    const double d = out.x_adv[i] - x_original[i];
    if (d != 0.0) l0 += 1.0;
    sq += d * d;
    linf = std::max(linf, std::abs(d));
  }
  out.l0 = l0;
  out.l2 = std::sqrt(sq);
  out.linf = linf;
}

bool judge_success(const nn::DifferentiableClassifier& model, const std::vector<double>& x_adv,
                   int original_class, std::optional<int> target, const AttackSpec& spec,
                   int* predicted_out) {
  const auto [pred, conf] = nn::predict(model, x_adv);
  if (predicted_out != nullptr) *predicted_out = pred;
  bool ok = spec.targeted ? (target.has_value() && pred == *target) : (pred != original_class);
  if (ok && spec.enforce_confidence && conf < spec.confidence_threshold) ok = false;
  return ok;
}

}  // namespace sabre::attacks
