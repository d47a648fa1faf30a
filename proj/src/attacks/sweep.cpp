#include "sabre/attacks/sweep.hpp"

#include <ostream>

#include "sabre/errors.hpp"

namespace sabre::attacks {

AdvOutcome run_attack(const nn::DifferentiableClassifier& model, const std::vector<double>& x,
                      int label, int target, const AttackSpec& spec) {
  const std::optional<int> t = target >= 0 ? std::optional<int>(target) : std::nullopt;
  switch (spec.algorithm) {
    case Algorithm::FGSM: return fgsm(model, x, label, spec, t);
    case Algorithm::BIM_A:
    case Algorithm::BIM_B: return bim(model, x, label, spec, t);
    case Algorithm::JSMA:
      if (target < 0) throw ConfigError("run_attack: jsma needs a target label");
      return jsma(model, x, label, target, spec);
    case Algorithm::CW_L2: return cw_l2(model, x, label, spec, t);
    case Algorithm::DEEPFOOL: return deepfool(model, x, label, spec, t);
    case Algorithm::LBFGS:
      if (target < 0) throw ConfigError("run_attack: lbfgs needs a target label");
      return lbfgs_attack(model, x, label, target, spec);
  }
  throw ConfigError("run_attack: unknown algorithm");
}

int pick_target_label(std::uint64_t seed, int spec_index, int sample_index, int label,
                      int classes) {
  if (classes < 2) throw ConfigError("pick_target_label: need at least two classes");
  std::uint64_t h = seed ^ 0x74617267657473ULL;
  h = fnv1a64(&spec_index, sizeof(spec_index), h);
  h = fnv1a64(&sample_index, sizeof(sample_index), h);
  Rng rng(h);
  const int wrong = rng.uniform_int(classes - 1);
  return wrong >= label ? wrong + 1 : wrong;
}

std::vector<SweepRun> run_budget_sweep(nn::DifferentiableClassifier& model, const Mat& batch,
                                       const std::vector<int>& labels,
                                       const std::vector<AttackSpec>& grid, std::uint64_t seed,
                                       int workers) {
  if (grid.empty()) throw ConfigError("run_budget_sweep: empty spec grid");
  if (batch.rows == 0) throw ConfigError("run_budget_sweep: empty batch");
  if (static_cast<int>(labels.size()) != batch.rows)
    throw InterfaceError("run_budget_sweep: labels must match batch rows");
  if (batch.cols != model.input_dim())
    throw InterfaceError("run_budget_sweep: batch width != model input_dim");
  for (const AttackSpec& spec : grid) validate(spec);

  model.set_meter_batch_size(batch.rows);

  std::vector<SweepRun> runs;
  runs.reserve(grid.size());
  for (int s = 0; s < static_cast<int>(grid.size()); ++s) {
    SweepRun run;
    run.spec = grid[s];
    run.targets.resize(batch.rows, -1);
    if (run.spec.targeted)
      for (int i = 0; i < batch.rows; ++i)
        run.targets[i] = pick_target_label(seed, s, i, labels[i], model.classes());

    run.meter_before = model.gradient_meter();
    switch (run.spec.algorithm) {
      case Algorithm::FGSM:
        run.outcomes = fgsm_batch(model, batch, labels, run.targets, run.spec);
        break;
      case Algorithm::BIM_A:
      case Algorithm::BIM_B:
        run.outcomes = bim_batch(model, batch, labels, run.targets, run.spec);
        break;
      default: {
        run.outcomes.assign(batch.rows, AdvOutcome{});
        parallel_for(batch.rows, workers, [&](int i) {
          std::vector<double> x(batch.cols);
          for (int c = 0; c < batch.cols; ++c) x[c] = batch(i, c);
          try {
            run.outcomes[i] = run_attack(model, x, labels[i], run.targets[i], run.spec);
          } catch (const Error&) {
            AdvOutcome& out = run.outcomes[i];
            out.original_class = labels[i];
            if (run.spec.targeted) out.target_class = run.targets[i];
            out.x_adv = x;
            out.stalled = true;
            out.success = false;
            out.predicted_class = nn::predict(model, x).first;
            fill_delta_norms(out, x);
          }
        });
        break;
      }
    }
    run.meter_after = model.gradient_meter();
    runs.push_back(std::move(run));
  }
  return runs;
}

nlohmann::json spec_to_json(const AttackSpec& spec) {
  return {{"algorithm", algorithm_name(spec.algorithm)},
          {"targeted", spec.targeted},
          {"norm", norm_name(spec.norm)},
          {"epsilon", spec.epsilon},
          {"max_iter", spec.max_iter},
          {"kappa", spec.kappa},
          {"c_search_steps", spec.c_search_steps},
          {"gamma", spec.gamma},
          {"confidence_threshold", spec.confidence_threshold},
          {"enforce_confidence", spec.enforce_confidence}};
}

AttackSpec spec_from_json(const nlohmann::json& j) {
  AttackSpec spec;
  spec.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
  spec.targeted = j.value("targeted", spec.targeted);
  if (j.contains("norm")) spec.norm = norm_from_name(j.at("norm").get<std::string>());
  spec.epsilon = j.value("epsilon", spec.epsilon);
  spec.max_iter = j.value("max_iter", spec.max_iter);
  spec.kappa = j.value("kappa", spec.kappa);
  spec.c_search_steps = j.value("c_search_steps", spec.c_search_steps);
  spec.gamma = j.value("gamma", spec.gamma);
  spec.confidence_threshold = j.value("confidence_threshold", spec.confidence_threshold);
  spec.enforce_confidence = j.value("enforce_confidence", spec.enforce_confidence);
  validate(spec);
  return spec;
}

nlohmann::json outcome_to_json(const AdvOutcome& out, int spec_index, int sample_index) {
  nlohmann::json j = {{"spec_index", spec_index},
                      {"sample_index", sample_index},
                      {"original_class", out.original_class},
                      {"predicted_class", out.predicted_class},
                      {"success", out.success},
                      {"l0", out.l0},
                      {"l2", out.l2},
                      {"linf", out.linf},
                      {"gradient_cost", out.gradient_cost},
                      {"iterations", out.iterations},
                      {"stalled", out.stalled}};
  if (out.target_class)
    j["target_class"] = *out.target_class;
  else
    j["target_class"] = nullptr;
  return j;
}

AdvOutcome outcome_from_json(const nlohmann::json& j) {
  AdvOutcome out;
  out.original_class = j.at("original_class").get<int>();
  out.predicted_class = j.at("predicted_class").get<int>();
  if (j.contains("target_class") && !j.at("target_class").is_null())
    out.target_class = j.at("target_class").get<int>();
  out.success = j.at("success").get<bool>();
  out.l0 = j.at("l0").get<double>();
  out.l2 = j.at("l2").get<double>();
  out.linf = j.at("linf").get<double>();
  out.gradient_cost = j.at("gradient_cost").get<double>();
  out.iterations = j.at("iterations").get<int>();
  out.stalled = j.at("stalled").get<bool>();
  return out;
}

void write_outcome_jsonl(std::ostream& os, const std::vector<SweepRun>& runs) {
  for (int s = 0; s < static_cast<int>(runs.size()); ++s) {
    const SweepRun& run = runs[s];
    for (int i = 0; i < static_cast<int>(run.outcomes.size()); ++i) {
      nlohmann::json j = outcome_to_json(run.outcomes[i], s, i);
      j["spec"] = spec_to_json(run.spec);
      os << j.dump() << "\n";
    }
  }
}

}  // namespace sabre::attacks
