#include "sabre/cli/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "sabre/attacks/sweep.hpp"
#include "sabre/nn/checkpoint.hpp"

namespace sabre::cli {

namespace {

// Runs a validator and converts its exception into a violation message.
template <typename Fn>
void check(std::vector<std::string>& violations, const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    violations.push_back(field + ": " + e.what());
  }
}

transforms::MotherWavelet mother_from_name(const std::string& s) {
  if (s == "haar") return transforms::MotherWavelet::Haar;
  if (s == "mexican_hat") return transforms::MotherWavelet::MexicanHat;
  if (s == "complex_morlet") return transforms::MotherWavelet::ComplexMorlet;
  throw ConfigError("unknown mother wavelet: " + s);
}

}  // namespace

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["out_dir"] = cfg.out_dir;

  j["dataset"] = {{"kind", cfg.dataset_kind},
                  {"root", cfg.dataset_root},
                  {"manifest", cfg.manifest_path},
                  {"resample_hz", cfg.resample_hz},
                  {"augment_factors", cfg.augment_factors},
                  {"toy",
                   {{"classes", cfg.toy.classes},
                    {"clips_per_class", cfg.toy.clips_per_class},
                    {"sample_rate_hz", cfg.toy.sample_rate_hz},
                    {"duration_s", cfg.toy.duration_s},
                    {"folds", cfg.toy.folds},
                    {"noise_level", cfg.toy.noise_level},
                    {"seed", cfg.toy.seed}}}};

  j["representation"] = {
      {"kind", cfg.representation},
      {"stft",
       {{"n_fft", cfg.stft.n_fft}, {"win_length", cfg.stft.win_length}, {"hop", cfg.stft.hop}}},
      {"mfcc",
       {{"sample_rate_hz", cfg.mfcc.sample_rate_hz},
        {"n_mfcc", cfg.mfcc.n_mfcc},
        {"hop", cfg.mfcc.hop},
        {"n_mels", cfg.mfcc.n_mels},
        {"n_fft", cfg.mfcc.n_fft},
        {"ortho_dct", cfg.mfcc.ortho_dct},
        {"lifter_cf", cfg.mfcc.lifter_cf}}},
      {"dwt",
       {{"mother", transforms::mother_name(cfg.dwt.mother)},
        {"sample_rate_hz", cfg.dwt.sample_rate_hz},
        {"frame_len_s", cfg.dwt.frame_len_s},
        {"overlap_fraction", cfg.dwt.overlap_fraction},
        {"n_scales", cfg.dwt.n_scales},
        {"log_magnitude", cfg.dwt.log_magnitude}}}};

  j["model"] = nn::resnet_config_to_json(cfg.model);
  j["train"] = {{"lr", cfg.hyper.lr},
                {"momentum", cfg.hyper.momentum},
                {"weight_decay", cfg.hyper.weight_decay},
                {"batch_size", cfg.hyper.batch_size},
                {"max_epochs", cfg.hyper.max_epochs},
                {"patience", cfg.hyper.patience},
                {"seed", cfg.hyper.seed},
                {"cv_folds", cfg.cv_folds}};

  j["attacks"] = nlohmann::json::array();
  for (const attacks::AttackSpec& s : cfg.attack_grid) j["attacks"].push_back(attacks::spec_to_json(s));
  j["attack_sample_cap"] = cfg.attack_sample_cap;
  j["dump_adversarials"] = cfg.dump_adversarials;
  j["transfer"] = {{"seeds", cfg.transfer_seeds}, {"spec_index", cfg.transfer_spec_index}};
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j, std::vector<std::string>& violations) {
  // Partial configs overlay the documented defaults, so a one-line file like
  // {"out_dir": "runs/a"} still describes the standard toy pipeline.
  RunConfig cfg = default_toy_run_config();
  if (!j.is_object()) {
    violations.push_back("config: root must be a JSON object");
    return cfg;
  }

  check(violations, "seed", [&] { cfg.seed = j.value("seed", cfg.seed); });
  check(violations, "workers", [&] {
    cfg.workers = j.value("workers", cfg.workers);
    if (cfg.workers < 1) throw ConfigError("must be >= 1");
  });
  check(violations, "out_dir", [&] {
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    if (cfg.out_dir.empty()) throw ConfigError("must be non-empty");
  });

  const nlohmann::json ds = j.value("dataset", nlohmann::json::object());
  check(violations, "dataset.kind", [&] {
    cfg.dataset_kind = ds.value("kind", cfg.dataset_kind);
    if (cfg.dataset_kind != "toy" && cfg.dataset_kind != "manifest")
      throw ConfigError("must be \"toy\" or \"manifest\"");
  });
  cfg.dataset_root = ds.value("root", cfg.dataset_root);
  cfg.manifest_path = ds.value("manifest", cfg.manifest_path);
  if (cfg.dataset_kind == "manifest") {
    if (cfg.manifest_path.empty())
      violations.push_back("dataset.manifest: required for manifest datasets");
    else if (!std::filesystem::exists(cfg.manifest_path))
      violations.push_back("dataset.manifest: path does not exist: " + cfg.manifest_path);
    if (cfg.dataset_root.empty())
      violations.push_back("dataset.root: required for manifest datasets");
    else if (!std::filesystem::is_directory(cfg.dataset_root))
      violations.push_back("dataset.root: not a directory: " + cfg.dataset_root);
  }
  check(violations, "dataset.resample_hz", [&] {
    cfg.resample_hz = ds.value("resample_hz", cfg.resample_hz);
    if (cfg.resample_hz < 0) throw ConfigError("must be >= 0");
  });
  check(violations, "dataset.augment_factors", [&] {
    cfg.augment_factors = ds.value("augment_factors", cfg.augment_factors);
    for (double f : cfg.augment_factors)
      if (!(f > 0.0)) throw ConfigError("factors must be positive");
  });
  const nlohmann::json jt = ds.value("toy", nlohmann::json::object());
  check(violations, "dataset.toy", [&] {
    cfg.toy.classes = jt.value("classes", cfg.toy.classes);
    cfg.toy.clips_per_class = jt.value("clips_per_class", cfg.toy.clips_per_class);
    cfg.toy.sample_rate_hz = jt.value("sample_rate_hz", cfg.toy.sample_rate_hz);
    cfg.toy.duration_s = jt.value("duration_s", cfg.toy.duration_s);
    cfg.toy.folds = jt.value("folds", cfg.toy.folds);
    cfg.toy.noise_level = jt.value("noise_level", cfg.toy.noise_level);
    cfg.toy.seed = jt.value("seed", cfg.toy.seed);
    if (cfg.toy.classes < 2 || cfg.toy.classes > 4) throw ConfigError("classes must be 2..4");
    if (cfg.toy.clips_per_class < 1) throw ConfigError("clips_per_class must be >= 1");
    if (cfg.toy.sample_rate_hz < 1000) throw ConfigError("sample_rate_hz must be >= 1000");
    if (!(cfg.toy.duration_s > 0.0)) throw ConfigError("duration_s must be > 0");
    if (cfg.toy.folds < 1) throw ConfigError("folds must be >= 1");
  });

  const nlohmann::json rep = j.value("representation", nlohmann::json::object());
  check(violations, "representation.kind", [&] {
    cfg.representation = rep.value("kind", cfg.representation);
    if (cfg.representation != "stft" && cfg.representation != "mfcc" &&
        cfg.representation != "dwt")
      throw ConfigError("must be \"stft\", \"mfcc\" or \"dwt\"");
  });
  const nlohmann::json js = rep.value("stft", nlohmann::json::object());
  check(violations, "representation.stft", [&] {
    cfg.stft.n_fft = js.value("n_fft", cfg.stft.n_fft);
    cfg.stft.win_length = js.value("win_length", cfg.stft.win_length);
    cfg.stft.hop = js.value("hop", cfg.stft.hop);
    transforms::validate(cfg.stft);
  });
  const nlohmann::json jm = rep.value("mfcc", nlohmann::json::object());
  check(violations, "representation.mfcc", [&] {
    cfg.mfcc.sample_rate_hz = jm.value("sample_rate_hz", cfg.mfcc.sample_rate_hz);
    cfg.mfcc.n_mfcc = jm.value("n_mfcc", cfg.mfcc.n_mfcc);
    cfg.mfcc.hop = jm.value("hop", cfg.mfcc.hop);
    cfg.mfcc.n_mels = jm.value("n_mels", cfg.mfcc.n_mels);
    cfg.mfcc.n_fft = jm.value("n_fft", cfg.mfcc.n_fft);
    cfg.mfcc.ortho_dct = jm.value("ortho_dct", cfg.mfcc.ortho_dct);
    cfg.mfcc.lifter_cf = jm.value("lifter_cf", cfg.mfcc.lifter_cf);
    transforms::validate(cfg.mfcc);
  });
  const nlohmann::json jd = rep.value("dwt", nlohmann::json::object());
  check(violations, "representation.dwt", [&] {
    if (jd.contains("mother")) cfg.dwt.mother = mother_from_name(jd.at("mother").get<std::string>());
    cfg.dwt.sample_rate_hz = jd.value("sample_rate_hz", cfg.dwt.sample_rate_hz);
    cfg.dwt.frame_len_s = jd.value("frame_len_s", cfg.dwt.frame_len_s);
    cfg.dwt.overlap_fraction = jd.value("overlap_fraction", cfg.dwt.overlap_fraction);
    cfg.dwt.n_scales = jd.value("n_scales", cfg.dwt.n_scales);
    cfg.dwt.log_magnitude = jd.value("log_magnitude", cfg.dwt.log_magnitude);
    transforms::validate(cfg.dwt);
  });

  check(violations, "model", [&] {
    if (j.contains("model")) cfg.model = nn::resnet_config_from_json(j.at("model"));
    nn::validate(cfg.model);
  });

  const nlohmann::json jh = j.value("train", nlohmann::json::object());
  check(violations, "train", [&] {
    cfg.hyper.lr = jh.value("lr", cfg.hyper.lr);
    cfg.hyper.momentum = jh.value("momentum", cfg.hyper.momentum);
    cfg.hyper.weight_decay = jh.value("weight_decay", cfg.hyper.weight_decay);
    cfg.hyper.batch_size = jh.value("batch_size", cfg.hyper.batch_size);
    cfg.hyper.max_epochs = jh.value("max_epochs", cfg.hyper.max_epochs);
    cfg.hyper.patience = jh.value("patience", cfg.hyper.patience);
    cfg.hyper.seed = jh.value("seed", cfg.hyper.seed);
    cfg.cv_folds = jh.value("cv_folds", cfg.cv_folds);
    if (!(cfg.hyper.lr > 0.0)) throw ConfigError("lr must be > 0");
    if (cfg.hyper.momentum < 0.0 || cfg.hyper.momentum >= 1.0)
      throw ConfigError("momentum must lie in [0, 1)");
    if (cfg.hyper.weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
    if (cfg.hyper.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (cfg.hyper.max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (cfg.hyper.patience < 0) throw ConfigError("patience must be >= 0");
    if (cfg.cv_folds < 2) throw ConfigError("cv_folds must be >= 2");
  });

  if (j.contains("attacks")) {
    const nlohmann::json& ja = j.at("attacks");
    if (!ja.is_array()) {
      violations.push_back("attacks: must be an array of attack specs");
    } else {
      for (std::size_t i = 0; i < ja.size(); ++i)
        check(violations, "attacks[" + std::to_string(i) + "]",
              [&] { cfg.attack_grid.push_back(attacks::spec_from_json(ja[i])); });
    }
  }
  check(violations, "attack_sample_cap", [&] {
    cfg.attack_sample_cap = j.value("attack_sample_cap", cfg.attack_sample_cap);
    if (cfg.attack_sample_cap < 0) throw ConfigError("must be >= 0");
  });
  cfg.dump_adversarials = j.value("dump_adversarials", cfg.dump_adversarials);

  const nlohmann::json jtr = j.value("transfer", nlohmann::json::object());
  check(violations, "transfer", [&] {
    cfg.transfer_seeds = jtr.value("seeds", cfg.transfer_seeds);
    cfg.transfer_spec_index = jtr.value("spec_index", cfg.transfer_spec_index);
    if (!cfg.transfer_seeds.empty() && cfg.transfer_seeds.size() < 2)
      throw ConfigError("need at least two seeds for a transfer study");
    if (cfg.transfer_spec_index < 0 ||
        (!cfg.attack_grid.empty() &&
         cfg.transfer_spec_index >= static_cast<int>(cfg.attack_grid.size())))
      throw ConfigError("spec_index outside the attack grid");
  });

  return cfg;
}

RunConfig load_run_config(const std::string& path, std::vector<std::string>& violations) {
  std::ifstream f(path);
  if (!f) {
    violations.push_back("config: cannot open file: " + path);
    return RunConfig{};
  }
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    violations.push_back(std::string("config: JSON parse error: ") + e.what());
    return RunConfig{};
  }
  return run_config_from_json(j, violations);
}

void apply_env_overrides(RunConfig& cfg, std::vector<std::string>& violations) {
  if (const char* s = std::getenv("SABRE_SEED")) {
    try {
      cfg.seed = std::stoull(s);
    } catch (const std::exception&) {
      violations.push_back("SABRE_SEED: not an unsigned integer: " + std::string(s));
    }
  }
  if (const char* s = std::getenv("SABRE_WORKERS")) {
    try {
      cfg.workers = std::stoi(s);
      if (cfg.workers < 1) violations.push_back("SABRE_WORKERS: must be >= 1");
    } catch (const std::exception&) {
      violations.push_back("SABRE_WORKERS: not an integer: " + std::string(s));
    }
  }
  if (const char* s = std::getenv("SABRE_OUT")) {
    if (*s == '\0')
      violations.push_back("SABRE_OUT: must be non-empty");
    else
      cfg.out_dir = s;
  }
}

RunConfig default_toy_run_config() {
  RunConfig cfg;
  cfg.seed = 7;
  cfg.workers = 1;
  cfg.out_dir = "out";

  cfg.toy.classes = 3;
  cfg.toy.clips_per_class = 30;
  cfg.toy.sample_rate_hz = 8000;
  cfg.toy.duration_s = 1.0;
  cfg.toy.folds = 5;

  cfg.representation = "dwt";
  cfg.stft.n_fft = 512;
  cfg.stft.win_length = 400;
  cfg.stft.hop = 200;

  cfg.model.stem_channels = 8;
  cfg.model.stem_stride = 2;
  cfg.model.stem_pool = true;
  cfg.model.stages = {{1, 8, 1}, {1, 16, 2}, {1, 32, 2}};
  cfg.model.classes = 3;

  cfg.hyper.lr = 0.05;
  cfg.hyper.batch_size = 16;
  cfg.hyper.max_epochs = 25;
  cfg.hyper.patience = 4;
  cfg.cv_folds = 5;

  auto add = [&](attacks::AttackSpec s) { cfg.attack_grid.push_back(s); };
  for (double eps : {2.0, 8.0, 20.0}) {
    attacks::AttackSpec s;
    s.algorithm = attacks::Algorithm::FGSM;
    s.norm = attacks::Norm::LINF;
    s.epsilon = eps;
    s.max_iter = 1;
    add(s);
  }
  for (auto alg : {attacks::Algorithm::BIM_A, attacks::Algorithm::BIM_B}) {
    for (double eps : {2.0, 8.0, 20.0}) {
      attacks::AttackSpec s;
      s.algorithm = alg;
      s.norm = attacks::Norm::LINF;
      s.epsilon = eps;
      s.max_iter = 10;
      add(s);
    }
  }
  for (int iters : {123, 307}) {  // (16384 * 1.5) / n for n = 200, 80
    attacks::AttackSpec s;
    s.algorithm = attacks::Algorithm::JSMA;
    s.targeted = true;
    s.norm = attacks::Norm::L0;
    s.gamma = 1.5 / 255.0;
    s.max_iter = iters;
    add(s);
  }
  for (int iters : {25, 100}) {
    attacks::AttackSpec s;
    s.algorithm = attacks::Algorithm::CW_L2;
    s.norm = attacks::Norm::L2;
    s.max_iter = iters;
    s.c_search_steps = 3;
    add(s);
  }
  for (int iters : {100, 1000}) {
    attacks::AttackSpec s;
    s.algorithm = attacks::Algorithm::DEEPFOOL;
    s.norm = attacks::Norm::L2;
    s.max_iter = iters;
    add(s);
  }
  for (int iters : {30, 60}) {
    attacks::AttackSpec s;
    s.algorithm = attacks::Algorithm::LBFGS;
    s.targeted = true;
    s.norm = attacks::Norm::L2;
    s.max_iter = iters;
    add(s);
  }
  cfg.attack_sample_cap = 24;
  cfg.transfer_seeds = {101, 202};
  cfg.transfer_spec_index = 2;  // fgsm, eps = 20
  return cfg;
}

}  // namespace sabre::cli
