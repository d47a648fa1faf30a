#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sabre/attacks/types.hpp"
#include "sabre/audio/toy.hpp"
#include "sabre/nn/train.hpp"
#include "sabre/transforms/types.hpp"

namespace sabre::cli {

// Everything one pipeline run needs, loadable from a JSON config file.
// Flags and SABRE_* environment variables override individual fields.
struct RunConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out_dir = "out";

  // dataset
  std::string dataset_kind = "toy";  // "toy" | "manifest"
  std::string dataset_root;          // manifest datasets: directory with the WAVs
  std::string manifest_path;         // manifest datasets: CSV file
  audio::ToyCorpusConfig toy;
  int resample_hz = 0;  // resample clips before the STFT path; 0 keeps native
  std::vector<double> augment_factors;  // empty = no augmentation stage

  // representation
  std::string representation = "stft";  // stft | mfcc | dwt
  transforms::StftConfig stft;
  transforms::MfccConfig mfcc;
  transforms::DwtConfig dwt;

  // model + training
  nn::ResNetMiniConfig model;
  nn::TrainHyper hyper;
  int cv_folds = 5;

  // attacks
  std::vector<attacks::AttackSpec> attack_grid;
  int attack_sample_cap = 0;  // attack at most this many test samples; 0 = all
  bool dump_adversarials = false;

  // transferability study
  std::vector<std::uint64_t> transfer_seeds;  // model seeds; >= 2 enables it
  int transfer_spec_index = 0;                // grid entry used for transfer
};

nlohmann::json run_config_to_json(const RunConfig& cfg);

// Parses a config tree, appending one message per violation (bad enum
// values, missing files, invalid numeric ranges, ...) instead of stopping at
// the first. The returned config is best-effort and only usable when
// violations stayed empty.
RunConfig run_config_from_json(const nlohmann::json& j, std::vector<std::string>& violations);
RunConfig load_run_config(const std::string& path, std::vector<std::string>& violations);

// Applies SABRE_SEED / SABRE_WORKERS / SABRE_OUT when set.
void apply_env_overrides(RunConfig& cfg, std::vector<std::string>& violations);

// Compact settings that exercise the full pipeline on the bundled toy
// corpus in a few minutes of CPU time.
RunConfig default_toy_run_config();

}  // namespace sabre::cli
