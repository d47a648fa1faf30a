#include "sabre/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sabre/attacks/sweep.hpp"
#include "sabre/audio/resample.hpp"
#include "sabre/audio/wav.hpp"
#include "sabre/eval/report.hpp"
#include "sabre/nn/checkpoint.hpp"
#include "sabre/transforms/mfcc.hpp"
#include "sabre/transforms/model_input.hpp"
#include "sabre/transforms/spg_io.hpp"
#include "sabre/transforms/stft.hpp"
#include "sabre/transforms/wavelet.hpp"

namespace fs = std::filesystem;

namespace sabre::cli {

namespace {

fs::path out_path(const RunConfig& cfg, const std::string& rel) {
  const fs::path p = fs::path(cfg.out_dir) / rel;
  fs::create_directories(p.parent_path());
  return p;
}

// Seeds actually used by the pipeline: the run seed is folded into the
// section-level seeds so `--seed` changes everything at once.
std::uint64_t effective_model_seed(const RunConfig& cfg) { return cfg.model.seed ^ cfg.seed; }
std::uint64_t effective_hyper_seed(const RunConfig& cfg) { return cfg.hyper.seed ^ cfg.seed; }

std::string dataset_name(const RunConfig& cfg) {
  if (cfg.dataset_kind == "toy") return "toy";
  return fs::path(cfg.manifest_path).stem().string();
}

std::string rep_label(const RunConfig& cfg) {
  std::ostringstream os;
  if (cfg.representation == "stft") {
    os << "stft_nfft" << cfg.stft.n_fft << "_win" << cfg.stft.win_length << "_hop"
       << cfg.stft.hop;
  } else if (cfg.representation == "mfcc") {
    os << "mfcc_sr" << cfg.mfcc.sample_rate_hz << "_n" << cfg.mfcc.n_mfcc << "_mels"
       << cfg.mfcc.n_mels;
  } else {
    os << "dwt_" << transforms::mother_name(cfg.dwt.mother) << "_sr" << cfg.dwt.sample_rate_hz
       << "_s" << cfg.dwt.n_scales;
  }
  return os.str();
}

struct SourceData {
  audio::DatasetManifest manifest;
  std::string root;
};

// Toy datasets are (re)generated in place — the generator is byte
// deterministic, so this is idempotent. Manifest datasets are loaded.
SourceData obtain_source(const RunConfig& cfg) {
  SourceData src;
  if (cfg.dataset_kind == "toy") {
    audio::ToyCorpusConfig tc = cfg.toy;
    tc.seed = cfg.toy.seed ^ cfg.seed;
    src.root = out_path(cfg, "toy").string();
    src.manifest = audio::generate_toy_corpus(src.root, tc);
  } else {
    src.manifest = audio::load_manifest_csv(cfg.manifest_path);
    src.root = cfg.dataset_root;
  }
  audio::validate(src.manifest);
  if (!cfg.augment_factors.empty())
    src.manifest = audio::augment_dataset(src.manifest, cfg.augment_factors);
  return src;
}

audio::AudioClip load_entry(const SourceData& src, const audio::ManifestEntry& entry,
                            const RunConfig& cfg) {
  audio::AudioClip clip = audio::load_wav((fs::path(src.root) / entry.path).string());
  clip.label = entry.label;
  clip.source_id = entry.path;
  if (entry.augmentation_tag) clip = audio::pitch_shift(clip, *entry.augmentation_tag);
  int want_rate = 0;
  if (cfg.representation == "mfcc")
    want_rate = cfg.mfcc.sample_rate_hz;
  else if (cfg.representation == "dwt")
    want_rate = cfg.dwt.sample_rate_hz;
  else
    want_rate = cfg.resample_hz;
  if (want_rate > 0 && clip.sample_rate_hz != want_rate) clip = audio::resample(clip, want_rate);
  return clip;
}

transforms::Spectrogram transform_clip(const audio::AudioClip& clip, const RunConfig& cfg) {
  if (cfg.representation == "stft")
    return transforms::stft_spectrogram(clip.samples, cfg.stft, clip.sample_rate_hz);
  if (cfg.representation == "mfcc") return transforms::mfcc(clip.samples, cfg.mfcc);
  return transforms::cwt_spectrogram(clip.samples, cfg.dwt);
}

nn::Dataset build_dataset(const SourceData& src, const RunConfig& cfg) {
  const int n = static_cast<int>(src.manifest.entries.size());
  nn::Dataset data;
  data.inputs = Mat(n, transforms::kInputPixels);
  data.labels.resize(n);
  parallel_for(n, cfg.workers, [&](int i) {
    const audio::ManifestEntry& entry = src.manifest.entries[i];
    const audio::AudioClip clip = load_entry(src, entry, cfg);
    const transforms::Spectrogram spec = transform_clip(clip, cfg);
    const transforms::ModelInput mi = transforms::to_model_input(spec);
    for (int c = 0; c < transforms::kInputPixels; ++c) data.inputs(i, c) = mi.pixels[c];
    data.labels[i] = entry.label;
  });
  return data;
}

// Test rows the attack stage works on: the 30% holdout to the cap.
std::vector<int> attack_rows(const nn::Dataset& data, const RunConfig& cfg) {
  auto [train70, test30] = nn::stratified_split(data.labels, 0.7, effective_hyper_seed(cfg));
  (void)train70;
  if (cfg.attack_sample_cap > 0 &&
      static_cast<int>(test30.size()) > cfg.attack_sample_cap)
    test30.resize(cfg.attack_sample_cap);
  return test30;
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f << j.dump(2) << "\n";
  if (!f) throw IoError("write failed: " + path.string());
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

std::vector<attacks::SweepRun> sweep_over(nn::DifferentiableClassifier& model,
                                          const nn::Dataset& data, const std::vector<int>& rows,
                                          const std::vector<attacks::AttackSpec>& grid,
                                          const RunConfig& cfg) {
  Mat batch(static_cast<int>(rows.size()), data.inputs.cols);
  std::vector<int> labels(rows.size());
  for (int r = 0; r < batch.rows; ++r) {
    for (int c = 0; c < batch.cols; ++c) batch(r, c) = data.inputs(rows[r], c);
    labels[r] = data.labels[rows[r]];
  }
  return attacks::run_budget_sweep(model, batch, labels, grid, cfg.seed, cfg.workers);
}

}  // namespace

nlohmann::json cmd_toy(const RunConfig& cfg) {
  if (cfg.dataset_kind != "toy")
    throw ConfigError("toy: dataset.kind must be \"toy\" for this command");
  audio::ToyCorpusConfig tc = cfg.toy;
  tc.seed = cfg.toy.seed ^ cfg.seed;
  const std::string root = out_path(cfg, "toy").string();
  const audio::DatasetManifest m = audio::generate_toy_corpus(root, tc);
  return {{"command", "toy"},
          {"root", root},
          {"classes", m.class_names},
          {"entries", m.entries.size()}};
}

nlohmann::json cmd_ingest(const RunConfig& cfg) {
  const SourceData src = obtain_source(cfg);
  for (const audio::ManifestEntry& e : src.manifest.entries) {
    const fs::path p = fs::path(src.root) / e.path;
    if (!fs::exists(p)) throw IoError("ingest: missing audio file: " + p.string());
  }
  const fs::path dest = out_path(cfg, "manifest.csv");
  audio::save_manifest_csv(dest.string(), src.manifest);
  return {{"command", "ingest"},
          {"manifest", dest.string()},
          {"entries", src.manifest.entries.size()},
          {"classes", src.manifest.class_names},
          {"folds", src.manifest.num_folds()}};
}

nlohmann::json cmd_augment(const RunConfig& cfg) {
  RunConfig base = cfg;
  base.augment_factors.clear();  // obtain the un-augmented source
  const SourceData src = obtain_source(base);
  const std::vector<double>& factors =
      cfg.augment_factors.empty() ? audio::default_pitch_factors() : cfg.augment_factors;
  const audio::DatasetManifest aug = audio::augment_dataset(src.manifest, factors);
  const fs::path dest = out_path(cfg, "manifest_augmented.csv");
  audio::save_manifest_csv(dest.string(), aug);
  return {{"command", "augment"},
          {"manifest", dest.string()},
          {"originals", src.manifest.entries.size()},
          {"entries", aug.entries.size()},
          {"factors", factors}};
}

nlohmann::json cmd_spectrogram(const RunConfig& cfg) {
  const SourceData src = obtain_source(cfg);
  const fs::path dir = out_path(cfg, "spectrograms/.keep").parent_path();
  const int n = static_cast<int>(src.manifest.entries.size());
  std::vector<std::string> names(n);
  parallel_for(n, cfg.workers, [&](int i) {
    const audio::ManifestEntry& entry = src.manifest.entries[i];
    const audio::AudioClip clip = load_entry(src, entry, cfg);
    const transforms::Spectrogram spec = transform_clip(clip, cfg);
    std::ostringstream name;
    name << fs::path(entry.path).stem().string();
    if (entry.augmentation_tag) name << "_aug" << *entry.augmentation_tag;
    name << "_" << cfg.representation << ".spg";
    names[i] = name.str();
    transforms::save_spg((dir / names[i]).string(), spec);
  });
  return {{"command", "spectrogram"},
          {"dir", dir.string()},
          {"count", n},
          {"representation", rep_label(cfg)}};
}

nlohmann::json cmd_train(const RunConfig& cfg) {
  const SourceData src = obtain_source(cfg);
  const nn::Dataset data = build_dataset(src, cfg);

  nn::ResNetMiniConfig mc = cfg.model;
  mc.classes = src.manifest.num_classes();
  mc.input_channels = 1;
  mc.input_side = transforms::kInputSide;
  mc.seed = effective_model_seed(cfg);
  nn::TrainHyper hyper = cfg.hyper;
  hyper.seed = effective_hyper_seed(cfg);

  auto [model, report] = nn::train(mc, data, cfg.cv_folds, hyper);

  const fs::path ckpt = out_path(cfg, "model.ckpt");
  nn::save_checkpoint(ckpt.string(), *model, src.manifest.class_names);

  nlohmann::json jr = {{"command", "train"},
                       {"dataset", dataset_name(cfg)},
                       {"representation", rep_label(cfg)},
                       {"fold_val_accuracy_pct", report.fold_val_accuracy_pct},
                       {"test_accuracy_pct", report.test_accuracy_pct},
                       {"epochs_run", report.epochs_run},
                       {"early_stop_epoch", report.early_stop_epoch},
                       {"checkpoint", "model.ckpt"},
                       {"checkpoint_hash", nn::checkpoint_hash(ckpt.string())}};
  write_json_file(out_path(cfg, "train_report.json"), jr);
  return jr;
}

nlohmann::json cmd_attack(const RunConfig& cfg) {
  if (cfg.attack_grid.empty()) throw ConfigError("attack: empty attack grid");
  const fs::path ckpt = out_path(cfg, "model.ckpt");
  if (!fs::exists(ckpt)) throw IoError("attack: checkpoint not found (run train first): " +
                                       ckpt.string());
  nn::LoadedModel loaded = nn::load_checkpoint(ckpt.string());

  const SourceData src = obtain_source(cfg);
  const nn::Dataset data = build_dataset(src, cfg);
  const std::vector<int> rows = attack_rows(data, cfg);
  const std::vector<attacks::SweepRun> runs =
      sweep_over(*loaded.model, data, rows, cfg.attack_grid, cfg);

  const fs::path log = out_path(cfg, "outcomes.jsonl");
  {
    std::ofstream f(log, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + log.string());
    attacks::write_outcome_jsonl(f, runs);
    if (!f) throw IoError("write failed: " + log.string());
  }

  nlohmann::json manifest = {{"seed", cfg.seed},
                             {"checkpoint_hash", nn::checkpoint_hash(ckpt.string())},
                             {"samples", rows.size()},
                             {"specs", nlohmann::json::array()}};
  for (const attacks::AttackSpec& s : cfg.attack_grid)
    manifest["specs"].push_back(attacks::spec_to_json(s));
  write_json_file(out_path(cfg, "attack_manifest.json"), manifest);

  int successes = 0, total = 0;
  for (const attacks::SweepRun& run : runs)
    for (const attacks::AdvOutcome& o : run.outcomes) {
      ++total;
      if (o.success) ++successes;
    }

  if (cfg.dump_adversarials) {
    const fs::path adv = out_path(cfg, "adv/.keep").parent_path();
    for (std::size_t s = 0; s < runs.size(); ++s)
      for (std::size_t i = 0; i < runs[s].outcomes.size(); ++i) {
        const attacks::AdvOutcome& o = runs[s].outcomes[i];
        if (o.x_adv.empty()) continue;
        transforms::Spectrogram sp;
        sp.kind = transforms::SpectrogramKind::Pixels;
        sp.values = Mat(transforms::kInputSide, transforms::kInputSide);
        sp.values.v = o.x_adv;
        sp.axis_meta.assign(transforms::kInputSide, 0.0);
        std::ostringstream name;
        name << "spec" << s << "_sample" << i << ".spg";
        transforms::save_spg((adv / name.str()).string(), sp);
      }
  }

  return {{"command", "attack"},
          {"outcomes", total},
          {"successes", successes},
          {"log", log.string()},
          {"samples", rows.size()}};
}

nlohmann::json cmd_transfer(const RunConfig& cfg) {
  if (cfg.transfer_seeds.size() < 2)
    throw ConfigError("transfer: need at least two transfer seeds");
  if (cfg.attack_grid.empty()) throw ConfigError("transfer: empty attack grid");
  if (cfg.transfer_spec_index < 0 ||
      cfg.transfer_spec_index >= static_cast<int>(cfg.attack_grid.size()))
    throw ConfigError("transfer: spec_index outside the attack grid");

  const SourceData src = obtain_source(cfg);
  const nn::Dataset data = build_dataset(src, cfg);
  const std::vector<int> rows = attack_rows(data, cfg);
  const std::vector<attacks::AttackSpec> grid = {cfg.attack_grid[cfg.transfer_spec_index]};

  std::vector<std::unique_ptr<nn::ResNetMini>> models;
  std::vector<std::string> names;
  std::vector<std::vector<attacks::AdvOutcome>> outcomes;
  for (std::uint64_t s : cfg.transfer_seeds) {
    nn::ResNetMiniConfig mc = cfg.model;
    mc.classes = src.manifest.num_classes();
    mc.input_channels = 1;
    mc.input_side = transforms::kInputSide;
    mc.seed = s;
    nn::TrainHyper hyper = cfg.hyper;
    hyper.seed = effective_hyper_seed(cfg);  // same split for every model
    auto [model, report] = nn::train(mc, data, cfg.cv_folds, hyper);
    (void)report;
    const std::vector<attacks::SweepRun> runs = sweep_over(*model, data, rows, grid, cfg);
    outcomes.push_back(runs[0].outcomes);
    models.push_back(std::move(model));
    names.push_back("seed_" + std::to_string(s));
  }

  std::vector<const nn::DifferentiableClassifier*> ptrs;
  for (const auto& m : models) ptrs.push_back(m.get());
  const eval::TransferMatrix tm = eval::transfer_matrix(names, ptrs, outcomes);

  nlohmann::json jt = eval::transfer_to_json(tm);
  jt["spec"] = attacks::spec_to_json(grid[0]);
  write_json_file(out_path(cfg, "transfer.json"), jt);
  return {{"command", "transfer"},
          {"models", names},
          {"file", out_path(cfg, "transfer.json").string()}};
}

nlohmann::json cmd_report(const RunConfig& cfg) {
  const nlohmann::json jr = read_json_file(out_path(cfg, "train_report.json"));

  const fs::path log = out_path(cfg, "outcomes.jsonl");
  std::ifstream f(log);
  if (!f) throw IoError("report: outcome log not found (run attack first): " + log.string());
  std::map<int, attacks::SweepRun> by_spec;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("report: malformed outcome line: " + std::string(e.what()));
    }
    const int spec_index = j.at("spec_index").get<int>();
    attacks::SweepRun& run = by_spec[spec_index];
    run.spec = attacks::spec_from_json(j.at("spec"));
    run.outcomes.push_back(attacks::outcome_from_json(j));
  }
  std::vector<attacks::SweepRun> runs;
  for (auto& [idx, run] : by_spec) runs.push_back(std::move(run));

  eval::RobustnessReport report;
  report.seed = cfg.seed;
  report.model_hash = jr.value("checkpoint_hash", "");
  eval::ConfigRow row;
  row.dataset = jr.value("dataset", dataset_name(cfg));
  row.representation = cfg.representation;
  row.config = jr.value("representation", rep_label(cfg));
  row.accuracy_pct = jr.value("test_accuracy_pct", 0.0);
  row.attacks = eval::summarize_sweep(runs);
  report.rows.push_back(std::move(row));

  const fs::path transfer_file = out_path(cfg, "transfer.json");
  if (fs::exists(transfer_file))
    report.transfer = eval::transfer_from_json(read_json_file(transfer_file));

  emit_report_json(report, out_path(cfg, "report.json").string());
  emit_report_csv(report, out_path(cfg, "report.csv").string());
  const std::vector<std::string> plots =
      eval::emit_plots(report, out_path(cfg, "plots/.keep").parent_path().string());

  return {{"command", "report"},
          {"report_json", out_path(cfg, "report.json").string()},
          {"report_csv", out_path(cfg, "report.csv").string()},
          {"plots", plots}};
}

nlohmann::json cmd_run(const RunConfig& cfg) {
  nlohmann::json steps = nlohmann::json::array();
  if (cfg.dataset_kind == "toy") steps.push_back(cmd_toy(cfg));
  steps.push_back(cmd_train(cfg));
  steps.push_back(cmd_attack(cfg));
  if (cfg.transfer_seeds.size() >= 2 && !cfg.attack_grid.empty())
    steps.push_back(cmd_transfer(cfg));
  steps.push_back(cmd_report(cfg));
  return {{"command", "run"}, {"steps", steps}};
}

}  // namespace sabre::cli
