#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sabre/errors.hpp"

namespace sabre::audio {

struct ManifestEntry {
  std::string path;     // relative to the dataset root
  int label = -1;       // index into class_names
  int fold = -1;
  std::optional<double> augmentation_tag;  // pitch factor, empty for originals
};

// Dataset description: which clips exist, their labels and fold assignment.
// Class indices are positions in class_names (sorted label names, so the
// mapping does not depend on row order).
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> class_names;

  int num_classes() const { return static_cast<int>(class_names.size()); }
  int num_folds() const;
};

// Checks fold contiguity (0..k-1) and label bounds.
void validate(const DatasetManifest& m);

// CSV with header `path,label,fold` and an optional `aug` column. Labels in
// the file are class names; indices are assigned against the sorted name set.
DatasetManifest load_manifest_csv(const std::string& path);
void save_manifest_csv(const std::string& path, const DatasetManifest& m);

// Appends one pitch-shifted entry per factor for every original entry.
// Augmented copies inherit the fold of their source clip.
DatasetManifest augment_dataset(const DatasetManifest& manifest, const std::vector<double>& factors);

// The pitch factors used throughout: 0.75, 0.9, 1.15, 1.5.
const std::vector<double>& default_pitch_factors();

}  // namespace sabre::audio
