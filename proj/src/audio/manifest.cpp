#include "sabre/audio/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sabre::audio {

int DatasetManifest::num_folds() const {
  int best = -1;
  for (const auto& e : entries) best = std::max(best, e.fold);
  return best + 1;
}

void validate(const DatasetManifest& m) {
  std::set<int> folds;
  for (const auto& e : m.entries) {
    if (e.label < 0 || e.label >= m.num_classes())
      throw FormatError("manifest: label index " + std::to_string(e.label) + " out of range for " +
                        std::to_string(m.num_classes()) + " classes (" + e.path + ")");
    if (e.fold < 0) throw FormatError("manifest: negative fold for " + e.path);
    folds.insert(e.fold);
  }
  int expect = 0;
  for (int f : folds) {
    if (f != expect)
      throw FormatError("manifest: fold indices not contiguous from 0 (missing fold " +
                        std::to_string(expect) + ")");
    ++expect;
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

DatasetManifest load_manifest_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("load_manifest_csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw FormatError("load_manifest_csv: empty file: " + path);
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "path" || header[1] != "label" || header[2] != "fold")
    throw FormatError("load_manifest_csv: expected header path,label,fold[,aug] in " + path);
  const bool has_aug = header.size() >= 4 && header[3] == "aug";

  struct Row {
    std::string path, label;
    int fold;
    std::optional<double> aug;
  };
  std::vector<Row> rows;
  std::set<std::string> names;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() < 3)
      throw FormatError("load_manifest_csv: row " + std::to_string(lineno) + " has too few columns");
    Row r;
    r.path = cells[0];
    r.label = cells[1];
    try {
      r.fold = std::stoi(cells[2]);
    } catch (const std::exception&) {
      throw FormatError("load_manifest_csv: bad fold on row " + std::to_string(lineno));
    }
    if (has_aug && cells.size() >= 4 && !cells[3].empty()) {
      try {
        r.aug = std::stod(cells[3]);
      } catch (const std::exception&) {
        throw FormatError("load_manifest_csv: bad aug factor on row " + std::to_string(lineno));
      }
    }
    names.insert(r.label);
    rows.push_back(std::move(r));
  }

  DatasetManifest m;
  m.class_names.assign(names.begin(), names.end());  // sorted
  std::map<std::string, int> index;
  for (int i = 0; i < static_cast<int>(m.class_names.size()); ++i) index[m.class_names[i]] = i;
  for (auto& r : rows) {
    ManifestEntry e;
    e.path = r.path;
    e.label = index[r.label];
    e.fold = r.fold;
    e.augmentation_tag = r.aug;
    m.entries.push_back(std::move(e));
  }
  validate(m);
  return m;
}

void save_manifest_csv(const std::string& path, const DatasetManifest& m) {
  std::ofstream f(path, std::ios::binary);  // binary: force LF line endings
  if (!f) throw IoError("save_manifest_csv: cannot open " + path + " for writing");
  f << "path,label,fold,aug\n";
  std::ostringstream num;
  for (const auto& e : m.entries) {
    f << e.path << ',' << m.class_names.at(e.label) << ',' << e.fold << ',';
    if (e.augmentation_tag) {
      num.str("");
      num << *e.augmentation_tag;
      f << num.str();
    }
    f << '\n';
  }
  if (!f) throw IoError("save_manifest_csv: write failed: " + path);
}

DatasetManifest augment_dataset(const DatasetManifest& manifest, const std::vector<double>& factors) {
  if (factors.empty()) throw ConfigError("augment_dataset: factor list must be non-empty");
  DatasetManifest out;
  out.class_names = manifest.class_names;
  out.entries.reserve(manifest.entries.size() * (1 + factors.size()));
  for (const auto& e : manifest.entries) {
    out.entries.push_back(e);
    for (double f : factors) {
      ManifestEntry a = e;
      a.augmentation_tag = f;  // same fold as the source clip
      out.entries.push_back(std::move(a));
    }
  }
  return out;
}

const std::vector<double>& default_pitch_factors() {
  static const std::vector<double> factors{0.75, 0.9, 1.15, 1.5};
  return factors;
}

}  // namespace sabre::audio
