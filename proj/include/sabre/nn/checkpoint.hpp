#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "sabre/nn/resnet.hpp"

namespace sabre::nn {

nlohmann::json resnet_config_to_json(const ResNetMiniConfig& cfg);
ResNetMiniConfig resnet_config_from_json(const nlohmann::json& j);

// Checkpoint layout: magic "RNM1", u32 LE JSON header length, UTF-8 JSON
// header (config, class names, parameter manifest), then f32 LE blobs for
// every parameter followed by every BN running-stats buffer, in declaration
// order.
void save_checkpoint(const std::string& path, const ResNetMini& model,
                     const std::vector<std::string>& class_names);

struct LoadedModel {
  std::unique_ptr<ResNetMini> model;
  std::vector<std::string> class_names;
};
LoadedModel load_checkpoint(const std::string& path);

// FNV-1a of the checkpoint bytes; identifies the model in reports.
std::string checkpoint_hash(const std::string& path);

}  // namespace sabre::nn
