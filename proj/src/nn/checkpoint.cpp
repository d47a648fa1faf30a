#include "sabre/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace sabre::nn {

namespace {
constexpr char kMagic[4] = {'R', 'N', 'M', '1'};

void append_f32(std::string& out, const std::vector<double>& v) {
  for (double d : v) {
    const float f = static_cast<float>(d);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    out.push_back(static_cast<char>(bits & 0xff));
    out.push_back(static_cast<char>((bits >> 8) & 0xff));
    out.push_back(static_cast<char>((bits >> 16) & 0xff));
    out.push_back(static_cast<char>((bits >> 24) & 0xff));
  }
}

void read_f32(const unsigned char*& p, const unsigned char* end, std::vector<double>& v) {
  if (p + 4 * v.size() > end) throw FormatError("checkpoint: truncated parameter payload");
  for (double& d : v) {
    std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                         (static_cast<std::uint32_t>(p[2]) << 16) |
                         (static_cast<std::uint32_t>(p[3]) << 24);
    float f;
    std::memcpy(&f, &bits, 4);
    d = f;
    p += 4;
  }
}
}  // namespace

nlohmann::json resnet_config_to_json(const ResNetMiniConfig& cfg) {
  nlohmann::json j;
  j["input_channels"] = cfg.input_channels;
  j["input_side"] = cfg.input_side;
  j["stem_channels"] = cfg.stem_channels;
  j["stem_stride"] = cfg.stem_stride;
  j["stem_pool"] = cfg.stem_pool;
  j["classes"] = cfg.classes;
  j["seed"] = cfg.seed;
  j["stages"] = nlohmann::json::array();
  for (const auto& st : cfg.stages)
    j["stages"].push_back({{"blocks", st.blocks}, {"channels", st.channels}, {"stride", st.stride}});
  return j;
}

ResNetMiniConfig resnet_config_from_json(const nlohmann::json& j) {
  ResNetMiniConfig cfg;
  cfg.input_channels = j.value("input_channels", cfg.input_channels);
  cfg.input_side = j.value("input_side", cfg.input_side);
  cfg.stem_channels = j.value("stem_channels", cfg.stem_channels);
  cfg.stem_stride = j.value("stem_stride", cfg.stem_stride);
  cfg.stem_pool = j.value("stem_pool", cfg.stem_pool);
  cfg.classes = j.value("classes", cfg.classes);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("stages")) {
    cfg.stages.clear();
    for (const auto& st : j.at("stages"))
      cfg.stages.push_back({st.at("blocks").get<int>(), st.at("channels").get<int>(),
                            st.at("stride").get<int>()});
  }
  validate(cfg);
  return cfg;
}

void save_checkpoint(const std::string& path, const ResNetMini& model,
                     const std::vector<std::string>& class_names) {
  nlohmann::json header;
  header["config"] = resnet_config_to_json(model.config());
  header["class_names"] = class_names;
  header["params"] = nlohmann::json::array();
  for (const Param& p : model.params())
    header["params"].push_back({{"name", p.name}, {"shape", p.shape.d}});
  header["bn_layers"] = model.bn_buffers().size();
  const std::string hj = header.dump();

  std::string out;
  out.append(kMagic, 4);
  const std::uint32_t len = static_cast<std::uint32_t>(hj.size());
  out.push_back(static_cast<char>(len & 0xff));
  out.push_back(static_cast<char>((len >> 8) & 0xff));
  out.push_back(static_cast<char>((len >> 16) & 0xff));
  out.push_back(static_cast<char>((len >> 24) & 0xff));
  out += hj;
  for (const Param& p : model.params()) append_f32(out, p.value);
  for (const BnBuffers& b : model.bn_buffers()) {
    append_f32(out, b.mean);
    append_f32(out, b.var);
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("save_checkpoint: cannot open " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("save_checkpoint: short write to " + path);
}

LoadedModel load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("load_checkpoint: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("load_checkpoint: not an RNM1 file: " + path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t hlen = static_cast<std::uint32_t>(p[4]) |
                             (static_cast<std::uint32_t>(p[5]) << 8) |
                             (static_cast<std::uint32_t>(p[6]) << 16) |
                             (static_cast<std::uint32_t>(p[7]) << 24);
  if (bytes.size() < 8 + hlen) throw FormatError("load_checkpoint: truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(8, hlen));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("load_checkpoint: bad JSON header: ") + e.what());
  }

  LoadedModel out;
  out.model = std::make_unique<ResNetMini>(resnet_config_from_json(header.at("config")));
  out.class_names = header.at("class_names").get<std::vector<std::string>>();

  const unsigned char* cur = p + 8 + hlen;
  const unsigned char* end = p + bytes.size();
  for (Param& prm : out.model->params()) read_f32(cur, end, prm.value);
  for (BnBuffers& b : out.model->bn_buffers()) {
    read_f32(cur, end, b.mean);
    read_f32(cur, end, b.var);
  }
  return out;
}

std::string checkpoint_hash(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("checkpoint_hash: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return hex64(fnv1a64(bytes.data(), bytes.size()));
}

}  // namespace sabre::nn
