#include "sabre/transforms/spg_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <vector>

#include "sabre/transforms/model_input.hpp"

namespace sabre::transforms {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'G', '1'};

void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void save_spg(const std::string& path, const Spectrogram& spec) {
  validate(spec);
  std::string out;
  out.append(kMagic, 4);
  put_u32le(out, static_cast<std::uint32_t>(spec.values.rows));
  put_u32le(out, static_cast<std::uint32_t>(spec.values.cols));
  out.push_back(static_cast<char>(spec.kind));

  for (double d : spec.values.v) {
    const float f = static_cast<float>(d);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32le(out, bits);
  }

  nlohmann::json trailer;
  trailer["axis_meta"] = spec.axis_meta;
  trailer["time_step_s"] = spec.time_step_s;
  trailer["config_fingerprint"] = hex64(spec.config_fingerprint);
  out += trailer.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("save_spg: cannot open " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("save_spg: short write to " + path);
}

Spectrogram load_spg(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("load_spg: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  if (bytes.size() < 13 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("load_spg: not an SPG1 file: " + path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t rows = get_u32le(p + 4);
  const std::uint32_t cols = get_u32le(p + 8);
  const std::uint8_t kind_code = p[12];
  if (kind_code > 3) throw FormatError("load_spg: bad kind code");
  const std::size_t payload = static_cast<std::size_t>(rows) * cols * 4;
  if (bytes.size() < 13 + payload) throw FormatError("load_spg: truncated payload");

  Spectrogram spec;
  spec.kind = static_cast<SpectrogramKind>(kind_code);
  spec.values = Mat(static_cast<int>(rows), static_cast<int>(cols));
  for (std::size_t i = 0; i < spec.values.v.size(); ++i) {
    const std::uint32_t bits = get_u32le(p + 13 + i * 4);
    float fv;
    std::memcpy(&fv, &bits, 4);
    spec.values.v[i] = fv;
  }

  nlohmann::json trailer;
  try {
    trailer = nlohmann::json::parse(bytes.substr(13 + payload));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("load_spg: bad JSON trailer: ") + e.what());
  }
  spec.axis_meta = trailer.at("axis_meta").get<std::vector<double>>();
  spec.time_step_s = trailer.at("time_step_s").get<double>();
  spec.config_fingerprint =
      std::stoull(trailer.at("config_fingerprint").get<std::string>(), nullptr, 16);
  validate(spec);
  return spec;
}

void write_png_gray8(const std::string& path, const Mat& m) {
  if (m.rows < 1 || m.cols < 1) throw DegenerateInputError("write_png_gray8: empty matrix");
  const Mat scaled = rescale_to_intensity(m);

  // Raw scanlines, each prefixed with filter type 0.
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<std::size_t>(m.rows) * (m.cols + 1));
  for (int r = 0; r < m.rows; ++r) {
    raw.push_back(0);
    for (int c = 0; c < m.cols; ++c)
      raw.push_back(static_cast<unsigned char>(std::lround(scaled(r, c))));
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> idat(bound);
  if (compress2(idat.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw IoError("write_png_gray8: zlib compression failed");
  idat.resize(bound);

  auto chunk = [](const char type[4], const std::vector<unsigned char>& data) {
    std::string out;  // PNG chunk fields are big-endian
    const std::uint32_t len = static_cast<std::uint32_t>(data.size());
    out.push_back(static_cast<char>((len >> 24) & 0xff));
    out.push_back(static_cast<char>((len >> 16) & 0xff));
    out.push_back(static_cast<char>((len >> 8) & 0xff));
    out.push_back(static_cast<char>(len & 0xff));
    out.append(type, 4);
    out.append(reinterpret_cast<const char*>(data.data()), data.size());
    std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(crc32(0L, reinterpret_cast<const Bytef*>(type), 4),
              data.empty() ? nullptr : data.data(), static_cast<uInt>(data.size())));
    out.push_back(static_cast<char>((crc >> 24) & 0xff));
    out.push_back(static_cast<char>((crc >> 16) & 0xff));
    out.push_back(static_cast<char>((crc >> 8) & 0xff));
    out.push_back(static_cast<char>(crc & 0xff));
    return out;
  };

  std::vector<unsigned char> ihdr(13, 0);
  const std::uint32_t w = static_cast<std::uint32_t>(m.cols);
  const std::uint32_t h = static_cast<std::uint32_t>(m.rows);
  ihdr[0] = (w >> 24) & 0xff;
  ihdr[1] = (w >> 16) & 0xff;
  ihdr[2] = (w >> 8) & 0xff;
  ihdr[3] = w & 0xff;
  ihdr[4] = (h >> 24) & 0xff;
  ihdr[5] = (h >> 16) & 0xff;
  ihdr[6] = (h >> 8) & 0xff;
  ihdr[7] = h & 0xff;
  ihdr[8] = 8;  // bit depth
  ihdr[9] = 0;  // grayscale

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("write_png_gray8: cannot open " + path);
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  f.write(reinterpret_cast<const char*>(sig), 8);
  const std::string s1 = chunk("IHDR", ihdr);
  const std::string s2 = chunk("IDAT", idat);
  const std::string s3 = chunk("IEND", {});
  f.write(s1.data(), static_cast<std::streamsize>(s1.size()));
  f.write(s2.data(), static_cast<std::streamsize>(s2.size()));
  f.write(s3.data(), static_cast<std::streamsize>(s3.size()));
  if (!f) throw IoError("write_png_gray8: short write to " + path);
}

}  // namespace sabre::transforms
