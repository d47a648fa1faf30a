#include "sabre/audio/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace sabre::audio {

namespace {

uint16_t rd_u16(const unsigned char* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }
uint32_t rd_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

void wr_u16(std::ofstream& f, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>(v >> 8)};
  f.write(reinterpret_cast<char*>(b), 2);
}
void wr_u32(std::ofstream& f, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>(v >> 24)};
  f.write(reinterpret_cast<char*>(b), 4);
}

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;

}  // namespace

AudioClip load_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("load_wav: cannot open " + path);
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (raw.size() < 44) throw FormatError("load_wav: file too short for a WAV header: " + path);
  if (std::memcmp(raw.data(), "RIFF", 4) != 0 || std::memcmp(raw.data() + 8, "WAVE", 4) != 0)
    throw FormatError("load_wav: missing RIFF/WAVE magic: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  size_t data_len = 0;
  bool have_fmt = false;

  size_t pos = 12;
  while (pos + 8 <= raw.size()) {
    const char* id = reinterpret_cast<const char*>(raw.data() + pos);
    uint32_t sz = rd_u32(raw.data() + pos + 4);
    if (pos + 8 + sz > raw.size()) throw FormatError("load_wav: truncated chunk: " + path);
    const unsigned char* body = raw.data() + pos + 8;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (sz < 16) throw FormatError("load_wav: fmt chunk too small: " + path);
      format = rd_u16(body);
      channels = rd_u16(body + 2);
      sample_rate = rd_u32(body + 4);
      bits = rd_u16(body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = body;
      data_len = sz;
    }
    pos += 8 + sz + (sz & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr) throw FormatError("load_wav: missing fmt or data chunk: " + path);
  if (format != kFormatPcm && format != kFormatFloat)
    throw UnsupportedError("load_wav: non-PCM codec (format tag " + std::to_string(format) + "): " + path);
  if (channels < 1 || channels > 2)
    throw UnsupportedError("load_wav: " + std::to_string(channels) + " channels not supported: " + path);
  if (sample_rate == 0) throw FormatError("load_wav: zero sample rate: " + path);
  if (format == kFormatPcm && bits != 8 && bits != 16 && bits != 24)
    throw UnsupportedError("load_wav: " + std::to_string(bits) + "-bit integer PCM not supported: " + path);
  if (format == kFormatFloat && bits != 32)
    throw UnsupportedError("load_wav: only 32-bit float PCM supported: " + path);

  const size_t bytes_per_sample = bits / 8;
  const size_t frame_bytes = bytes_per_sample * channels;
  if (frame_bytes == 0 || data_len % frame_bytes != 0)
    throw FormatError("load_wav: data size not a multiple of the frame size: " + path);
  const size_t n_frames = data_len / frame_bytes;
  if (n_frames == 0) throw DegenerateInputError("load_wav: empty data chunk: " + path);

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(sample_rate);
  clip.source_id = path;
  clip.samples.resize(n_frames);

  for (size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (int ch = 0; ch < channels; ++ch) {
      const unsigned char* p = data + i * frame_bytes + ch * bytes_per_sample;
      double s = 0.0;
      switch (bits) {
        case 8:  // unsigned, midpoint 128
          s = (static_cast<int>(p[0]) - 128) / 128.0;
          break;
        case 16: {
          int16_t v = static_cast<int16_t>(p[0] | (p[1] << 8));
          s = v / 32768.0;
          break;
        }
        case 24: {
          int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
          if (v & 0x800000) v |= ~0xffffff;  // sign extend
          s = v / 8388608.0;
          break;
        }
        case 32: {
          float v;
          std::memcpy(&v, p, 4);
          if (!std::isfinite(v)) throw FormatError("load_wav: non-finite float sample: " + path);
          s = std::clamp(static_cast<double>(v), -1.0, 1.0);
          break;
        }
      }
      acc += s;
    }
    clip.samples[i] = acc / channels;
  }
  return clip;
}

void save_wav_16bit(const std::string& path, const AudioClip& clip) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("save_wav_16bit: cannot open " + path + " for writing");
  const uint32_t n = static_cast<uint32_t>(clip.samples.size());
  const uint32_t data_bytes = n * 2;
  f.write("RIFF", 4);
  wr_u32(f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  wr_u32(f, 16);
  wr_u16(f, kFormatPcm);
  wr_u16(f, 1);  // mono
  wr_u32(f, static_cast<uint32_t>(clip.sample_rate_hz));
  wr_u32(f, static_cast<uint32_t>(clip.sample_rate_hz) * 2);
  wr_u16(f, 2);
  wr_u16(f, 16);
  f.write("data", 4);
  wr_u32(f, data_bytes);
  for (double s : clip.samples) {
    double c = std::clamp(s, -1.0, 1.0);
    int v = static_cast<int>(std::lrint(c * 32768.0));
    v = std::clamp(v, -32768, 32767);
    wr_u16(f, static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
  if (!f) throw IoError("save_wav_16bit: write failed: " + path);
}

}  // namespace sabre::audio
