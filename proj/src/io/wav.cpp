#include "adsrnote/io/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace adsrnote {

namespace {

std::uint32_t u32_at(const std::string& b, std::size_t pos) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[pos])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[pos + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[pos + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[pos + 3])) << 24;
}

std::uint16_t u16_at(const std::string& b, std::size_t pos) {
  return static_cast<std::uint16_t>(
      static_cast<unsigned char>(b[pos]) |
      static_cast<unsigned char>(b[pos + 1]) << 8);
}

[[noreturn]] void fail(const std::string& path, std::size_t offset,
                       const std::string& what) {
  throw std::runtime_error(path + ": " + what + " at byte offset " +
                           std::to_string(offset));
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());

  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0) {
    fail(path, 0, "missing RIFF header");
  }
  if (bytes.compare(8, 4, "WAVE") != 0) fail(path, 8, "missing WAVE tag");

  int channels = 0;
  int sample_rate = 0;
  int bits = 0;
  bool got_fmt = false;
  std::size_t data_pos = 0, data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const std::uint32_t len = u32_at(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) fail(path, pos, "chunk '" + id + "' overruns file");
    if (id == "fmt ") {
      if (len < 16) fail(path, body, "fmt chunk too short");
      const std::uint16_t format = u16_at(bytes, body);
      if (format != 1) {
        fail(path, body, "unsupported WAV format tag " + std::to_string(format) +
                             " (only 16-bit PCM)");
      }
      channels = u16_at(bytes, body + 2);
      sample_rate = static_cast<int>(u32_at(bytes, body + 4));
      bits = u16_at(bytes, body + 14);
      got_fmt = true;
    } else if (id == "data") {
      data_pos = body;
      data_len = len;
    }
    pos = body + len + (len & 1);  // chunks are word-aligned
  }

  if (!got_fmt) fail(path, bytes.size(), "no fmt chunk");
  if (data_pos == 0) fail(path, bytes.size(), "no data chunk");
  if (bits != 16) fail(path, 0, "only 16-bit PCM supported, got " + std::to_string(bits) + " bits");
  if (channels < 1) fail(path, 0, "invalid channel count");

  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * 2;
  const std::size_t num_frames = data_len / frame_bytes;

  AudioBuffer audio;
  audio.sample_rate = sample_rate;
  audio.samples.resize(num_frames);
  for (std::size_t f = 0; f < num_frames; ++f) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const std::size_t p = data_pos + f * frame_bytes + c * 2;
      const std::int16_t s = static_cast<std::int16_t>(u16_at(bytes, p));
      acc += s;
    }
    audio.samples[f] = static_cast<float>(acc / channels / 32768.0);
  }
  return audio;
}

void write_wav(const std::string& path, const AudioBuffer& audio) {
  const std::uint32_t data_len =
      static_cast<std::uint32_t>(audio.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_len);
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  auto put_u16 = [&](std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
  };
  out.append("RIFF");
  put_u32(36 + data_len);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(static_cast<std::uint32_t>(audio.sample_rate) * 2);  // byte rate
  put_u16(2);   // block align
  put_u16(16);  // bits
  out.append("data");
  put_u32(data_len);
  for (float v : audio.samples) {
    const double clipped = std::clamp(static_cast<double>(v), -1.0, 1.0);
    const long quantized =
        std::clamp(std::lround(clipped * 32768.0), -32768L, 32767L);
    put_u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(quantized)));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write failed for " + path);
}

}  // namespace adsrnote
