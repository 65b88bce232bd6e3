#include "adspeech/audio.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>

#include "adspeech/common.h"
#include "adspeech/io.h"

namespace adspeech {
namespace {

std::uint32_t le32(const std::string& b, std::size_t off) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[off])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 3])) << 24;
}

std::uint16_t le16(const std::string& b, std::size_t off) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[off]) |
                                    static_cast<unsigned char>(b[off + 1]) << 8);
}

void put32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b += static_cast<char>((v >> (8 * i)) & 0xFF);
}
void put16(std::string& b, std::uint16_t v) {
  b += static_cast<char>(v & 0xFF);
  b += static_cast<char>((v >> 8) & 0xFF);
}

}  // namespace

bool is_supported_rate(int rate_hz) {
  return rate_hz == 8000 || rate_hz == 16000 || rate_hz == 22050 || rate_hz == 44100 ||
         rate_hz == 48000;
}

void validate(const AudioSignal& signal) {
  if (!is_supported_rate(signal.rate_hz)) {
    throw InputError("unsupported sample rate " + std::to_string(signal.rate_hz));
  }
  for (double s : signal.samples) {
    if (!std::isfinite(s)) throw InputError("audio contains non-finite samples");
  }
}

AudioSignal read_wav(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const std::string where = path.string() + ": ";
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 ||
      bytes.compare(8, 4, "WAVE") != 0) {
    throw InputError(where + "not a RIFF/WAVE file");
  }
  std::size_t off = 12;
  bool have_fmt = false;
  AudioSignal sig;
  while (off + 8 <= bytes.size()) {
    const std::string id = bytes.substr(off, 4);
    const std::uint32_t size = le32(bytes, off + 4);
    const std::size_t body = off + 8;
    if (body + size > bytes.size()) throw InputError(where + "truncated '" + id + "' chunk");
    if (id == "fmt ") {
      if (size < 16) throw InputError(where + "short fmt chunk");
      const std::uint16_t format = le16(bytes, body);
      const std::uint16_t channels = le16(bytes, body + 2);
      const std::uint32_t rate = le32(bytes, body + 4);
      const std::uint16_t bits = le16(bytes, body + 14);
      if (format != 1) {
        throw InputError(where + "audio format " + std::to_string(format) +
                         " is not PCM (1)");
      }
      if (channels != 1) {
        throw InputError(where + std::to_string(channels) + " channels; mono required");
      }
      if (bits != 16) {
        throw InputError(where + std::to_string(bits) + "-bit samples; 16-bit required");
      }
      sig.rate_hz = static_cast<int>(rate);
      if (!is_supported_rate(sig.rate_hz)) {
        throw InputError(where + "unsupported sample rate " + std::to_string(rate));
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw InputError(where + "data chunk before fmt chunk");
      const std::size_t n = size / 2;
      sig.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto raw = static_cast<std::int16_t>(le16(bytes, body + 2 * i));
        sig.samples[i] = static_cast<double>(raw) / 32768.0;
      }
      return sig;
    }
    off = body + size + (size & 1);
  }
  throw InputError(where + (have_fmt ? "missing data chunk" : "missing fmt chunk"));
}

void write_wav(const std::filesystem::path& path, const AudioSignal& signal) {
  validate(signal);
  const auto n = static_cast<std::uint32_t>(signal.samples.size());
  std::string b;
  b.reserve(44 + 2 * n);
  b += "RIFF";
  put32(b, 36 + 2 * n);
  b += "WAVEfmt ";
  put32(b, 16);
  put16(b, 1);
  put16(b, 1);
  put32(b, static_cast<std::uint32_t>(signal.rate_hz));
  put32(b, static_cast<std::uint32_t>(signal.rate_hz) * 2);
  put16(b, 2);
  put16(b, 16);
  b += "data";
  put32(b, 2 * n);
  for (double s : signal.samples) {
    const double clamped = std::clamp(s, -1.0, 32767.0 / 32768.0);
    put16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(clamped * 32768.0))));
  }
  write_file(path, b);
}

}  // namespace adspeech
