#pragma once

#include <filesystem>
#include <vector>

namespace adspeech {

struct AudioSignal {
  std::vector<double> samples;  // in [-1, 1]
  int rate_hz = 16000;

  double duration_s() const {
    return static_cast<double>(samples.size()) / static_cast<double>(rate_hz);
  }
};

bool is_supported_rate(int rate_hz);
// Throws InputError on unsupported rate or non-finite samples.
void validate(const AudioSignal& signal);

// Mono 16-bit signed little-endian PCM only; anything else is rejected with a
// diagnostic naming the offending header field.
AudioSignal read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioSignal& signal);

}  // namespace adspeech
