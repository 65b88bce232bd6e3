#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adspeech/audio.h"
#include "adspeech/corpus.h"
#include "adspeech/ling_features.h"

namespace adspeech {

// Synthetic corpus description. Each sample draws latent traits
// z ~ N(+-delta/2, sigma) (AD +, HC -) that drive filler rate, pronoun use,
// pause length, word repetition and tense switching; transcripts are built
// from per-task word pools with inline tags, parse trees and timings.
struct SynthSpec {
  std::string name = "SYN";
  std::array<std::size_t, kNumTasks> task_counts{100, 0, 0, 0};
  double ad_fraction = 0.5;
  double delta = 1.0;
  double sigma = 1.0;
  std::size_t subjects_per_class = 0;  // 0: one subject per sample
  int min_age = 50;
  int max_age = 90;
  int audio_rate_hz = 8000;

  std::size_t total() const;
  void validate() const;
};

inline constexpr std::size_t kNumTraits = 5;

struct SynthSample {
  SpeechSample sample;
  std::array<double, kNumTraits> traits{};
};

std::vector<SynthSample> synth_samples(const SynthSpec& spec, std::uint64_t seed);
Dataset synth_generate(const SynthSpec& spec, std::uint64_t seed);

// Harmonic tone bursts over every token interval (from the %time marks) on a
// low noise floor, quantized to 16 bits.
AudioSignal render_audio(const SpeechSample& sample, int rate_hz, std::uint64_t seed);

// Norm lexicons covering the synthetic vocabulary, values fixed per word.
std::vector<NormLexicon> synth_lexicons();

// Writes manifest.csv, transcripts/<id>.txt and, when with_audio, audio/<id>.wav
// under dir. Returns the written files relative to dir.
std::vector<std::filesystem::path> write_corpus(const std::filesystem::path& dir,
                                                const Dataset& dataset, bool with_audio,
                                                int audio_rate_hz, std::uint64_t seed);

// Writes lexicons/<kind>.csv and rules.txt under dir.
std::vector<std::filesystem::path> write_resources(const std::filesystem::path& dir,
                                                   const std::vector<NormLexicon>& lexicons,
                                                   const std::vector<ProductionRule>& rules);

}  // namespace adspeech
