#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adspeech/acoustic_features.h"
#include "adspeech/audio.h"
#include "adspeech/corpus.h"
#include "adspeech/features.h"
#include "adspeech/ling_features.h"

namespace adspeech {

struct ExtractionConfig {
  LinguisticResources linguistic;
  AcousticConfig acoustic;
};

// Linguistic features followed by acoustic features.
std::vector<std::string> feature_names(const ExtractionConfig& cfg);
NamedValues extract_features(const SpeechSample& sample, const std::optional<AudioSignal>& audio,
                             const ExtractionConfig& cfg);

// Supplies the recording of a sample, or nothing. May throw; the extractor then
// records a warning and treats the audio as absent.
using AudioSource = std::function<std::optional<AudioSignal>(const SpeechSample&)>;

// Reads sample.audio_path when set.
AudioSource audio_from_files();

struct ExtractionLog {
  std::vector<std::string> warnings;  // sample order
  std::vector<std::string> failed;    // sample ids whose extraction threw
};

// One row per sample in dataset order, computed in parallel. Samples whose
// extraction fails are left out of the table and listed in log.failed.
FeatureTable extract_dataset(const Dataset& dataset, const FeatureSchema& schema,
                             const ExtractionConfig& cfg, const AudioSource& audio,
                             ExtractionLog* log = nullptr);

}  // namespace adspeech
