#include "adspeech/pipeline.h"

#include <fmt/format.h>

#include "adspeech/kernels.h"

namespace adspeech {

std::vector<std::string> feature_names(const ExtractionConfig& cfg) {
  auto names = linguistic_feature_names(cfg.linguistic);
  const auto acoustic = acoustic_feature_names(cfg.acoustic);
  names.insert(names.end(), acoustic.begin(), acoustic.end());
  return names;
}

NamedValues extract_features(const SpeechSample& sample, const std::optional<AudioSignal>& audio,
                             const ExtractionConfig& cfg) {
  NamedValues out = extract_linguistic(sample, cfg.linguistic);
  std::size_t n_tokens = 0;
  for (const auto& u : sample.utterances) n_tokens += u.tokens.size();
  out.append(extract_acoustic(audio, n_tokens, cfg.acoustic));
  return out;
}

AudioSource audio_from_files() {
  return [](const SpeechSample& s) -> std::optional<AudioSignal> {
    if (!s.audio_path) return std::nullopt;
    return read_wav(*s.audio_path);
  };
}

FeatureTable extract_dataset(const Dataset& dataset, const FeatureSchema& schema,
                             const ExtractionConfig& cfg, const AudioSource& audio,
                             ExtractionLog* log) {
  const std::size_t n = dataset.samples.size();
  std::vector<std::optional<FeatureVector>> rows(n);
  std::vector<std::string> warnings(n);
  std::vector<std::string> errors(n);
  kernels::omp::for_each_index(n, [&](std::size_t i) {
    const auto& s = dataset.samples[i];
    std::optional<AudioSignal> signal;
    try {
      signal = audio(s);
    } catch (const std::exception& e) {
      warnings[i] = fmt::format("{}: audio unusable, acoustic features missing ({})", s.sample_id,
                                e.what());
    }
    try {
      rows[i] = project(extract_features(s, signal, cfg), schema);
    } catch (const std::exception& e) {
      errors[i] = fmt::format("{}: {}", s.sample_id, e.what());
    }
  });

  FeatureTable table;
  table.schema = schema;
  table.values = Matrix(0, schema.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (log && !warnings[i].empty()) log->warnings.push_back(warnings[i]);
    if (!errors[i].empty()) {
      if (log) {
        log->warnings.push_back(errors[i]);
        log->failed.push_back(dataset.samples[i].sample_id);
      }
      continue;
    }
    table.sample_ids.push_back(dataset.samples[i].sample_id);
    table.values.append_row(rows[i]->values);
  }
  return table;
}

}  // namespace adspeech
