#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adspeech/anchors.h"
#include "adspeech/corpus.h"
#include "adspeech/embed.h"
#include "adspeech/models.h"
#include "adspeech/pipeline.h"
#include "adspeech/synth.h"

namespace adspeech::cli {

struct SynthCorpus {
  SynthSpec spec;
};

// Everything a command may read, after the config file and the flags are
// merged. Paths are absolute.
struct RunConfig {
  std::filesystem::path base_dir;  // relative paths resolve here
  std::optional<std::filesystem::path> config_file;

  std::uint64_t seed = 0;
  int jobs = 0;  // 0: OpenMP default
  std::filesystem::path out = "out";

  std::map<std::string, std::filesystem::path> datasets;  // name -> manifest
  std::optional<std::filesystem::path> features;          // default <out>/features.csv
  std::map<NormKind, std::filesystem::path> lexicons;
  std::optional<std::filesystem::path> rules;
  std::optional<std::filesystem::path> schema;

  AcousticConfig acoustic;
  std::size_t mattr_window = 10;
  double cosine_cutoff = 0.001;

  ModelSpec model;  // kind is overridden per command
  std::vector<ModelKind> models{std::begin(kAllModelKinds), std::end(kAllModelKinds)};
  ModelKind default_model = ModelKind::RF;
  int cv_k = 5;

  SearchConfig anchors;
  Fig2Config embed;
  int fairness_threshold = 60;
  std::vector<double> sweep_fractions{0.0, 0.25, 0.5, 0.75, 1.0};

  std::vector<SynthCorpus> synth;
  bool synth_audio = true;
  int synth_rate_hz = 8000;

  std::filesystem::path features_path() const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;
  // Path as written relative to base_dir, for run manifests.
  std::string display(const std::filesystem::path& p) const;
};

// Parses a JSON config; relative paths resolve against the file's directory.
// Referenced input files must exist.
RunConfig load_config(const std::filesystem::path& path);
RunConfig default_config();
void validate_paths(const RunConfig& cfg);

// NAME (+ [FRAC*]NAME)*, FRAC in [0, 1].
struct DatasetTerm {
  std::string name;
  double fraction = 1.0;
};
struct DatasetExpr {
  std::string base;
  std::vector<DatasetTerm> parts;
};
DatasetExpr parse_dataset_expr(std::string_view text);

// Runs the command line; returns the process exit code (0 ok, 1 input error,
// 2 runtime failure).
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace adspeech::cli
