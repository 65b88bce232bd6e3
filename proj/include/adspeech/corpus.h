#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adspeech/common.h"
#include "adspeech/parse_tree.h"

namespace adspeech {

enum class Pos : std::uint8_t { NOUN, VERB, ADJ, ADV, PRON, DET, INTJ, NUM, OTHER };
enum class Tense : std::uint8_t { PAST, PRESENT, FUTURE, NONE };

std::string_view to_string(Pos pos);
std::string_view to_string(Tense tense);
std::optional<Pos> parse_pos(std::string_view s);
std::optional<Tense> parse_tense(std::string_view s);

struct Token {
  std::string text;
  std::optional<Pos> pos;
  std::optional<Tense> tense;
  bool is_filler = false;

  bool operator==(const Token&) const = default;
};

struct Utterance {
  std::string speaker;
  std::vector<Token> tokens;
  std::optional<ParseNode> parse;
  std::optional<double> start_s;
  std::optional<double> end_s;

  bool operator==(const Utterance&) const = default;
};

struct SpeechSample {
  std::string sample_id;
  std::string subject_id;
  Task task = Task::PictureDescription;
  Label label = Label::HC;
  int age = 0;
  std::vector<Utterance> utterances;
  std::optional<std::filesystem::path> audio_path;

  bool operator==(const SpeechSample&) const = default;
};

struct Dataset {
  std::string name;
  std::vector<SpeechSample> samples;

  std::size_t size() const { return samples.size(); }
  std::size_t count(Label label) const;
};

inline constexpr int kMinAge = 18;
inline constexpr int kMaxAge = 110;

// Checks sample-level and dataset-level invariants; throws InputError.
void validate(const SpeechSample& sample);
void validate(const Dataset& dataset);

// --- Transcript format -------------------------------------------------------
//
//   # comment
//   PAR: the/DET cat/NOUN &uh sat/VERB:PAST
//   %parse: (S (NP (DT the) (NN cat)) (VP (VBD sat)))
//   %time: 0.00 1.25
//
// Token grammar is text[/POS[:TENSE]]; a leading '&' marks a filler. Fillers
// without an explicit tag are INTJ.
std::vector<Utterance> parse_transcript(std::string_view text);
std::string serialize_transcript(const std::vector<Utterance>& utterances);

// --- Manifest ---------------------------------------------------------------
//
// CSV header: sample_id,subject_id,task,label,age,transcript_path,audio_path.
// Relative paths resolve against the manifest's directory.
Dataset load_manifest(const std::filesystem::path& path);

struct ManifestRow {
  std::string sample_id;
  std::string subject_id;
  Task task;
  Label label;
  int age;
  std::string transcript_path;
  std::string audio_path;
};
void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRow>& rows);

// --- Dataset algebra --------------------------------------------------------

struct DatasetPart {
  const Dataset* dataset;
  double fraction;
};

// base plus floor(fraction * |part|) samples from each part, drawn uniformly
// without replacement.
Dataset combine(const Dataset& base, const std::vector<DatasetPart>& parts,
                std::uint64_t seed);

inline std::size_t combine_draw_count(double fraction, std::size_t part_size) {
  return static_cast<std::size_t>(fraction * static_cast<double>(part_size) +
                                  1e-9);
}

// Exactly n samples with min_age <= age < max_age.
Dataset filter_age_bin(const Dataset& d, int min_age, int max_age,
                       std::size_t n, std::uint64_t seed);

struct FoldPlan {
  int k = 0;
  std::map<std::string, int> assignment;  // sample_id -> fold

  int fold_of(const std::string& sample_id) const {
    return assignment.at(sample_id);
  }
};

// Subjects are shuffled by seed, then placed largest-first into the currently
// lightest fold (ties: lowest fold index).
FoldPlan stratified_subject_folds(const Dataset& d, int k, std::uint64_t seed);

// Fold index per row of `subject_ids` under the same rule.
std::vector<int> subject_folds(std::span<const std::string> subject_ids, int k,
                               std::uint64_t seed);

// Same rule on bare subject sizes; returns the fold of each subject in input order.
std::vector<int> assign_subjects_to_folds(const std::vector<std::size_t>& sizes,
                                          int k);

}  // namespace adspeech
