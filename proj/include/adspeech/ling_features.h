#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "adspeech/corpus.h"
#include "adspeech/features.h"

namespace adspeech {

enum class NormKind { Frequency, Imageability, Valence, Arousal, Dominance };

std::string_view to_string(NormKind kind);
NormKind parse_norm_kind(std::string_view s);

// Word -> norm value; keys lowercase, values finite.
struct NormLexicon {
  NormKind kind = NormKind::Frequency;
  std::unordered_map<std::string, double> entries;
};

// CSV `word,value` with header.
NormLexicon load_lexicon(const std::filesystem::path& path, NormKind kind);

// A production LHS -> RHS... over phrase labels, e.g. NP -> DT NN.
struct ProductionRule {
  std::string lhs;
  std::vector<std::string> rhs;

  // Feature-name form "rule:NP->DT_NN".
  std::string feature_name() const;
  bool operator==(const ProductionRule&) const = default;
};

ProductionRule parse_rule(std::string_view text);
// One `LHS->RHS` per line.
std::vector<ProductionRule> load_rules(const std::filesystem::path& path);
std::vector<ProductionRule> default_rules();

struct LinguisticResources {
  std::vector<NormLexicon> lexicons;
  std::vector<ProductionRule> rules = default_rules();
  std::size_t mattr_window = 10;
  double cosine_cutoff = 0.001;
};

// Fills in POS/tense on untagged tokens: closed-class lists, then suffix rules
// (-ed past verb, -ing present verb, -ly adverb), defaulting to NOUN.
Token tag_fallback(Token token);

// Lowercased non-filler word forms of the whole sample, in order.
std::vector<std::string> content_words(const SpeechSample& sample);

// Mean type/token ratio over every contiguous window. std::nullopt for an empty
// token list. Throws InputError for window 0.
std::optional<double> mattr(const std::vector<std::string>& tokens, std::size_t window);

struct LexicalCounts {
  double filled_pauses_per_token = 0;
  double uh_per_token = 0;
  double interjections_per_token = 0;
  double numerals_per_token = 0;
  std::optional<double> noun_ratio;
};
// Counts over all tokens (fillers included). Missing when the sample has no tokens.
std::optional<LexicalCounts> lexical_counts(const SpeechSample& sample);

// Mean lexicon value over NOUN tokens found in the lexicon.
std::optional<double> norm_features(const SpeechSample& sample, const NormLexicon& lexicon);

struct SpeechGraphStats {
  double avg_total_degree = 0;
  double n_edges = 0;
  double avg_shortest_path = 0;
  double diameter = 0;
  std::optional<double> density;  // undefined for a single node
  double n_nodes = 0;
};
// Word-type graph with one directed edge per consecutive token pair.
std::optional<SpeechGraphStats> speech_graph(const std::vector<std::string>& tokens);

struct CoherenceStats {
  double cosine_cutoff_fraction = 0;
  double local_coherence_mean = 0;
  double global_coherence_mean = 0;
};
std::optional<CoherenceStats> coherence(const SpeechSample& sample, double cutoff);

std::optional<double> tense_switches(const SpeechSample& sample);

// rule feature name -> occurrences / total internal productions.
std::optional<std::map<std::string, double>> production_rules(
    const SpeechSample& sample, const std::vector<ProductionRule>& rules);

struct SyntacticComplexity {
  double clauses_per_tunit = 0;
  double clauses_per_sentence = 0;
};
std::optional<SyntacticComplexity> syntactic_complexity(const SpeechSample& sample);

// Every linguistic feature in canonical order.
NamedValues extract_linguistic(const SpeechSample& sample, const LinguisticResources& res);
std::vector<std::string> linguistic_feature_names(const LinguisticResources& res);

}  // namespace adspeech
