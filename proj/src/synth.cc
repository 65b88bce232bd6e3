#include "adspeech/synth.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <fmt/format.h>

#include "adspeech/io.h"
#include "adspeech/rng.h"

namespace adspeech {
namespace {

struct Verb {
  const char* base;
  const char* past;
  const char* present;
};

struct Vocab {
  std::vector<std::string> nouns;
  std::vector<Verb> verbs;
};

const Vocab& picture_vocab() {
  static const Vocab v{
      {"boy", "girl", "cookie", "jar", "stool", "mother", "sink", "water", "window", "plate",
       "dishes", "curtain", "cupboard", "kitchen", "floor", "towel"},
      {{"take", "took", "takes"},
       {"reach", "reached", "reaches"},
       {"fall", "fell", "falls"},
       {"wash", "washed", "washes"},
       {"dry", "dried", "dries"},
       {"spill", "spilled", "spills"},
       {"hold", "held", "holds"},
       {"grab", "grabbed", "grabs"},
       {"see", "saw", "sees"},
       {"open", "opened", "opens"}}};
  return v;
}

const Vocab& conversation_vocab() {
  static const Vocab v{
      {"family", "weekend", "garden", "church", "doctor", "car", "town", "dinner", "friend",
       "job", "house", "daughter", "son", "story", "school", "market"},
      {{"visit", "visited", "visits"},
       {"like", "liked", "likes"},
       {"cook", "cooked", "cooks"},
       {"drive", "drove", "drives"},
       {"call", "called", "calls"},
       {"see", "saw", "sees"},
       {"eat", "ate", "eats"},
       {"play", "played", "plays"},
       {"find", "found", "finds"},
       {"help", "helped", "helps"}}};
  return v;
}

const std::vector<std::string>& animals() {
  static const std::vector<std::string> v{"dog",   "cat",   "horse", "cow",    "lion",
                                          "tiger", "bear",  "sheep", "goat",   "rabbit",
                                          "mouse", "eagle", "snake", "monkey", "zebra",
                                          "camel", "whale", "duck",  "fox",    "deer"};
  return v;
}

const Vocab& passage_vocab() {
  static const Vocab v{{"grandfather", "coat", "beard", "morning", "walk", "piano", "letter",
                        "garden", "son", "bench"},
                       {{"wear", "wore", "wears"},
                        {"play", "played", "plays"},
                        {"write", "wrote", "writes"},
                        {"take", "took", "takes"},
                        {"like", "liked", "likes"}}};
  return v;
}

const std::vector<std::string> kAdjectives{"little", "big", "wet", "old", "small", "dirty"};
const std::vector<std::string> kAdverbs{"there", "now", "really", "quickly", "slowly"};
const std::vector<std::string> kPronouns{"he", "she", "they"};

constexpr double kFillerGap = 0.25;
constexpr double kWordGap = 0.02;

double token_duration(const Token& t) {
  if (t.is_filler) return 0.3;
  return 0.2 + 0.02 * static_cast<double>(std::min<std::size_t>(t.text.size(), 8));
}

double round_ms(double t) { return std::round(t * 1000.0) / 1000.0; }

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Behaviour {
  double p_filler;
  double p_noun;
  double pause_log_mean;
  double p_repeat;
  double p_switch;
};

Behaviour behaviour(const std::array<double, kNumTraits>& z) {
  return {logistic(-2.2 + 0.9 * z[0]), logistic(0.9 - 0.9 * z[1]), std::log(0.5) + 0.45 * z[2],
          logistic(-2.0 + 0.9 * z[3]), logistic(-1.8 + 0.9 * z[4])};
}

ParseNode leaf(std::string tag, std::string word) {
  return ParseNode{std::move(tag), {ParseNode{std::move(word), {}}}};
}

// Builds one utterance: tagged tokens with optional filler insertions and the
// parse tree over the non-filler words.
class SentenceBuilder {
 public:
  SentenceBuilder(Rng& rng, const Behaviour& b, std::map<std::string, std::vector<std::string>>& used)
      : rng_(rng), b_(b), used_(used) {}

  std::vector<Token> tokens;

  void word(const std::string& text, Pos pos, std::optional<Tense> tense = std::nullopt) {
    if (rng_.bernoulli(b_.p_filler)) {
      tokens.push_back(Token{rng_.bernoulli(0.6) ? "uh" : "um", Pos::INTJ, std::nullopt, true});
    }
    tokens.push_back(Token{text, pos, tense, false});
  }

  std::string choose(const std::vector<std::string>& pool, const std::string& category) {
    auto& seen = used_[category];
    std::string w = !seen.empty() && rng_.bernoulli(b_.p_repeat) ? seen[rng_.index(seen.size())]
                                                                  : pool[rng_.index(pool.size())];
    seen.push_back(w);
    return w;
  }

  ParseNode noun_phrase(const Vocab& v, bool allow_pronoun, bool object) {
    if (allow_pronoun && !rng_.bernoulli(b_.p_noun)) {
      const std::string p = object ? "it" : kPronouns[rng_.index(kPronouns.size())];
      word(p, Pos::PRON);
      return ParseNode{"NP", {leaf("PRP", p)}};
    }
    const std::string det = rng_.bernoulli(0.7) ? "the" : "a";
    word(det, Pos::DET);
    ParseNode np{"NP", {leaf("DT", det)}};
    if (rng_.bernoulli(0.2)) {
      const std::string adj = kAdjectives[rng_.index(kAdjectives.size())];
      word(adj, Pos::ADJ);
      np.children.push_back(leaf("JJ", adj));
    }
    const std::string noun = choose(v.nouns, "noun");
    word(noun, Pos::NOUN);
    np.children.push_back(leaf("NN", noun));
    return np;
  }

  ParseNode clause(const Vocab& v, Tense tense, bool allow_pronoun, bool allow_embedding) {
    ParseNode s{"S", {noun_phrase(v, allow_pronoun, false)}};
    const char* vtag = tense == Tense::PAST ? "VBD" : "VBZ";
    if (allow_embedding && rng_.bernoulli(0.2)) {
      const std::string say = tense == Tense::PAST ? "said" : "says";
      word(say, Pos::VERB, tense);
      word("that", Pos::OTHER);
      ParseNode sbar{"SBAR", {leaf("IN", "that"), clause(v, tense, allow_pronoun, false)}};
      s.children.push_back(ParseNode{"VP", {leaf(vtag, say), std::move(sbar)}});
      return s;
    }
    const Verb& verb = v.verbs[rng_.index(v.verbs.size())];
    const std::string form = tense == Tense::PAST ? verb.past : verb.present;
    word(form, Pos::VERB, tense);
    ParseNode vp{"VP", {leaf(vtag, form)}};
    if (rng_.bernoulli(0.7)) vp.children.push_back(noun_phrase(v, allow_pronoun, true));
    if (rng_.bernoulli(0.2)) {
      const std::string adv = kAdverbs[rng_.index(kAdverbs.size())];
      word(adv, Pos::ADV);
      vp.children.push_back(ParseNode{"ADVP", {leaf("RB", adv)}});
    }
    s.children.push_back(std::move(vp));
    return s;
  }

 private:
  Rng& rng_;
  const Behaviour& b_;
  std::map<std::string, std::vector<std::string>>& used_;
};

struct PassageSentence {
  std::vector<Token> tokens;
  ParseNode parse;
};

const std::vector<PassageSentence>& passage() {
  static const std::vector<PassageSentence> p = [] {
    Rng rng(0x9A55A6E);
    const Behaviour plain{0.0, 1.0, 0.0, 0.0, 0.0};
    std::map<std::string, std::vector<std::string>> used;
    std::vector<PassageSentence> out;
    for (int i = 0; i < 5; ++i) {
      SentenceBuilder b(rng, plain, used);
      ParseNode tree = b.clause(passage_vocab(), Tense::PAST, false, i == 2);
      out.push_back({std::move(b.tokens), std::move(tree)});
    }
    return out;
  }();
  return p;
}

// Start/end of every token when the utterance begins at `start`.
std::vector<std::pair<double, double>> token_layout(const Utterance& u, double start) {
  std::vector<std::pair<double, double>> out;
  double t = start;
  for (const auto& tok : u.tokens) {
    if (tok.is_filler) t += kFillerGap;
    const double d = token_duration(tok);
    out.emplace_back(t, t + d);
    t += d + kWordGap;
  }
  return out;
}

std::vector<Utterance> make_utterances(Task task, const Behaviour& b, Rng& rng) {
  std::vector<Utterance> utts;
  std::map<std::string, std::vector<std::string>> used;
  const auto speaker = "PAR";
  switch (task) {
    case Task::PictureDescription:
    case Task::Conversation: {
      const Vocab& v = task == Task::PictureDescription ? picture_vocab() : conversation_vocab();
      Tense tense = rng.bernoulli(task == Task::PictureDescription ? 0.7 : 0.3) ? Tense::PRESENT
                                                                                : Tense::PAST;
      const std::size_t n = 6 + rng.index(4);
      for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && rng.bernoulli(b.p_switch)) {
          tense = tense == Tense::PAST ? Tense::PRESENT : Tense::PAST;
        }
        SentenceBuilder sb(rng, b, used);
        ParseNode tree = sb.clause(v, tense, true, true);
        utts.push_back(Utterance{speaker, std::move(sb.tokens), std::move(tree), {}, {}});
      }
      break;
    }
    case Task::Fluency: {
      const std::size_t n = 4 + rng.index(4);
      for (std::size_t i = 0; i < n; ++i) {
        SentenceBuilder sb(rng, b, used);
        const std::size_t words = 3 + rng.index(4);
        for (std::size_t w = 0; w < words; ++w) sb.word(sb.choose(animals(), "noun"), Pos::NOUN);
        utts.push_back(Utterance{speaker, std::move(sb.tokens), std::nullopt, {}, {}});
      }
      break;
    }
    case Task::ParagraphReading: {
      for (const auto& sentence : passage()) {
        Utterance u{speaker, {}, sentence.parse, {}, {}};
        for (const auto& tok : sentence.tokens) {
          if (rng.bernoulli(b.p_filler)) {
            u.tokens.push_back(Token{rng.bernoulli(0.6) ? "uh" : "um", Pos::INTJ, std::nullopt, true});
          }
          u.tokens.push_back(tok);
          if (rng.bernoulli(0.5 * b.p_repeat)) u.tokens.push_back(tok);
        }
        utts.push_back(std::move(u));
      }
      break;
    }
  }

  double t = round_ms(0.3 + 0.2 * rng.uniform());
  for (auto& u : utts) {
    u.start_s = t;
    const auto layout = token_layout(u, t);
    u.end_s = round_ms(layout.back().second);
    const double gap = std::exp(b.pause_log_mean + 0.25 * rng.normal());
    t = round_ms(*u.end_s + std::clamp(gap, 0.08, 4.0));
  }
  return utts;
}

}  // namespace

std::size_t SynthSpec::total() const {
  std::size_t n = 0;
  for (auto c : task_counts) n += c;
  return n;
}

void SynthSpec::validate() const {
  if (total() == 0) throw InputError("synth: at least one sample required");
  if (!(ad_fraction >= 0 && ad_fraction <= 1)) throw InputError("synth: ad_fraction must lie in [0, 1]");
  if (!std::isfinite(delta)) throw InputError("synth: delta must be finite");
  if (!(sigma >= 0) || !std::isfinite(sigma)) throw InputError("synth: sigma must be >= 0");
  if (min_age < kMinAge || max_age > kMaxAge || min_age > max_age) {
    throw InputError(fmt::format("synth: ages must satisfy {} <= min_age <= max_age <= {}", kMinAge,
                                 kMaxAge));
  }
  if (!is_supported_rate(audio_rate_hz)) {
    throw InputError(fmt::format("synth: unsupported audio rate {}", audio_rate_hz));
  }
  if (name.empty() || name.find_first_of(",/\\ \"") != std::string::npos) {
    throw InputError("synth: name must be non-empty without spaces, commas, quotes or slashes");
  }
}

std::vector<SynthSample> synth_samples(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<SynthSample> out;
  std::size_t class_counter[2] = {0, 0};
  std::size_t index = 0;
  for (int t = 0; t < kNumTasks; ++t) {
    const std::size_t count = spec.task_counts[t];
    const auto n_ad = static_cast<std::size_t>(std::floor(spec.ad_fraction * static_cast<double>(count) + 0.5));
    for (std::size_t i = 0; i < count; ++i, ++index) {
      const Task task = static_cast<Task>(t);
      const Label label = i < n_ad ? Label::AD : Label::HC;
      const int c = static_cast<int>(label);
      const std::size_t j = class_counter[c]++;
      const std::size_t subject = spec.subjects_per_class ? j % spec.subjects_per_class : j;

      SynthSample s;
      s.sample.sample_id = fmt::format("{}-{}-{:04d}", spec.name, manifest_name(task), index);
      s.sample.subject_id = fmt::format("{}-{}{:03d}", spec.name, to_string(label), subject);
      s.sample.task = task;
      s.sample.label = label;
      Rng age_rng(derive_seed(seed, {0xA6E, static_cast<std::uint64_t>(c), subject}));
      s.sample.age = spec.min_age + static_cast<int>(age_rng.index(
                                        static_cast<std::size_t>(spec.max_age - spec.min_age + 1)));

      Rng rng(derive_seed(seed, {0x5A4D, index}));
      const double mean = (label == Label::AD ? 0.5 : -0.5) * spec.delta;
      for (auto& z : s.traits) z = rng.normal(mean, spec.sigma);
      s.sample.utterances = make_utterances(task, behaviour(s.traits), rng);
      out.push_back(std::move(s));
    }
  }
  return out;
}

Dataset synth_generate(const SynthSpec& spec, std::uint64_t seed) {
  Dataset d;
  d.name = spec.name;
  for (auto& s : synth_samples(spec, seed)) d.samples.push_back(std::move(s.sample));
  validate(d);
  return d;
}

AudioSignal render_audio(const SpeechSample& sample, int rate_hz, std::uint64_t seed) {
  if (!is_supported_rate(rate_hz)) throw InputError(fmt::format("unsupported audio rate {}", rate_hz));
  double end = 0;
  for (const auto& u : sample.utterances) {
    if (!u.start_s || !u.end_s) throw InputError(sample.sample_id + ": utterance without timing");
    end = std::max(end, *u.end_s);
  }
  const double rate = static_cast<double>(rate_hz);
  const auto n = static_cast<std::size_t>(std::ceil((end + 0.4) * rate));
  AudioSignal sig;
  sig.rate_hz = rate_hz;
  sig.samples.resize(n);
  Rng rng(derive_seed(seed, {0xA0D1, fnv1a(sample.sample_id)}));
  for (auto& x : sig.samples) x = 0.002 * rng.normal();

  constexpr double kRamp = 0.01;
  for (const auto& u : sample.utterances) {
    const auto layout = token_layout(u, *u.start_s);
    for (std::size_t k = 0; k < u.tokens.size(); ++k) {
      const Token& tok = u.tokens[k];
      const double f0 = tok.is_filler ? 90.0 : 100.0 + 12.0 * static_cast<double>(tok.text.size() % 6);
      const double amp = tok.is_filler ? 0.12 : 0.2;
      const auto [t0, t1] = layout[k];
      const auto i0 = static_cast<std::size_t>(t0 * rate);
      const auto i1 = std::min(n, static_cast<std::size_t>(t1 * rate));
      for (std::size_t i = i0; i < i1; ++i) {
        const double t = static_cast<double>(i) / rate;
        const double env = std::min({1.0, (t - t0) / kRamp, (t1 - t) / kRamp});
        const double w = 2.0 * std::numbers::pi * f0 * t;
        sig.samples[i] +=
            amp * std::max(env, 0.0) * (std::sin(w) + 0.5 * std::sin(2 * w) + 0.25 * std::sin(3 * w));
      }
    }
  }
  for (auto& x : sig.samples) {
    x = std::clamp(std::round(std::clamp(x, -1.0, 1.0) * 32768.0), -32768.0, 32767.0) / 32768.0;
  }
  return sig;
}

std::vector<NormLexicon> synth_lexicons() {
  std::vector<std::string> words;
  for (const Vocab* v : {&picture_vocab(), &conversation_vocab(), &passage_vocab()}) {
    words.insert(words.end(), v->nouns.begin(), v->nouns.end());
  }
  words.insert(words.end(), animals().begin(), animals().end());
  static constexpr std::pair<NormKind, std::pair<double, double>> kRanges[] = {
      {NormKind::Frequency, {1.0, 7.0}},
      {NormKind::Imageability, {100.0, 700.0}},
      {NormKind::Valence, {1.0, 9.0}},
      {NormKind::Arousal, {1.0, 9.0}},
      {NormKind::Dominance, {1.0, 9.0}}};
  std::vector<NormLexicon> out;
  for (const auto& [kind, range] : kRanges) {
    NormLexicon lex;
    lex.kind = kind;
    for (const auto& w : words) {
      const std::uint64_t h = splitmix64(fnv1a(w) ^ static_cast<std::uint64_t>(kind));
      const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
      lex.entries[w] = std::round((range.first + u * (range.second - range.first)) * 100.0) / 100.0;
    }
    out.push_back(std::move(lex));
  }
  return out;
}

std::vector<std::filesystem::path> write_corpus(const std::filesystem::path& dir,
                                                const Dataset& dataset, bool with_audio,
                                                int audio_rate_hz, std::uint64_t seed) {
  std::vector<std::filesystem::path> files;
  std::vector<ManifestRow> rows;
  for (const auto& s : dataset.samples) {
    ManifestRow row{s.sample_id, s.subject_id, s.task, s.label, s.age, {}, {}};
    const std::filesystem::path transcript = std::filesystem::path("transcripts") / (s.sample_id + ".txt");
    write_file(dir / transcript, "# " + s.sample_id + "\n" + serialize_transcript(s.utterances));
    row.transcript_path = transcript.generic_string();
    files.push_back(transcript);
    if (with_audio) {
      const std::filesystem::path wav = std::filesystem::path("audio") / (s.sample_id + ".wav");
      write_wav(dir / wav, render_audio(s, audio_rate_hz, seed));
      row.audio_path = wav.generic_string();
      files.push_back(wav);
    }
    rows.push_back(std::move(row));
  }
  write_manifest(dir / "manifest.csv", rows);
  files.insert(files.begin(), "manifest.csv");
  return files;
}

std::vector<std::filesystem::path> write_resources(const std::filesystem::path& dir,
                                                   const std::vector<NormLexicon>& lexicons,
                                                   const std::vector<ProductionRule>& rules) {
  std::vector<std::filesystem::path> files;
  for (const auto& lex : lexicons) {
    std::vector<std::pair<std::string, double>> entries(lex.entries.begin(), lex.entries.end());
    std::sort(entries.begin(), entries.end());
    std::string text = "word,value\n";
    for (const auto& [w, v] : entries) text += fmt::format("{},{}\n", csv_escape(w), format_double(v));
    const std::filesystem::path rel = std::filesystem::path("lexicons") / (std::string(to_string(lex.kind)) + ".csv");
    write_file(dir / rel, text);
    files.push_back(rel);
  }
  std::string text;
  for (const auto& r : rules) {
    text += r.lhs + "->";
    for (std::size_t i = 0; i < r.rhs.size(); ++i) text += (i ? " " : "") + r.rhs[i];
    text += "\n";
  }
  write_file(dir / "rules.txt", text);
  files.emplace_back("rules.txt");
  return files;
}

}  // namespace adspeech
