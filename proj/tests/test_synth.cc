#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "adspeech/audio.h"
#include "adspeech/synth.h"
#include "test_util.h"

namespace adspeech {
namespace {

TEST(Synth, CountsLabelsAndSubjects) {
  SynthSpec spec;
  spec.name = "S";
  spec.task_counts = {21, 10, 0, 4};
  spec.ad_fraction = 0.5;
  spec.subjects_per_class = 5;
  const Dataset d = synth_generate(spec, 3);
  ASSERT_EQ(d.size(), 35u);
  // per task: round(0.5 * n) AD
  EXPECT_EQ(d.count(Label::AD), 11u + 5u + 2u);
  std::set<std::string> subjects;
  for (const auto& s : d.samples) {
    subjects.insert(s.subject_id);
    EXPECT_GE(s.age, spec.min_age);
    EXPECT_LE(s.age, spec.max_age);
    EXPECT_FALSE(s.utterances.empty());
  }
  EXPECT_EQ(subjects.size(), 10u);
  // a subject keeps one label and one age
  for (const auto& a : d.samples) {
    for (const auto& b : d.samples) {
      if (a.subject_id != b.subject_id) continue;
      EXPECT_EQ(a.label, b.label);
      EXPECT_EQ(a.age, b.age);
    }
  }
}

TEST(Synth, DeterministicPerSeed) {
  SynthSpec spec;
  spec.task_counts = {30, 0, 0, 0};
  EXPECT_EQ(synth_generate(spec, 5).samples, synth_generate(spec, 5).samples);
  EXPECT_NE(synth_generate(spec, 5).samples, synth_generate(spec, 6).samples);
}

TEST(Synth, TraitsShiftWithDelta) {
  SynthSpec spec;
  spec.task_counts = {400, 0, 0, 0};
  spec.delta = 2.0;
  double sum[2] = {0, 0};
  for (const auto& s : synth_samples(spec, 1)) {
    for (double z : s.traits) sum[static_cast<int>(s.sample.label)] += z;
  }
  const double per_class = 200.0 * kNumTraits;
  EXPECT_NEAR(sum[1] / per_class, 1.0, 0.15);
  EXPECT_NEAR(sum[0] / per_class, -1.0, 0.15);
}

TEST(Synth, Validation) {
  SynthSpec s;
  s.task_counts = {0, 0, 0, 0};
  EXPECT_THROW(s.validate(), InputError);
  s = {};
  s.ad_fraction = 1.2;
  EXPECT_THROW(s.validate(), InputError);
  s = {};
  s.name = "a b";
  EXPECT_THROW(s.validate(), InputError);
  s = {};
  s.min_age = 90;
  s.max_age = 50;
  EXPECT_THROW(s.validate(), InputError);
}

TEST(Synth, AudioCoversTheTimeline) {
  SynthSpec spec;
  spec.task_counts = {2, 0, 0, 0};
  const Dataset d = synth_generate(spec, 2);
  const SpeechSample& s = d.samples[0];
  const AudioSignal a = render_audio(s, 8000, 1);
  EXPECT_EQ(a.rate_hz, 8000);
  EXPECT_GE(a.duration_s(), *s.utterances.back().end_s);
  for (double v : a.samples) {
    EXPECT_GE(v, -1.0);
    EXPECT_LT(v, 1.0);
    EXPECT_EQ(v * 32768.0, std::round(v * 32768.0));
  }
  EXPECT_EQ(render_audio(s, 8000, 1).samples, a.samples);
  EXPECT_THROW(render_audio(s, 12345, 1), InputError);
}

TEST(Synth, CorpusRoundTripsThroughManifest) {
  testing::TempDir dir("synthcorpus");
  SynthSpec spec;
  spec.name = "RT";
  spec.task_counts = {4, 2, 2, 2};
  spec.subjects_per_class = 2;
  const Dataset d = synth_generate(spec, 9);
  const auto files = write_corpus(dir.path(), d, true, 8000, 4);
  EXPECT_EQ(files.front(), "manifest.csv");
  EXPECT_EQ(files.size(), 1 + 2 * d.size());
  Dataset back = load_manifest(dir.path() / "manifest.csv");
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back.samples[i].utterances, d.samples[i].utterances);
    EXPECT_EQ(back.samples[i].subject_id, d.samples[i].subject_id);
    ASSERT_TRUE(back.samples[i].audio_path.has_value());
    EXPECT_EQ(read_wav(*back.samples[i].audio_path).rate_hz, 8000);
  }
  const auto res = write_resources(dir.path(), synth_lexicons(), {});
  EXPECT_EQ(res.back(), "rules.txt");
  EXPECT_EQ(res.size(), synth_lexicons().size() + 1);
}

TEST(Synth, LexiconsCoverVocabulary) {
  SynthSpec spec;
  spec.task_counts = {20, 0, 0, 0};
  const Dataset d = synth_generate(spec, 1);
  const auto lex = synth_lexicons();
  ASSERT_EQ(lex.size(), 5u);
  std::size_t nouns = 0, covered = 0;
  for (const auto& s : d.samples) {
    for (const auto& u : s.utterances) {
      for (const auto& t : u.tokens) {
        if (t.pos != Pos::NOUN) continue;
        ++nouns;
        std::string w = t.text;
        std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return std::tolower(c); });
        covered += lex[0].entries.count(w);
      }
    }
  }
  EXPECT_GT(nouns, 0u);
  EXPECT_EQ(covered, nouns);
}

}  // namespace
}  // namespace adspeech
