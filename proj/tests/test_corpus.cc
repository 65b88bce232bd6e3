#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "adspeech/corpus.h"
#include "adspeech/io.h"
#include "test_util.h"

namespace adspeech {
namespace {

using testing::make_sample;
using testing::TempDir;

TEST(Transcript, TaggedLine) {
  const auto u = parse_transcript("SUBJ: the/DET cat/NOUN &uh sat/VERB:PAST");
  ASSERT_EQ(u.size(), 1u);
  EXPECT_EQ(u[0].speaker, "SUBJ");
  ASSERT_EQ(u[0].tokens.size(), 4u);
  EXPECT_TRUE(u[0].tokens[2].is_filler);
  EXPECT_EQ(u[0].tokens[2].text, "uh");
  EXPECT_EQ(u[0].tokens[2].pos, Pos::INTJ);
  EXPECT_EQ(u[0].tokens[3].tense, Tense::PAST);
  EXPECT_EQ(u[0].tokens[3].pos, Pos::VERB);
  EXPECT_EQ(u[0].tokens[1].pos, Pos::NOUN);
}

TEST(Transcript, EmptyText) {
  EXPECT_TRUE(parse_transcript("").empty());
  EXPECT_TRUE(parse_transcript("# only a comment\n\n").empty());
}

TEST(Transcript, ParseBindsToPreviousUtterance) {
  const auto u = parse_transcript(
      "PAR: the/DET cat/NOUN sat/VERB:PAST\n"
      "%parse: (S (NP (DT the)(NN cat))(VP (VBD sat)))\n"
      "PAR: it/PRON ran/VERB:PAST\n");
  ASSERT_EQ(u.size(), 2u);
  ASSERT_TRUE(u[0].parse.has_value());
  EXPECT_EQ(u[0].parse->label, "S");
  EXPECT_FALSE(u[1].parse.has_value());
}

TEST(Transcript, TimeDirective) {
  const auto u = parse_transcript("PAR: hello\n%time: 0.5 1.25\n");
  ASSERT_EQ(u.size(), 1u);
  EXPECT_DOUBLE_EQ(*u[0].start_s, 0.5);
  EXPECT_DOUBLE_EQ(*u[0].end_s, 1.25);
  EXPECT_THROW(parse_transcript("PAR: hello\n%time: 2 1\n"), ParseError);
}

TEST(Transcript, MalformedTagReportsLine) {
  try {
    parse_transcript("PAR: fine/NOUN\nPAR: bad/XYZ\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(parse_transcript("PAR: sat/VERB:WHEN"), ParseError);
}

TEST(Transcript, UnbalancedParse) {
  try {
    parse_transcript("PAR: a/DET\n%parse: (S (NP (DT a))\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(parse_transcript("%parse: (S (X y))\n"), ParseError);
}

TEST(Transcript, RoundTrip) {
  const std::string text =
      "PAR: the/DET cat/NOUN &uh sat/VERB:PAST quickly\n"
      "%parse: (S (NP (DT the) (NN cat)) (VP (VBD sat)))\n"
      "%time: 0 1.5\n"
      "INV: &um what/PRON\n";
  const auto u = parse_transcript(text);
  EXPECT_EQ(parse_transcript(serialize_transcript(u)), u);
  EXPECT_EQ(serialize_transcript(parse_transcript(serialize_transcript(u))),
            serialize_transcript(u));
}

class ManifestTest : public ::testing::Test {
 protected:
  TempDir dir{"manifest"};

  void write_transcript(const std::string& name, const std::string& text) {
    write_file(dir.path() / name, text);
  }
};

TEST_F(ManifestTest, ThreeRows) {
  write_transcript("a.txt", "PAR: the/DET cat/NOUN\n");
  write_transcript("b.txt", "PAR: a/DET dog/NOUN\n");
  write_transcript("c.txt", "PAR: &uh\n");
  write_file(dir.path() / "m.csv",
             "sample_id,subject_id,task,label,age,transcript_path,audio_path\n"
             "s1,p1,picture,AD,70,a.txt,a.wav\n"
             "s2,p1,fluency,AD,71,b.txt,\n"
             "s3,p2,conversation,HC,65,c.txt,\n");
  const Dataset d = load_manifest(dir.path() / "m.csv");
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.samples[1].task, Task::Fluency);
  EXPECT_EQ(d.samples[2].label, Label::HC);
  ASSERT_TRUE(d.samples[0].audio_path.has_value());
  EXPECT_EQ(*d.samples[0].audio_path, dir.path() / "a.wav");
  EXPECT_FALSE(d.samples[1].audio_path.has_value());
  EXPECT_EQ(d.count(Label::AD), 2u);
}

TEST_F(ManifestTest, AgeOutOfRangeNamesRow) {
  write_transcript("a.txt", "PAR: the/DET cat/NOUN\n");
  write_file(dir.path() / "m.csv",
             "sample_id,subject_id,task,label,age,transcript_path,audio_path\n"
             "s1,p1,picture,AD,150,a.txt,\n");
  try {
    load_manifest(dir.path() / "m.csv");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("s1"), std::string::npos) << e.what();
  }
}

TEST_F(ManifestTest, DuplicateIdAndMissingTranscript) {
  write_transcript("a.txt", "PAR: the/DET cat/NOUN\n");
  write_file(dir.path() / "dup.csv",
             "sample_id,subject_id,task,label,age,transcript_path,audio_path\n"
             "s1,p1,picture,AD,70,a.txt,\n"
             "s1,p2,picture,HC,70,a.txt,\n");
  EXPECT_THROW(load_manifest(dir.path() / "dup.csv"), InputError);
  write_file(dir.path() / "missing.csv",
             "sample_id,subject_id,task,label,age,transcript_path,audio_path\n"
             "s1,p1,picture,AD,70,nope.txt,\n");
  EXPECT_THROW(load_manifest(dir.path() / "missing.csv"), InputError);
}

TEST_F(ManifestTest, WriteThenLoad) {
  write_transcript("a.txt", "PAR: the/DET cat/NOUN\n");
  write_manifest(dir.path() / "w.csv",
                 {{"x1", "p1", Task::ParagraphReading, Label::HC, 44, "a.txt", ""}});
  const Dataset d = load_manifest(dir.path() / "w.csv");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.samples[0].task, Task::ParagraphReading);
  EXPECT_EQ(d.samples[0].age, 44);
}

std::string fmt_id(int s, int j) { return "s" + std::to_string(s) + "_" + std::to_string(j); }

Dataset numbered(const std::string& prefix, std::size_t n, Label label) {
  Dataset d;
  d.name = prefix;
  for (std::size_t i = 0; i < n; ++i) {
    d.samples.push_back(make_sample(prefix + std::to_string(i), prefix + "s" + std::to_string(i),
                                    label, "PAR: word/NOUN", Task::PictureDescription,
                                    30 + static_cast<int>(i % 60)));
  }
  return d;
}

TEST(Combine, FloorOfFractionTimesSize) {
  const Dataset base = numbered("db", 229, Label::HC);
  const Dataset part = numbered("h", 427, Label::HC);
  const Dataset out = combine(base, {{&part, 0.29}}, 5);
  EXPECT_EQ(out.size(), 229u + 123u);
  EXPECT_EQ(out.count(Label::HC), 352u);
}

TEST(Combine, FractionZeroAndOne) {
  const Dataset base = numbered("b", 10, Label::AD);
  const Dataset part = numbered("p", 7, Label::HC);
  const Dataset zero = combine(base, {{&part, 0.0}}, 1);
  EXPECT_EQ(zero.samples, base.samples);
  EXPECT_EQ(combine(base, {{&part, 1.0}}, 1).size(), 17u);
  EXPECT_THROW(combine(base, {{&part, 1.5}}, 1), InputError);
}

TEST(Combine, SizeLawAndDeterminism) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Dataset base = numbered("b", gen() % 20, Label::AD);
    const Dataset p1 = numbered("p", 1 + gen() % 50, Label::HC);
    const Dataset p2 = numbered("q", 1 + gen() % 50, Label::HC);
    const double f1 = static_cast<double>(gen() % 101) / 100.0;
    const double f2 = static_cast<double>(gen() % 101) / 100.0;
    const Dataset a = combine(base, {{&p1, f1}, {&p2, f2}}, trial);
    const Dataset b = combine(base, {{&p1, f1}, {&p2, f2}}, trial);
    const auto floor_count = [](double f, std::size_t n) {
      // exact decimal arithmetic on hundredths
      return static_cast<std::size_t>(std::llround(f * 100) * static_cast<long long>(n) / 100);
    };
    EXPECT_EQ(a.size(), base.size() + floor_count(f1, p1.size()) + floor_count(f2, p2.size()));
    EXPECT_EQ(a.samples, b.samples);
  }
}

TEST(FilterAgeBin, DrawsFromBin) {
  Dataset d;
  for (int i = 0; i < 120; ++i) {
    d.samples.push_back(make_sample("s" + std::to_string(i), "p" + std::to_string(i), Label::HC,
                                    "PAR: w/NOUN", Task::PictureDescription, i < 80 ? 30 + i % 15 : 60));
  }
  const Dataset out = filter_age_bin(d, 30, 45, 50, 9);
  ASSERT_EQ(out.size(), 50u);
  for (const auto& s : out.samples) {
    EXPECT_GE(s.age, 30);
    EXPECT_LT(s.age, 45);
  }
  EXPECT_EQ(filter_age_bin(d, 30, 45, 0, 9).size(), 0u);
  try {
    filter_age_bin(d, 60, 61, 50, 9);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("40 available"), std::string::npos) << e.what();
  }
}

TEST(Folds, TenSubjectsFiveFolds) {
  Dataset d = numbered("s", 10, Label::HC);
  const FoldPlan plan = stratified_subject_folds(d, 5, 2);
  std::map<int, int> per_fold;
  for (const auto& [id, f] : plan.assignment) ++per_fold[f];
  ASSERT_EQ(per_fold.size(), 5u);
  for (const auto& [f, n] : per_fold) EXPECT_EQ(n, 2);
}

TEST(Folds, TooFewSubjects) {
  Dataset d;
  for (int i = 0; i < 7; ++i) {
    d.samples.push_back(make_sample("s" + std::to_string(i), "only", Label::AD));
  }
  EXPECT_THROW(stratified_subject_folds(d, 5, 0), InputError);
}

TEST(Folds, GreedyLargestFirst) {
  const auto folds = assign_subjects_to_folds({4, 3, 2, 1}, 2);
  EXPECT_EQ(folds[0], folds[3]);
  EXPECT_EQ(folds[1], folds[2]);
  EXPECT_NE(folds[0], folds[1]);
}

// Exhaustive oracle: the greedy result balances as well as any assignment on
// tiny instances where greedy is known to be optimal (two folds, sizes <= 4).
TEST(Folds, GreedyMatchesBruteForceOnSmallPairs) {
  const std::vector<std::vector<std::size_t>> cases = {{4, 3, 2, 1}, {2, 2, 2, 2}, {3, 1, 1, 1}};
  for (const auto& sizes : cases) {
    const auto folds = assign_subjects_to_folds(sizes, 2);
    std::size_t load[2] = {0, 0};
    for (std::size_t i = 0; i < sizes.size(); ++i) load[folds[i]] += sizes[i];
    std::size_t best = SIZE_MAX;
    for (unsigned mask = 0; mask < (1u << sizes.size()); ++mask) {
      std::size_t a = 0, b = 0;
      for (std::size_t i = 0; i < sizes.size(); ++i) ((mask >> i) & 1 ? a : b) += sizes[i];
      if (a && b) best = std::min(best, a > b ? a - b : b - a);
    }
    EXPECT_EQ(load[0] > load[1] ? load[0] - load[1] : load[1] - load[0], best);
  }
}

TEST(Folds, SubjectNeverSpansFolds) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 30; ++trial) {
    Dataset d;
    const int subjects = 5 + static_cast<int>(gen() % 30);
    for (int s = 0; s < subjects; ++s) {
      const int n = 1 + static_cast<int>(gen() % 6);
      for (int j = 0; j < n; ++j) {
        d.samples.push_back(make_sample(fmt_id(s, j), "subj" + std::to_string(s), Label::HC));
      }
    }
    const FoldPlan plan = stratified_subject_folds(d, 5, trial);
    std::map<std::string, std::set<int>> seen;
    std::set<int> used;
    for (const auto& smp : d.samples) {
      seen[smp.subject_id].insert(plan.fold_of(smp.sample_id));
      used.insert(plan.fold_of(smp.sample_id));
    }
    for (const auto& [subj, f] : seen) EXPECT_EQ(f.size(), 1u) << subj;
    EXPECT_EQ(used.size(), 5u);
  }
}

}  // namespace
}  // namespace adspeech
