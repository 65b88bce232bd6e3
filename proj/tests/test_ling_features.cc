#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <random>
#include <set>

#include "adspeech/ling_features.h"
#include "adspeech/synth.h"
#include "test_util.h"

namespace adspeech {
namespace {

using testing::make_sample;

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t j = s.find(' ', i);
    out.push_back(s.substr(i, j - i));
    if (j == std::string::npos) break;
    i = j + 1;
  }
  return out;
}

TEST(Mattr, SpecCases) {
  EXPECT_DOUBLE_EQ(*mattr(std::vector<std::string>(20, "w"), 10), 0.1);
  std::vector<std::string> distinct;
  for (int i = 0; i < 20; ++i) distinct.push_back("w" + std::to_string(i));
  EXPECT_DOUBLE_EQ(*mattr(distinct, 10), 1.0);
  EXPECT_DOUBLE_EQ(*mattr(words("a b a b a b"), 4), 0.5);
  EXPECT_DOUBLE_EQ(*mattr(words("a b a"), 10), 2.0 / 3.0);
  EXPECT_FALSE(mattr({}, 10).has_value());
  EXPECT_THROW(mattr(words("a"), 0), InputError);
}

TEST(Mattr, MatchesWindowOracle) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> toks;
    const std::size_t n = 1 + gen() % 40;
    for (std::size_t i = 0; i < n; ++i) toks.push_back(std::string(1, static_cast<char>('a' + gen() % 6)));
    const std::size_t w = 1 + gen() % 12;
    double sum = 0;
    std::size_t windows = 0;
    const std::size_t eff = std::min(w, n);
    for (std::size_t s = 0; s + eff <= n; ++s) {
      std::set<std::string> types(toks.begin() + s, toks.begin() + s + eff);
      sum += static_cast<double>(types.size()) / static_cast<double>(eff);
      ++windows;
    }
    const double got = *mattr(toks, w);
    EXPECT_NEAR(got, sum / static_cast<double>(windows), 1e-12);
    EXPECT_GT(got, 0.0);
    EXPECT_LE(got, 1.0);
  }
}

TEST(LexicalCounts, SpecCases) {
  const auto s = make_sample("a", "p", Label::HC, "PAR: cat/NOUN dog/NOUN sat/VERB:PAST &uh");
  const auto c = lexical_counts(s);
  ASSERT_TRUE(c);
  EXPECT_NEAR(*c->noun_ratio, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(c->uh_per_token, 0.25);
  EXPECT_DOUBLE_EQ(c->filled_pauses_per_token, 0.25);

  const auto none = lexical_counts(make_sample("b", "p", Label::HC, "PAR: the/DET a/DET"));
  ASSERT_TRUE(none);
  EXPECT_FALSE(none->noun_ratio.has_value());

  const auto intj = lexical_counts(
      make_sample("c", "p", Label::HC, "PAR: oh/INTJ ah/INTJ wow/INTJ hey/INTJ um/INTJ"));
  EXPECT_DOUBLE_EQ(intj->interjections_per_token, 1.0);
}

Token word(std::string text) {
  Token t;
  t.text = std::move(text);
  return t;
}

TEST(LexicalCounts, FallbackTagger) {
  EXPECT_EQ(tag_fallback(word("walked")).pos, Pos::VERB);
  EXPECT_EQ(tag_fallback(word("walked")).tense, Tense::PAST);
  EXPECT_EQ(tag_fallback(word("walking")).tense, Tense::PRESENT);
  EXPECT_EQ(tag_fallback(word("slowly")).pos, Pos::ADV);
  EXPECT_EQ(tag_fallback(word("the")).pos, Pos::DET);
  EXPECT_EQ(tag_fallback(word("she")).pos, Pos::PRON);
  EXPECT_EQ(tag_fallback(word("table")).pos, Pos::NOUN);
  Token tagged{"ran", Pos::VERB, Tense::PAST, false};
  EXPECT_EQ(tag_fallback(tagged), tagged);
}

TEST(NormFeatures, SpecCases) {
  NormLexicon lex;
  lex.entries = {{"cat", 500.0}};
  EXPECT_DOUBLE_EQ(*norm_features(make_sample("a", "p", Label::HC, "PAR: the/DET cat/NOUN"), lex), 500.0);
  lex.entries = {{"cat", 4.0}, {"dog", 2.0}};
  EXPECT_DOUBLE_EQ(
      *norm_features(make_sample("a", "p", Label::HC, "PAR: Cat/NOUN and/OTHER dog/NOUN"), lex), 3.0);
  EXPECT_FALSE(norm_features(make_sample("a", "p", Label::HC, "PAR: fish/NOUN"), lex).has_value());
}

// Independent speech-graph oracle: adjacency sets, BFS per node.
struct GraphOracle {
  double n_nodes, n_edges, avg_total_degree, diameter, avg_path, density;
};

GraphOracle graph_oracle(const std::vector<std::string>& toks) {
  std::map<std::string, int> id;
  for (const auto& t : toks) id.emplace(t, static_cast<int>(id.size()));
  const int n = static_cast<int>(id.size());
  std::vector<int> deg(n, 0);
  std::set<std::pair<int, int>> directed;
  std::vector<std::set<int>> und(n);
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    const int a = id[toks[i]], b = id[toks[i + 1]];
    ++deg[a];
    ++deg[b];
    directed.insert({a, b});
    if (a != b) {
      und[a].insert(b);
      und[b].insert(a);
    }
  }
  // largest component, ties by smallest member id
  std::vector<int> comp(n, -1);
  std::vector<std::vector<int>> comps;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    comps.emplace_back();
    std::queue<int> q;
    q.push(s);
    comp[s] = static_cast<int>(comps.size()) - 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      comps.back().push_back(v);
      for (int w : und[v]) {
        if (comp[w] < 0) {
          comp[w] = comp[s];
          q.push(w);
        }
      }
    }
  }
  const auto& big = *std::max_element(comps.begin(), comps.end(),
                                      [](const auto& a, const auto& b) { return a.size() < b.size(); });
  double diam = 0, sum = 0, pairs = 0;
  for (int s : big) {
    std::vector<int> dist(n, -1);
    dist[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int w : und[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
      }
    }
    for (int t : big) {
      if (t == s) continue;
      diam = std::max(diam, static_cast<double>(dist[t]));
      sum += dist[t];
      ++pairs;
    }
  }
  double total_deg = 0;
  for (int d : deg) total_deg += d;
  std::size_t simple = 0;
  for (const auto& [a, b] : directed) simple += a != b;
  return {static_cast<double>(n), static_cast<double>(toks.size() - 1), total_deg / n, diam,
          pairs ? sum / pairs : 0.0,
          n > 1 ? static_cast<double>(simple) / (n * (n - 1.0)) : -1.0};
}

TEST(SpeechGraph, SpecCases) {
  const auto g = speech_graph(words("the cat sat"));
  ASSERT_TRUE(g);
  EXPECT_DOUBLE_EQ(g->n_nodes, 3);
  EXPECT_DOUBLE_EQ(g->n_edges, 2);
  EXPECT_DOUBLE_EQ(g->avg_total_degree, 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(g->diameter, 2);
  EXPECT_DOUBLE_EQ(*g->density, 2.0 / 6.0);

  const auto loop = speech_graph(words("a a a"));
  ASSERT_TRUE(loop);
  EXPECT_DOUBLE_EQ(loop->n_nodes, 1);
  EXPECT_DOUBLE_EQ(loop->n_edges, 2);
  EXPECT_DOUBLE_EQ(loop->diameter, 0);
  EXPECT_FALSE(loop->density.has_value());

  const auto aba = speech_graph(words("a b a"));
  EXPECT_DOUBLE_EQ(aba->n_edges, 2);
  EXPECT_DOUBLE_EQ(*aba->density, 1.0);

  EXPECT_FALSE(speech_graph(words("solo")).has_value());
}

TEST(SpeechGraph, MatchesOracleOnRandomSequences) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> toks;
    const std::size_t n = 2 + gen() % 25;
    const int vocab = 1 + static_cast<int>(gen() % 8);
    for (std::size_t i = 0; i < n; ++i) toks.push_back("w" + std::to_string(gen() % vocab));
    const auto g = speech_graph(toks);
    const auto o = graph_oracle(toks);
    ASSERT_TRUE(g);
    EXPECT_DOUBLE_EQ(g->n_nodes, o.n_nodes);
    EXPECT_DOUBLE_EQ(g->n_edges, o.n_edges);
    EXPECT_NEAR(g->avg_total_degree, o.avg_total_degree, 1e-12);
    EXPECT_DOUBLE_EQ(g->diameter, o.diameter);
    EXPECT_NEAR(g->avg_shortest_path, o.avg_path, 1e-12);
    if (o.density >= 0) {
      EXPECT_NEAR(*g->density, o.density, 1e-12);
      EXPECT_LE(*g->density, 1.0);
    }
  }
}

TEST(Coherence, SpecCases) {
  const auto same = coherence(make_sample("a", "p", Label::HC, "PAR: the cat\nPAR: the cat"), 0.001);
  ASSERT_TRUE(same);
  EXPECT_DOUBLE_EQ(same->cosine_cutoff_fraction, 1.0);
  EXPECT_NEAR(same->local_coherence_mean, 1.0, 1e-12);

  const auto disjoint = coherence(make_sample("a", "p", Label::HC, "PAR: red fox\nPAR: blue sky"), 0.001);
  EXPECT_DOUBLE_EQ(disjoint->cosine_cutoff_fraction, 0.0);
  EXPECT_NEAR(disjoint->local_coherence_mean, 0.0, 1e-12);

  const auto third = coherence(
      make_sample("a", "p", Label::HC, "PAR: red fox\nPAR: blue sky\nPAR: red fox"), 0.001);
  EXPECT_NEAR(third->cosine_cutoff_fraction, 1.0 / 3.0, 1e-12);

  EXPECT_FALSE(coherence(make_sample("a", "p", Label::HC, "PAR: alone"), 0.001).has_value());
}

TEST(Coherence, UtteranceOrder) {
  const auto a = coherence(
      make_sample("a", "p", Label::HC, "PAR: red fox\nPAR: red fox\nPAR: blue sky"), 0.001);
  const auto b = coherence(
      make_sample("a", "p", Label::HC, "PAR: red fox\nPAR: blue sky\nPAR: red fox"), 0.001);
  EXPECT_NEAR(a->global_coherence_mean, b->global_coherence_mean, 1e-12);
  EXPECT_GT(std::abs(a->local_coherence_mean - b->local_coherence_mean), 0.1);
}

TEST(TenseSwitches, SpecCases) {
  EXPECT_NEAR(*tense_switches(make_sample(
                  "a", "p", Label::HC, "PAR: a/VERB:PAST b/VERB:PAST c/VERB:PRESENT d/VERB:PAST")),
              2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(*tense_switches(make_sample("a", "p", Label::HC, "PAR: a/VERB:PAST b/VERB:PAST")), 0.0);
  EXPECT_DOUBLE_EQ(*tense_switches(make_sample("a", "p", Label::HC, "PAR: a/VERB:PAST b/VERB:PRESENT")), 1.0);
  EXPECT_FALSE(tense_switches(make_sample("a", "p", Label::HC, "PAR: a/VERB:PAST b/NOUN")).has_value());
}

const char* kCatTree = "PAR: the cat sat\n%parse: (S (NP (DT the)(NN cat))(VP (VBD sat)))\n";

TEST(ProductionRules, SpecCases) {
  const std::vector<ProductionRule> rules = {parse_rule("NP->DT NN"), parse_rule("VP->VBD"),
                                             parse_rule("NP->PRP")};
  const auto r = production_rules(make_sample("a", "p", Label::HC, kCatTree), rules);
  ASSERT_TRUE(r);
  EXPECT_NEAR(r->at("rule:NP->DT_NN"), 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(r->at("rule:NP->PRP"), 0.0);

  const auto twice = production_rules(
      make_sample("a", "p", Label::HC, std::string(kCatTree) + kCatTree), rules);
  for (const auto& [k, v] : *r) EXPECT_NEAR(twice->at(k), v, 1e-15);

  double sum = 0;
  for (const auto& [k, v] : *r) sum += v;
  EXPECT_LE(sum, 1.0 + 1e-12);

  EXPECT_FALSE(production_rules(make_sample("a", "p", Label::HC, "PAR: no tree"), rules).has_value());
  EXPECT_THROW(parse_rule("NP DT"), InputError);
}

// Tree-walk oracle counting internal productions.
void count_productions(const ParseNode& n, std::map<std::string, int>& counts, int& total) {
  if (n.is_word() || n.is_preterminal()) return;
  std::string key = n.label + "->";
  for (std::size_t i = 0; i < n.children.size(); ++i) key += (i ? "_" : "") + n.children[i].label;
  ++counts[key];
  ++total;
  for (const auto& c : n.children) count_productions(c, counts, total);
}

TEST(ProductionRules, MatchesTreeWalkOnSynthetic) {
  SynthSpec spec;
  spec.task_counts = {20, 0, 0, 0};
  const Dataset d = synth_generate(spec, 4);
  const auto rules = default_rules();
  for (const auto& s : d.samples) {
    std::map<std::string, int> counts;
    int total = 0;
    for (const auto& u : s.utterances) {
      if (u.parse) count_productions(*u.parse, counts, total);
    }
    const auto r = production_rules(s, rules);
    ASSERT_TRUE(r);
    for (const auto& rule : rules) {
      std::string key = rule.lhs + "->";
      for (std::size_t i = 0; i < rule.rhs.size(); ++i) key += (i ? "_" : "") + rule.rhs[i];
      EXPECT_NEAR(r->at(rule.feature_name()), static_cast<double>(counts[key]) / total, 1e-12);
    }
  }
}

TEST(SyntacticComplexity, SpecCases) {
  const auto one = syntactic_complexity(make_sample("a", "p", Label::HC, kCatTree));
  ASSERT_TRUE(one);
  EXPECT_DOUBLE_EQ(one->clauses_per_sentence, 1.0);
  EXPECT_DOUBLE_EQ(one->clauses_per_tunit, 1.0);

  const auto nested = syntactic_complexity(make_sample(
      "a", "p", Label::HC,
      "PAR: x\n%parse: (S (S (NP (PRP i)) (VP (VBD said) (SBAR (IN that) (S (NP (PRP it)) (VP (VBD rained)))))))\n"));
  // S, inner S, SBAR, innermost S -> 4 clause nodes under one T-unit root
  EXPECT_DOUBLE_EQ(nested->clauses_per_tunit, 4.0);

  const auto spec_tree = syntactic_complexity(make_sample(
      "a", "p", Label::HC, "PAR: x\n%parse: (S (S (NP (PRP i)) (VP (VBD ran))) (SBAR (IN because) (VP (VBD fell))))\n"));
  EXPECT_DOUBLE_EQ(spec_tree->clauses_per_tunit, 3.0);
  EXPECT_DOUBLE_EQ(spec_tree->clauses_per_sentence, 3.0);

  const auto two = syntactic_complexity(
      make_sample("a", "p", Label::HC, std::string(kCatTree) + kCatTree));
  EXPECT_DOUBLE_EQ(two->clauses_per_sentence, 1.0);
  EXPECT_FALSE(syntactic_complexity(make_sample("a", "p", Label::HC, "PAR: x")).has_value());
}

TEST(ExtractLinguistic, MissingMasksAndDeterminism) {
  LinguisticResources res;
  res.lexicons = synth_lexicons();
  const auto names = linguistic_feature_names(res);
  const auto tiny = extract_linguistic(make_sample("a", "p", Label::HC, "PAR: hi/INTJ"), res);
  ASSERT_EQ(tiny.items().size(), names.size());
  for (std::size_t i = 0; i < names.size(); ++i) EXPECT_EQ(tiny.items()[i].first, names[i]);
  EXPECT_FALSE(tiny.get("graph_n_edges").has_value());
  EXPECT_FALSE(tiny.get("local_coherence_mean").has_value());
  EXPECT_TRUE(tiny.get("interjections_per_token").has_value());

  SynthSpec spec;
  spec.task_counts = {10, 0, 0, 0};
  const Dataset d = synth_generate(spec, 8);
  for (const auto& s : d.samples) {
    const auto a = extract_linguistic(s, res);
    const auto b = extract_linguistic(s, res);
    for (std::size_t i = 0; i < a.items().size(); ++i) {
      const double v = a.items()[i].second;
      EXPECT_TRUE(is_missing(v) || std::isfinite(v));
      EXPECT_TRUE((is_missing(v) && is_missing(b.items()[i].second)) || v == b.items()[i].second);
    }
    // a fully annotated synthetic picture description has every linguistic feature
    for (const auto& [name, v] : a.items()) EXPECT_FALSE(is_missing(v)) << name;
  }
}

}  // namespace
}  // namespace adspeech
