#include "adspeech/ling_features.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_set>

#include "adspeech/io.h"

namespace adspeech {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool in(std::string_view w, std::initializer_list<std::string_view> list) {
  return std::find(list.begin(), list.end(), w) != list.end();
}

std::vector<Token> tagged_tokens(const SpeechSample& sample) {
  std::vector<Token> out;
  for (const auto& utt : sample.utterances) {
    for (const auto& tok : utt.tokens) out.push_back(tag_fallback(tok));
  }
  return out;
}

std::vector<const ParseNode*> parse_trees(const SpeechSample& sample) {
  std::vector<const ParseNode*> trees;
  for (const auto& utt : sample.utterances) {
    if (utt.parse) trees.push_back(&*utt.parse);
  }
  return trees;
}

constexpr std::string_view kNormNames[] = {"frequency", "imageability", "valence",
                                           "arousal", "dominance"};

}  // namespace

std::string_view to_string(NormKind kind) { return kNormNames[static_cast<int>(kind)]; }

NormKind parse_norm_kind(std::string_view s) {
  for (int i = 0; i < 5; ++i) {
    if (kNormNames[i] == s) return static_cast<NormKind>(i);
  }
  throw InputError("unknown lexicon kind '" + std::string(s) + "'");
}

NormLexicon load_lexicon(const std::filesystem::path& path, NormKind kind) {
  const CsvTable csv = read_csv(path);
  const int word_col = csv.column("word");
  const int value_col = csv.column("value");
  if (word_col < 0 || value_col < 0) {
    throw InputError(path.string() + ": lexicon header must be word,value");
  }
  NormLexicon lex;
  lex.kind = kind;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const double v = parse_double(csv.rows[r][value_col]);
    if (!std::isfinite(v)) {
      throw ParseError(path.string() + ": non-finite lexicon value", csv.line_numbers[r]);
    }
    lex.entries[lower(csv.rows[r][word_col])] = v;
  }
  return lex;
}

std::string ProductionRule::feature_name() const {
  std::string out = "rule:" + lhs + "->";
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    if (i) out += '_';
    out += rhs[i];
  }
  return out;
}

ProductionRule parse_rule(std::string_view text) {
  const auto arrow = text.find("->");
  if (arrow == std::string_view::npos) {
    throw InputError("production rule needs '->': " + std::string(text));
  }
  ProductionRule rule;
  auto trim_copy = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
  };
  rule.lhs = trim_copy(text.substr(0, arrow));
  std::string rhs = trim_copy(text.substr(arrow + 2));
  std::size_t i = 0;
  while (i < rhs.size()) {
    while (i < rhs.size() && std::isspace(static_cast<unsigned char>(rhs[i]))) ++i;
    const std::size_t start = i;
    while (i < rhs.size() && !std::isspace(static_cast<unsigned char>(rhs[i]))) ++i;
    if (i > start) rule.rhs.push_back(rhs.substr(start, i - start));
  }
  if (rule.lhs.empty() || rule.rhs.empty()) {
    throw InputError("malformed production rule: " + std::string(text));
  }
  return rule;
}

std::vector<ProductionRule> load_rules(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<ProductionRule> rules;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    rules.push_back(parse_rule(line));
  }
  return rules;
}

std::vector<ProductionRule> default_rules() {
  std::vector<ProductionRule> rules;
  for (const char* r : {"S->NP VP", "NP->DT NN", "NP->PRP", "NP->DT JJ NN", "NP->NN",
                        "VP->VBD", "VP->VBZ", "VP->VBD NP", "VP->VBZ NP", "VP->VBG NP",
                        "SBAR->IN S", "ADVP->RB", "INTJ->UH"}) {
    rules.push_back(parse_rule(r));
  }
  return rules;
}

Token tag_fallback(Token token) {
  if (token.pos) return token;
  const std::string w = lower(token.text);
  auto set = [&](Pos p, std::optional<Tense> t = std::nullopt) {
    token.pos = p;
    token.tense = t;
    return token;
  };
  if (in(w, {"the", "a", "an", "this", "that", "these", "those", "some", "any",
             "every", "each", "no"})) {
    return set(Pos::DET);
  }
  if (in(w, {"i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us",
             "them", "my", "your", "his", "its", "our", "their", "who", "what",
             "which", "someone", "something", "myself", "himself", "herself"})) {
    return set(Pos::PRON);
  }
  if (in(w, {"uh", "um", "er", "ah", "oh", "yeah", "yes", "okay", "ok", "hmm", "mhm",
             "wow", "well"})) {
    return set(Pos::INTJ);
  }
  if (!w.empty() && std::all_of(w.begin(), w.end(),
                                [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    return set(Pos::NUM);
  }
  if (in(w, {"one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
             "ten", "twenty", "hundred", "thousand"})) {
    return set(Pos::NUM);
  }
  if (in(w, {"and", "or", "but", "so", "because", "if", "then", "in", "on", "at",
             "to", "of", "for", "with", "from", "by", "up", "down", "out", "over",
             "under", "into", "about", "as", "than", "not"})) {
    return set(Pos::OTHER);
  }
  if (in(w, {"is", "are", "am", "has", "have", "do", "does"})) {
    return set(Pos::VERB, Tense::PRESENT);
  }
  if (in(w, {"was", "were", "had", "did"})) return set(Pos::VERB, Tense::PAST);
  if (in(w, {"will", "shall"})) return set(Pos::VERB, Tense::FUTURE);
  if (in(w, {"be", "been", "being"})) return set(Pos::VERB, Tense::NONE);
  if (in(w, {"very", "really", "just", "also", "too", "there", "here", "now"})) {
    return set(Pos::ADV);
  }
  if (w.size() > 3 && ends_with(w, "ed")) return set(Pos::VERB, Tense::PAST);
  if (w.size() > 4 && ends_with(w, "ing")) return set(Pos::VERB, Tense::PRESENT);
  if (w.size() > 3 && ends_with(w, "ly")) return set(Pos::ADV);
  return set(Pos::NOUN);
}

std::vector<std::string> content_words(const SpeechSample& sample) {
  std::vector<std::string> out;
  for (const auto& utt : sample.utterances) {
    for (const auto& tok : utt.tokens) {
      if (!tok.is_filler) out.push_back(lower(tok.text));
    }
  }
  return out;
}

std::optional<double> mattr(const std::vector<std::string>& tokens, std::size_t window) {
  if (window == 0) throw InputError("mattr window must be >= 1");
  if (tokens.empty()) return std::nullopt;
  if (tokens.size() < window) {
    std::unordered_set<std::string_view> types(tokens.begin(), tokens.end());
    return static_cast<double>(types.size()) / static_cast<double>(tokens.size());
  }
  // Sliding multiset of the current window.
  std::unordered_map<std::string_view, int> counts;
  for (std::size_t i = 0; i < window; ++i) ++counts[tokens[i]];
  double total = static_cast<double>(counts.size());
  const std::size_t n_windows = tokens.size() - window + 1;
  for (std::size_t start = 1; start < n_windows; ++start) {
    auto out = counts.find(tokens[start - 1]);
    if (--out->second == 0) counts.erase(out);
    ++counts[tokens[start + window - 1]];
    total += static_cast<double>(counts.size());
  }
  return total / (static_cast<double>(n_windows) * static_cast<double>(window));
}

std::optional<LexicalCounts> lexical_counts(const SpeechSample& sample) {
  const auto tokens = tagged_tokens(sample);
  if (tokens.empty()) return std::nullopt;
  std::size_t fillers = 0, uh = 0, intj = 0, num = 0, nouns = 0, verbs = 0;
  for (const auto& t : tokens) {
    if (t.is_filler) ++fillers;
    if (t.is_filler && lower(t.text) == "uh") ++uh;
    if (t.pos == Pos::INTJ) ++intj;
    if (t.pos == Pos::NUM) ++num;
    if (t.pos == Pos::NOUN) ++nouns;
    if (t.pos == Pos::VERB) ++verbs;
  }
  const double n = static_cast<double>(tokens.size());
  LexicalCounts c;
  c.filled_pauses_per_token = static_cast<double>(fillers) / n;
  c.uh_per_token = static_cast<double>(uh) / n;
  c.interjections_per_token = static_cast<double>(intj) / n;
  c.numerals_per_token = static_cast<double>(num) / n;
  if (nouns + verbs > 0) {
    c.noun_ratio = static_cast<double>(nouns) / static_cast<double>(nouns + verbs);
  }
  return c;
}

std::optional<double> norm_features(const SpeechSample& sample, const NormLexicon& lexicon) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& t : tagged_tokens(sample)) {
    if (t.pos != Pos::NOUN || t.is_filler) continue;
    auto it = lexicon.entries.find(lower(t.text));
    if (it == lexicon.entries.end()) continue;
    sum += it->second;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<SpeechGraphStats> speech_graph(const std::vector<std::string>& tokens) {
  if (tokens.size() < 2) return std::nullopt;
  std::unordered_map<std::string_view, std::size_t> node_of;
  std::vector<std::size_t> seq;
  seq.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto [it, _] = node_of.emplace(t, node_of.size());
    seq.push_back(it->second);
  }
  const std::size_t n = node_of.size();
  std::set<std::pair<std::size_t, std::size_t>> directed;
  std::vector<std::set<std::size_t>> undirected(n);
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    const std::size_t a = seq[i];
    const std::size_t b = seq[i + 1];
    if (a == b) continue;
    directed.emplace(a, b);
    undirected[a].insert(b);
    undirected[b].insert(a);
  }

  SpeechGraphStats g;
  g.n_nodes = static_cast<double>(n);
  g.n_edges = static_cast<double>(seq.size() - 1);
  g.avg_total_degree = 2.0 * g.n_edges / static_cast<double>(n);
  if (n > 1) {
    g.density = static_cast<double>(directed.size()) / static_cast<double>(n * (n - 1));
  }

  // Largest connected component, ties broken by first-appearance order.
  std::vector<int> comp(n, -1);
  std::vector<std::vector<std::size_t>> comps;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    comps.emplace_back();
    std::deque<std::size_t> queue{s};
    comp[s] = static_cast<int>(comps.size() - 1);
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      comps.back().push_back(u);
      for (std::size_t v : undirected[u]) {
        if (comp[v] < 0) {
          comp[v] = comp[s];
          queue.push_back(v);
        }
      }
    }
  }
  const auto& lcc = *std::max_element(
      comps.begin(), comps.end(),
      [](const auto& a, const auto& b) { return a.size() < b.size(); });

  double path_sum = 0.0;
  std::size_t pairs = 0;
  std::size_t diameter = 0;
  std::vector<std::size_t> dist(n);
  for (std::size_t src : lcc) {
    std::fill(dist.begin(), dist.end(), static_cast<std::size_t>(-1));
    dist[src] = 0;
    std::deque<std::size_t> queue{src};
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v : undirected[u]) {
        if (dist[v] == static_cast<std::size_t>(-1)) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
    for (std::size_t dst : lcc) {
      if (dst <= src) continue;
      path_sum += static_cast<double>(dist[dst]);
      diameter = std::max(diameter, dist[dst]);
      ++pairs;
    }
  }
  g.avg_shortest_path = pairs ? path_sum / static_cast<double>(pairs) : 0.0;
  g.diameter = static_cast<double>(diameter);
  return g;
}

std::optional<CoherenceStats> coherence(const SpeechSample& sample, double cutoff) {
  const std::size_t m = sample.utterances.size();
  if (m < 2) return std::nullopt;
  std::unordered_map<std::string, std::size_t> vocab;
  std::vector<std::map<std::size_t, double>> vecs(m);
  for (std::size_t u = 0; u < m; ++u) {
    for (const auto& tok : sample.utterances[u].tokens) {
      if (tok.is_filler) continue;
      auto [it, _] = vocab.emplace(lower(tok.text), vocab.size());
      vecs[u][it->second] += 1.0;
    }
    double norm = 0.0;
    for (const auto& [_, c] : vecs[u]) norm += c * c;
    norm = std::sqrt(norm);
    for (auto& [_, c] : vecs[u]) c /= norm;
  }
  const auto dot = [](const std::map<std::size_t, double>& a,
                      const std::map<std::size_t, double>& b) {
    double s = 0.0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
      if (ia->first < ib->first) {
        ++ia;
      } else if (ib->first < ia->first) {
        ++ib;
      } else {
        s += ia->second * ib->second;
        ++ia;
        ++ib;
      }
    }
    return s;
  };

  CoherenceStats c;
  std::size_t close = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double distance = 1.0 - dot(vecs[i], vecs[j]);
      if (distance <= cutoff) ++close;
      ++pairs;
    }
  }
  c.cosine_cutoff_fraction = static_cast<double>(close) / static_cast<double>(pairs);

  double local = 0.0;
  for (std::size_t i = 0; i + 1 < m; ++i) local += dot(vecs[i], vecs[i + 1]);
  c.local_coherence_mean = local / static_cast<double>(m - 1);

  std::map<std::size_t, double> mean;
  for (const auto& v : vecs) {
    for (const auto& [k, x] : v) mean[k] += x / static_cast<double>(m);
  }
  double mean_norm = 0.0;
  for (const auto& [_, x] : mean) mean_norm += x * x;
  mean_norm = std::sqrt(mean_norm);
  double global = 0.0;
  if (mean_norm > 0.0) {
    for (const auto& v : vecs) global += dot(v, mean) / mean_norm;
  }
  c.global_coherence_mean = global / static_cast<double>(m);
  return c;
}

std::optional<double> tense_switches(const SpeechSample& sample) {
  std::vector<Tense> tenses;
  for (const auto& t : tagged_tokens(sample)) {
    if (t.pos == Pos::VERB && t.tense && *t.tense != Tense::NONE) tenses.push_back(*t.tense);
  }
  if (tenses.size() < 2) return std::nullopt;
  std::size_t switches = 0;
  for (std::size_t i = 0; i + 1 < tenses.size(); ++i) {
    if (tenses[i] != tenses[i + 1]) ++switches;
  }
  return static_cast<double>(switches) / static_cast<double>(tenses.size() - 1);
}

std::optional<std::map<std::string, double>> production_rules(
    const SpeechSample& sample, const std::vector<ProductionRule>& rules) {
  const auto trees = parse_trees(sample);
  if (trees.empty()) return std::nullopt;
  std::size_t total = 0;
  std::vector<std::size_t> hits(rules.size(), 0);
  for (const ParseNode* tree : trees) {
    visit_nodes(*tree, [&](const ParseNode& node) {
      if (node.is_word() || node.is_preterminal()) return;
      ++total;
      for (std::size_t r = 0; r < rules.size(); ++r) {
        const auto& rule = rules[r];
        if (rule.lhs != node.label || rule.rhs.size() != node.children.size()) continue;
        bool match = true;
        for (std::size_t c = 0; c < rule.rhs.size() && match; ++c) {
          match = rule.rhs[c] == node.children[c].label && !node.children[c].is_word();
        }
        if (match) ++hits[r];
      }
    });
  }
  if (total == 0) return std::nullopt;
  std::map<std::string, double> out;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    out[rules[r].feature_name()] = static_cast<double>(hits[r]) / static_cast<double>(total);
  }
  return out;
}

namespace {

void count_clauses(const ParseNode& node, bool under_s, std::size_t& clauses,
                   std::size_t& tunits) {
  if (node.is_word()) return;
  const bool is_s = node.label == "S";
  if (is_s || node.label == "SBAR") ++clauses;
  if (is_s && !under_s) ++tunits;
  for (const auto& child : node.children) {
    count_clauses(child, under_s || is_s, clauses, tunits);
  }
}

}  // namespace

std::optional<SyntacticComplexity> syntactic_complexity(const SpeechSample& sample) {
  const auto trees = parse_trees(sample);
  if (trees.empty()) return std::nullopt;
  std::size_t clauses = 0;
  std::size_t tunits = 0;
  for (const ParseNode* tree : trees) {
    std::size_t tree_tunits = 0;
    count_clauses(*tree, false, clauses, tree_tunits);
    tunits += std::max<std::size_t>(tree_tunits, 1);
  }
  SyntacticComplexity c;
  c.clauses_per_tunit = static_cast<double>(clauses) / static_cast<double>(tunits);
  c.clauses_per_sentence = static_cast<double>(clauses) / static_cast<double>(trees.size());
  return c;
}

std::vector<std::string> linguistic_feature_names(const LinguisticResources& res) {
  NamedValues probe = extract_linguistic(SpeechSample{}, res);
  std::vector<std::string> names;
  for (const auto& [n, _] : probe.items()) names.push_back(n);
  return names;
}

NamedValues extract_linguistic(const SpeechSample& sample, const LinguisticResources& res) {
  NamedValues out;
  std::size_t n_tokens = 0;
  for (const auto& utt : sample.utterances) n_tokens += utt.tokens.size();
  out.set("n_tokens", static_cast<double>(n_tokens));
  out.set("n_utterances", static_cast<double>(sample.utterances.size()));
  out.set("mean_utterance_length",
          sample.utterances.empty()
              ? std::nullopt
              : std::optional<double>(static_cast<double>(n_tokens) /
                                      static_cast<double>(sample.utterances.size())));

  const auto words = content_words(sample);
  out.set("mattr", mattr(words, res.mattr_window));

  const auto counts = lexical_counts(sample);
  out.set("filled_pauses_per_token",
          counts ? std::optional(counts->filled_pauses_per_token) : std::nullopt);
  out.set("uh_per_token", counts ? std::optional(counts->uh_per_token) : std::nullopt);
  out.set("interjections_per_token",
          counts ? std::optional(counts->interjections_per_token) : std::nullopt);
  out.set("numerals_per_token",
          counts ? std::optional(counts->numerals_per_token) : std::nullopt);
  out.set("noun_ratio", counts ? counts->noun_ratio : std::nullopt);

  for (const auto& lex : res.lexicons) {
    out.set("noun_" + std::string(to_string(lex.kind)) + "_norm", norm_features(sample, lex));
  }

  const auto graph = speech_graph(words);
  out.set("graph_avg_total_degree", graph ? std::optional(graph->avg_total_degree) : std::nullopt);
  out.set("graph_n_edges", graph ? std::optional(graph->n_edges) : std::nullopt);
  out.set("graph_avg_shortest_path",
          graph ? std::optional(graph->avg_shortest_path) : std::nullopt);
  out.set("graph_diameter", graph ? std::optional(graph->diameter) : std::nullopt);
  out.set("graph_density", graph ? graph->density : std::nullopt);

  const auto coh = coherence(sample, res.cosine_cutoff);
  out.set("cosine_cutoff_fraction",
          coh ? std::optional(coh->cosine_cutoff_fraction) : std::nullopt);
  out.set("local_coherence_mean", coh ? std::optional(coh->local_coherence_mean) : std::nullopt);
  out.set("global_coherence_mean",
          coh ? std::optional(coh->global_coherence_mean) : std::nullopt);

  out.set("tense_switches", tense_switches(sample));

  const auto prods = production_rules(sample, res.rules);
  for (const auto& rule : res.rules) {
    const std::string name = rule.feature_name();
    out.set(name, prods ? std::optional(prods->at(name)) : std::nullopt);
  }

  const auto cx = syntactic_complexity(sample);
  out.set("clauses_per_tunit", cx ? std::optional(cx->clauses_per_tunit) : std::nullopt);
  out.set("clauses_per_sentence", cx ? std::optional(cx->clauses_per_sentence) : std::nullopt);
  return out;
}

}  // namespace adspeech
