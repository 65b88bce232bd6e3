#include "adspeech/corpus.h"

#include <algorithm>
#include <array>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "adspeech/io.h"
#include "adspeech/rng.h"

namespace adspeech {
namespace {

constexpr std::string_view kPosNames[] = {"NOUN", "VERB", "ADJ",  "ADV",  "PRON",
                                          "DET",  "INTJ", "NUM",  "OTHER"};
constexpr std::string_view kTenseNames[] = {"PAST", "PRESENT", "FUTURE", "NONE"};

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

Token parse_token(std::string_view raw, int line) {
  Token tok;
  if (!raw.empty() && raw.front() == '&') {
    tok.is_filler = true;
    raw.remove_prefix(1);
  }
  const auto slash = raw.find('/');
  tok.text = std::string(raw.substr(0, slash));
  if (tok.text.empty()) throw ParseError("empty token text in '" + std::string(raw) + "'", line);
  if (slash != std::string_view::npos) {
    std::string_view tag = raw.substr(slash + 1);
    std::string_view tense_part;
    if (const auto colon = tag.find(':'); colon != std::string_view::npos) {
      tense_part = tag.substr(colon + 1);
      tag = tag.substr(0, colon);
      if (tense_part.find(':') != std::string_view::npos) {
        throw ParseError("malformed tag '" + std::string(raw) + "'", line);
      }
    }
    tok.pos = parse_pos(tag);
    if (!tok.pos) {
      throw ParseError("malformed tag: unknown POS '" + std::string(tag) + "'", line);
    }
    if (!tense_part.empty() || raw.back() == ':') {
      tok.tense = parse_tense(tense_part);
      if (!tok.tense) {
        throw ParseError("malformed tag: unknown tense '" + std::string(tense_part) + "'",
                         line);
      }
      if (*tok.pos != Pos::VERB) {
        throw ParseError("malformed tag: tense on non-verb '" + std::string(raw) + "'",
                         line);
      }
    }
  }
  if (tok.is_filler) {
    if (!tok.pos) tok.pos = Pos::INTJ;
    if (*tok.pos != Pos::INTJ && *tok.pos != Pos::OTHER) {
      throw ParseError("filler '" + tok.text + "' must be INTJ or OTHER", line);
    }
  }
  return tok;
}

std::string serialize_token(const Token& tok) {
  std::string out;
  if (tok.is_filler) out += '&';
  out += tok.text;
  if (tok.pos) {
    out += '/';
    out += to_string(*tok.pos);
    if (tok.tense) {
      out += ':';
      out += to_string(*tok.tense);
    }
  }
  return out;
}

std::string part_label(const DatasetPart& part) {
  if (part.fraction == 1.0) return part.dataset->name;
  return format_double(part.fraction) + "*" + part.dataset->name;
}

}  // namespace

std::string_view to_string(Pos pos) { return kPosNames[static_cast<int>(pos)]; }
std::string_view to_string(Tense tense) { return kTenseNames[static_cast<int>(tense)]; }

std::optional<Pos> parse_pos(std::string_view s) {
  for (int i = 0; i < 9; ++i) {
    if (kPosNames[i] == s) return static_cast<Pos>(i);
  }
  return std::nullopt;
}

std::optional<Tense> parse_tense(std::string_view s) {
  for (int i = 0; i < 4; ++i) {
    if (kTenseNames[i] == s) return static_cast<Tense>(i);
  }
  return std::nullopt;
}

std::size_t Dataset::count(Label label) const {
  return static_cast<std::size_t>(std::count_if(
      samples.begin(), samples.end(),
      [label](const SpeechSample& s) { return s.label == label; }));
}

void validate(const SpeechSample& s) {
  if (s.sample_id.empty()) throw InputError("sample with empty sample_id");
  if (s.age < kMinAge || s.age > kMaxAge) {
    throw InputError("sample " + s.sample_id + ": age " + std::to_string(s.age) +
                     " outside [18,110]");
  }
  if (s.utterances.empty()) {
    throw InputError("sample " + s.sample_id + ": transcript has no utterances");
  }
}

void validate(const Dataset& d) {
  std::unordered_set<std::string> ids;
  for (const auto& s : d.samples) {
    validate(s);
    if (!ids.insert(s.sample_id).second) {
      throw InputError("dataset " + d.name + ": duplicate sample_id " + s.sample_id);
    }
  }
}

std::vector<Utterance> parse_transcript(std::string_view text) {
  std::vector<Utterance> utterances;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '%') {
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) throw ParseError("directive without ':'", line_no);
      const std::string_view name = line.substr(1, colon - 1);
      const std::string_view value = trim(line.substr(colon + 1));
      if (utterances.empty()) {
        throw ParseError("%" + std::string(name) + " before any utterance", line_no);
      }
      Utterance& target = utterances.back();
      if (name == "parse") {
        if (target.parse) throw ParseError("second %parse for one utterance", line_no);
        try {
          target.parse = parse_bracketed(value);
        } catch (const ParseError& e) {
          throw ParseError(e.detail(), line_no);
        }
      } else if (name == "time") {
        const auto parts = split_ws(value);
        if (parts.size() != 2) throw ParseError("%time needs 'start end'", line_no);
        double start = 0.0;
        double end = 0.0;
        try {
          start = parse_double(parts[0]);
          end = parse_double(parts[1]);
        } catch (const InputError& e) {
          throw ParseError(e.what(), line_no);
        }
        if (is_missing(start) || is_missing(end) || end < start) {
          throw ParseError("%time end precedes start", line_no);
        }
        target.start_s = start;
        target.end_s = end;
      } else {
        throw ParseError("unknown directive %" + std::string(name), line_no);
      }
      continue;
    }

    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError("utterance line needs 'SPEAKER:'", line_no);
    }
    const std::string_view speaker = trim(line.substr(0, colon));
    if (speaker.empty() || speaker.find_first_of(" \t") != std::string_view::npos) {
      throw ParseError("malformed speaker '" + std::string(speaker) + "'", line_no);
    }
    Utterance utt;
    utt.speaker = std::string(speaker);
    for (auto raw : split_ws(line.substr(colon + 1))) {
      utt.tokens.push_back(parse_token(raw, line_no));
    }
    utterances.push_back(std::move(utt));
  }
  return utterances;
}

std::string serialize_transcript(const std::vector<Utterance>& utterances) {
  std::string out;
  for (const auto& utt : utterances) {
    out += utt.speaker;
    out += ':';
    for (const auto& tok : utt.tokens) {
      out += ' ';
      out += serialize_token(tok);
    }
    out += '\n';
    if (utt.parse) {
      out += "%parse: ";
      out += to_bracketed(*utt.parse);
      out += '\n';
    }
    if (utt.start_s && utt.end_s) {
      out += "%time: " + format_double(*utt.start_s) + " " + format_double(*utt.end_s) + "\n";
    }
  }
  return out;
}

Dataset load_manifest(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  static constexpr std::string_view kColumns[] = {
      "sample_id", "subject_id", "task", "label", "age", "transcript_path", "audio_path"};
  std::array<int, 7> col{};
  for (std::size_t i = 0; i < 7; ++i) {
    col[i] = table.column(kColumns[i]);
    if (col[i] < 0) {
      throw InputError(path.string() + ": missing column '" + std::string(kColumns[i]) + "'");
    }
  }
  const auto base_dir = path.parent_path();
  const auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base_dir / fp;
  };

  Dataset d;
  d.name = path.parent_path().filename().string();
  std::unordered_set<std::string> ids;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where =
        path.string() + " row " + std::to_string(table.line_numbers[r]);
    try {
      SpeechSample s;
      s.sample_id = row[col[0]];
      s.subject_id = row[col[1]];
      s.task = parse_task(row[col[2]]);
      s.label = parse_label(row[col[3]]);
      try {
        std::size_t used = 0;
        s.age = std::stoi(row[col[4]], &used);
        if (used != row[col[4]].size()) throw std::invalid_argument("age");
      } catch (const std::logic_error&) {
        throw InputError("age '" + row[col[4]] + "' is not an integer");
      }
      if (s.age < kMinAge || s.age > kMaxAge) {
        throw InputError("sample " + s.sample_id + ": age " + std::to_string(s.age) +
                         " outside [18,110]");
      }
      if (!ids.insert(s.sample_id).second) {
        throw InputError("duplicate sample_id " + s.sample_id);
      }
      const auto transcript = resolve(row[col[5]]);
      if (!std::filesystem::exists(transcript)) {
        throw InputError("missing transcript file " + transcript.string());
      }
      try {
        s.utterances = parse_transcript(read_file(transcript));
      } catch (const ParseError& e) {
        throw InputError(transcript.string() + ": " + e.what());
      }
      if (!row[col[6]].empty()) s.audio_path = resolve(row[col[6]]);
      validate(s);
      d.samples.push_back(std::move(s));
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  return d;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRow>& rows) {
  std::string out = "sample_id,subject_id,task,label,age,transcript_path,audio_path\n";
  for (const auto& r : rows) {
    out += csv_escape(r.sample_id) + ',' + csv_escape(r.subject_id) + ',' +
           std::string(manifest_name(r.task)) + ',' + std::string(to_string(r.label)) +
           ',' + std::to_string(r.age) + ',' + csv_escape(r.transcript_path) + ',' +
           csv_escape(r.audio_path) + '\n';
  }
  write_file(path, out);
}

Dataset combine(const Dataset& base, const std::vector<DatasetPart>& parts,
                std::uint64_t seed) {
  Dataset out = base;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& part = parts[p];
    if (!(part.fraction >= 0.0 && part.fraction <= 1.0)) {
      throw InputError("combine: fraction " + format_double(part.fraction) +
                       " outside [0,1]");
    }
    const std::size_t n = part.dataset->size();
    const std::size_t take = combine_draw_count(part.fraction, n);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, {0xC0B1, p}));
    rng.shuffle(std::span<std::size_t>(idx));
    idx.resize(take);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i : idx) out.samples.push_back(part.dataset->samples[i]);
    if (take > 0 || part.fraction > 0.0) out.name += " + " + part_label(part);
  }
  std::unordered_set<std::string> ids;
  for (const auto& s : out.samples) {
    if (!ids.insert(s.sample_id).second) {
      throw InputError("combine: sample_id " + s.sample_id + " appears in several parts");
    }
  }
  return out;
}

Dataset filter_age_bin(const Dataset& d, int min_age, int max_age, std::size_t n,
                       std::uint64_t seed) {
  std::vector<std::size_t> qualifying;
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    const int age = d.samples[i].age;
    if (age >= min_age && age < max_age) qualifying.push_back(i);
  }
  if (qualifying.size() < n) {
    throw InputError("age bin [" + std::to_string(min_age) + "," + std::to_string(max_age) +
                     "): " + std::to_string(n) + " requested, " +
                     std::to_string(qualifying.size()) + " available");
  }
  Rng rng(derive_seed(seed, {0xA6E, static_cast<std::uint64_t>(min_age),
                             static_cast<std::uint64_t>(max_age)}));
  rng.shuffle(std::span<std::size_t>(qualifying));
  qualifying.resize(n);
  std::sort(qualifying.begin(), qualifying.end());
  Dataset out;
  out.name = d.name + "[" + std::to_string(min_age) + "-" + std::to_string(max_age) + ")";
  for (std::size_t i : qualifying) out.samples.push_back(d.samples[i]);
  return out;
}

std::vector<int> assign_subjects_to_folds(const std::vector<std::size_t>& sizes, int k) {
  if (k < 1) throw InputError("fold count must be >= 1");
  if (sizes.size() < static_cast<std::size_t>(k)) {
    throw InputError("cannot split " + std::to_string(sizes.size()) + " subjects into " +
                     std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });
  std::vector<std::size_t> load(static_cast<std::size_t>(k), 0);
  std::vector<int> fold(sizes.size(), 0);
  for (std::size_t s : order) {
    const auto lightest = std::min_element(load.begin(), load.end()) - load.begin();
    fold[s] = static_cast<int>(lightest);
    load[lightest] += sizes[s];
  }
  return fold;
}

std::vector<int> subject_folds(std::span<const std::string> subject_ids, int k,
                               std::uint64_t seed) {
  std::vector<std::string> subjects;
  std::unordered_map<std::string, std::size_t> subject_index;
  std::vector<std::size_t> sizes;
  for (const auto& id : subject_ids) {
    auto [it, inserted] = subject_index.emplace(id, subjects.size());
    if (inserted) {
      subjects.push_back(id);
      sizes.push_back(0);
    }
    ++sizes[it->second];
  }
  std::vector<std::size_t> perm(subjects.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, {0xF01D}));
  rng.shuffle(std::span<std::size_t>(perm));
  std::vector<std::size_t> shuffled_sizes(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) shuffled_sizes[i] = sizes[perm[i]];

  const auto folds = assign_subjects_to_folds(shuffled_sizes, k);
  std::vector<int> subject_fold(subjects.size());
  for (std::size_t i = 0; i < perm.size(); ++i) subject_fold[perm[i]] = folds[i];

  std::vector<int> out;
  out.reserve(subject_ids.size());
  for (const auto& id : subject_ids) out.push_back(subject_fold[subject_index.at(id)]);
  return out;
}

FoldPlan stratified_subject_folds(const Dataset& d, int k, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(d.samples.size());
  for (const auto& s : d.samples) ids.push_back(s.subject_id);
  const auto folds = subject_folds(ids, k, seed);
  FoldPlan plan;
  plan.k = k;
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    plan.assignment[d.samples[i].sample_id] = folds[i];
  }
  return plan;
}

}  // namespace adspeech
