#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <json.hpp>
#include <set>

#include "adspeech/io.h"
#include "cli.h"

namespace adspeech::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw InputError(fmt::format("config: {} must be an object", where));
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) throw InputError(fmt::format("config: unknown key '{}' in {}", key, where));
  }
}

template <typename T>
void read(const json& obj, const char* key, T& dst, std::string_view where) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(fmt::format("config: {}.{} has the wrong type", where, key));
  }
}

void read_path(const json& obj, const char* key, std::optional<fs::path>& dst, const RunConfig& cfg,
               std::string_view where) {
  if (!obj.contains(key)) return;
  std::string s;
  read(obj, key, s, where);
  dst = cfg.resolve(s);
}

ModelKind read_kind(const json& v, std::string_view where) {
  if (!v.is_string()) throw InputError(fmt::format("config: {} must be a model name", where));
  return parse_model_kind(v.get<std::string>());
}

void read_model(const json& m, RunConfig& cfg) {
  check_keys(m, "model",
             {"default", "kinds", "cv_k", "nb_var_floor", "rf_trees", "rf_bootstrap",
              "rf_max_features", "svm_c", "svm_gamma", "svm_tol", "svm_max_iter", "nn_hidden",
              "nn_epochs", "nn_lr", "smote", "smote_k", "standardize"});
  if (m.contains("default")) cfg.default_model = read_kind(m["default"], "model.default");
  if (m.contains("kinds")) {
    if (!m["kinds"].is_array() || m["kinds"].empty()) {
      throw InputError("config: model.kinds must be a non-empty array");
    }
    cfg.models.clear();
    for (const auto& k : m["kinds"]) cfg.models.push_back(read_kind(k, "model.kinds"));
  }
  auto& s = cfg.model;
  read(m, "cv_k", cfg.cv_k, "model");
  read(m, "nb_var_floor", s.nb_var_floor, "model");
  read(m, "rf_trees", s.rf_trees, "model");
  read(m, "rf_bootstrap", s.rf_bootstrap, "model");
  read(m, "rf_max_features", s.rf_max_features, "model");
  read(m, "svm_c", s.svm_c, "model");
  read(m, "svm_gamma", s.svm_gamma, "model");
  read(m, "svm_tol", s.svm_tol, "model");
  read(m, "svm_max_iter", s.svm_max_iter, "model");
  read(m, "nn_hidden", s.nn_hidden, "model");
  read(m, "nn_epochs", s.nn_epochs, "model");
  read(m, "nn_lr", s.nn_lr, "model");
  read(m, "smote", s.smote, "model");
  read(m, "smote_k", s.smote_k, "model");
  if (m.contains("standardize")) {
    bool b = false;
    read(m, "standardize", b, "model");
    s.standardize = b;
  }
}

SynthCorpus read_corpus(const json& c, std::size_t index) {
  const std::string where = fmt::format("synth.corpora[{}]", index);
  check_keys(c, where,
             {"name", "counts", "ad_fraction", "delta", "sigma", "subjects_per_class", "min_age",
              "max_age"});
  SynthCorpus out;
  auto& s = out.spec;
  read(c, "name", s.name, where);
  if (c.contains("counts")) {
    std::vector<std::size_t> counts;
    read(c, "counts", counts, where);
    if (counts.size() != kNumTasks) {
      throw InputError(fmt::format("config: {}.counts needs {} entries", where, kNumTasks));
    }
    std::copy(counts.begin(), counts.end(), s.task_counts.begin());
  }
  read(c, "ad_fraction", s.ad_fraction, where);
  read(c, "delta", s.delta, where);
  read(c, "sigma", s.sigma, where);
  read(c, "subjects_per_class", s.subjects_per_class, where);
  read(c, "min_age", s.min_age, where);
  read(c, "max_age", s.max_age, where);
  return out;
}

}  // namespace

fs::path RunConfig::features_path() const { return features ? *features : out / "features.csv"; }

fs::path RunConfig::resolve(const fs::path& p) const {
  return (p.is_absolute() ? p : base_dir / p).lexically_normal();
}

std::string RunConfig::display(const fs::path& p) const {
  const fs::path rel = p.lexically_relative(base_dir);
  if (rel.empty() || *rel.begin() == "..") return p.generic_string();
  return rel.generic_string();
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.base_dir = fs::current_path();
  cfg.out = cfg.resolve("out");

  SynthCorpus db;
  db.spec.name = "DB";
  db.spec.task_counts = {200, 0, 0, 0};
  db.spec.subjects_per_class = 50;
  SynthCorpus hx;
  hx.spec.name = "HX";
  hx.spec.task_counts = {0, 67, 67, 66};
  hx.spec.ad_fraction = 0.0;
  hx.spec.subjects_per_class = 60;
  cfg.synth = {db, hx};
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  RunConfig cfg = default_config();
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InputError(fmt::format("config {}: {}", path.string(), e.what()));
  }
  cfg.config_file = fs::absolute(path).lexically_normal();
  cfg.base_dir = cfg.config_file->parent_path();
  cfg.out = cfg.resolve("out");

  check_keys(j, "config",
             {"seed", "jobs", "out", "datasets", "features", "resources", "acoustic", "linguistic",
              "model", "anchors", "embed", "fairness", "sweep", "synth"});
  read(j, "seed", cfg.seed, "config");
  read(j, "jobs", cfg.jobs, "config");
  if (j.contains("out")) {
    std::string out;
    read(j, "out", out, "config");
    cfg.out = cfg.resolve(out);
  }
  if (j.contains("datasets")) {
    std::map<std::string, std::string> ds;
    read(j, "datasets", ds, "config");
    for (const auto& [name, p] : ds) cfg.datasets[name] = cfg.resolve(p);
  }
  read_path(j, "features", cfg.features, cfg, "config");

  if (j.contains("resources")) {
    const auto& r = j["resources"];
    check_keys(r, "resources", {"lexicons", "rules", "schema"});
    if (r.contains("lexicons")) {
      std::map<std::string, std::string> lex;
      read(r, "lexicons", lex, "resources");
      for (const auto& [kind, p] : lex) cfg.lexicons[parse_norm_kind(kind)] = cfg.resolve(p);
    }
    read_path(r, "rules", cfg.rules, cfg, "resources");
    read_path(r, "schema", cfg.schema, cfg, "resources");
  }
  if (j.contains("acoustic")) {
    const auto& a = j["acoustic"];
    check_keys(a, "acoustic",
               {"frame_ms", "hop_ms", "n_mels", "n_coeffs", "vad_win_ms", "vad_percentile",
                "vad_hang_ms"});
    auto& ac = cfg.acoustic;
    read(a, "frame_ms", ac.frame_ms, "acoustic");
    read(a, "hop_ms", ac.hop_ms, "acoustic");
    read(a, "n_mels", ac.n_mels, "acoustic");
    read(a, "n_coeffs", ac.n_coeffs, "acoustic");
    read(a, "vad_win_ms", ac.vad_win_ms, "acoustic");
    read(a, "vad_percentile", ac.vad_percentile, "acoustic");
    read(a, "vad_hang_ms", ac.vad_hang_ms, "acoustic");
  }
  if (j.contains("linguistic")) {
    const auto& l = j["linguistic"];
    check_keys(l, "linguistic", {"mattr_window", "cosine_cutoff"});
    read(l, "mattr_window", cfg.mattr_window, "linguistic");
    read(l, "cosine_cutoff", cfg.cosine_cutoff, "linguistic");
  }
  if (j.contains("model")) read_model(j["model"], cfg);
  if (j.contains("anchors")) {
    const auto& a = j["anchors"];
    check_keys(a, "anchors", {"tau", "delta", "budget", "beam_width", "n_bins", "max_predicates"});
    read(a, "tau", cfg.anchors.tau, "anchors");
    read(a, "delta", cfg.anchors.delta, "anchors");
    read(a, "budget", cfg.anchors.budget, "anchors");
    read(a, "beam_width", cfg.anchors.beam_width, "anchors");
    read(a, "n_bins", cfg.anchors.n_bins, "anchors");
    read(a, "max_predicates", cfg.anchors.max_predicates, "anchors");
  }
  if (j.contains("embed")) {
    const auto& e = j["embed"];
    check_keys(e, "embed", {"k", "reg", "grid", "margin"});
    read(e, "k", cfg.embed.k, "embed");
    read(e, "reg", cfg.embed.reg, "embed");
    read(e, "grid", cfg.embed.grid, "embed");
    read(e, "margin", cfg.embed.margin, "embed");
  }
  if (j.contains("fairness")) {
    check_keys(j["fairness"], "fairness", {"threshold"});
    read(j["fairness"], "threshold", cfg.fairness_threshold, "fairness");
  }
  if (j.contains("sweep")) {
    check_keys(j["sweep"], "sweep", {"fractions"});
    read(j["sweep"], "fractions", cfg.sweep_fractions, "sweep");
  }
  if (j.contains("synth")) {
    const auto& s = j["synth"];
    check_keys(s, "synth", {"audio", "rate_hz", "corpora"});
    read(s, "audio", cfg.synth_audio, "synth");
    read(s, "rate_hz", cfg.synth_rate_hz, "synth");
    if (s.contains("corpora")) {
      if (!s["corpora"].is_array()) throw InputError("config: synth.corpora must be an array");
      cfg.synth.clear();
      for (std::size_t i = 0; i < s["corpora"].size(); ++i) {
        cfg.synth.push_back(read_corpus(s["corpora"][i], i));
      }
    }
  }
  validate_paths(cfg);
  return cfg;
}

void validate_paths(const RunConfig& cfg) {
  auto must_exist = [](const fs::path& p, std::string_view what) {
    if (!fs::exists(p)) throw InputError(fmt::format("{} not found: {}", what, p.string()));
  };
  for (const auto& [name, p] : cfg.datasets) must_exist(p, "manifest of dataset " + name);
  for (const auto& [kind, p] : cfg.lexicons) must_exist(p, std::string(to_string(kind)) + " lexicon");
  if (cfg.rules) must_exist(*cfg.rules, "rules file");
  if (cfg.schema) must_exist(*cfg.schema, "schema file");
}

DatasetExpr parse_dataset_expr(std::string_view text) {
  std::size_t pos = 0;
  auto fail = [&](std::string_view what) -> InputError {
    return InputError(fmt::format("dataset expression '{}': {} at offset {}", text, what, pos));
  };
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto is_name_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '\'';
  };
  auto name = [&]() -> std::string {
    skip_ws();
    const std::size_t start = pos;
    if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      throw fail("expected a dataset name");
    }
    while (pos < text.size() && is_name_char(text[pos])) ++pos;
    if (pos == start) throw fail("expected a dataset name");
    return std::string(text.substr(start, pos - start));
  };

  DatasetExpr expr;
  expr.base = name();
  for (;;) {
    skip_ws();
    if (pos == text.size()) break;
    if (text[pos] != '+') throw fail("expected '+'");
    ++pos;
    skip_ws();
    DatasetTerm term;
    if (pos < text.size() && (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.')) {
      const std::size_t start = pos;
      while (pos < text.size() &&
             (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.')) {
        ++pos;
      }
      const std::string_view num = text.substr(start, pos - start);
      double f = 0;
      const auto [end, ec] = std::from_chars(num.data(), num.data() + num.size(), f);
      if (ec != std::errc() || end != num.data() + num.size()) throw fail("malformed fraction");
      if (!(f >= 0 && f <= 1)) throw fail("fraction outside [0, 1]");
      skip_ws();
      if (pos == text.size() || text[pos] != '*') throw fail("expected '*' after fraction");
      ++pos;
      term.fraction = f;
    }
    term.name = name();
    expr.parts.push_back(term);
  }
  return expr;
}

}  // namespace adspeech::cli
