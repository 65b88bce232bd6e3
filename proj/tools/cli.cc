#include "cli.h"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <set>
#include <unordered_map>

#include "adspeech/io.h"
#include "adspeech/kernels.h"
#include "adspeech/learn.h"
#include "adspeech/report.h"
#include "adspeech/rng.h"

namespace adspeech::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::size_t kExtractChunk = 64;

// Collects the artifacts of one command and writes <command>.run.json.
class RunRecord {
 public:
  RunRecord(const RunConfig& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {
    fs::create_directories(cfg_.out);
  }

  void arg(const std::string& key, ordered_json value) { args_[key] = std::move(value); }

  void input(const fs::path& p) {
    if (!seen_inputs_.insert(p).second) return;
    inputs_.push_back({{"path", cfg_.display(p)}, {"sha256", sha256_file(p)}});
  }

  fs::path write(const std::string& name, std::string_view contents) {
    const fs::path p = cfg_.out / name;
    write_file(p, contents);
    artifact(p, contents);
    return p;
  }

  void artifact(const fs::path& p, std::string_view contents) {
    const fs::path rel = p.lexically_relative(cfg_.out);
    const std::string shown =
        rel.empty() || *rel.begin() == ".." ? cfg_.display(p) : rel.generic_string();
    artifacts_.push_back({{"path", shown}, {"sha256", sha256_hex(contents)}});
  }

  void finish() {
    ordered_json j;
    j["command"] = command_;
    j["seed"] = cfg_.seed;
    if (cfg_.config_file) {
      j["config"] = {{"path", cfg_.display(*cfg_.config_file)},
                     {"sha256", sha256_file(*cfg_.config_file)}};
    } else {
      j["config"] = nullptr;
    }
    j["args"] = args_;
    j["inputs"] = inputs_;
    j["artifacts"] = artifacts_;
    write_file(cfg_.out / (command_ + ".run.json"), j.dump(2) + "\n");
  }

 private:
  const RunConfig& cfg_;
  std::string command_;
  ordered_json args_ = ordered_json::object();
  ordered_json inputs_ = ordered_json::array();
  ordered_json artifacts_ = ordered_json::array();
  std::set<fs::path> seen_inputs_;
};

// Loads manifests on demand and evaluates dataset expressions.
class Datasets {
 public:
  explicit Datasets(const RunConfig& cfg, RunRecord& rec) : cfg_(cfg), rec_(rec) {}

  const Dataset& get(const std::string& name) {
    if (auto it = cache_.find(name); it != cache_.end()) return it->second;
    const auto m = cfg_.datasets.find(name);
    if (m == cfg_.datasets.end()) throw InputError(fmt::format("unknown dataset '{}'", name));
    Dataset d = load_manifest(m->second);
    d.name = name;
    rec_.input(m->second);
    return cache_.emplace(name, std::move(d)).first->second;
  }

  Dataset eval(const std::string& text) {
    const DatasetExpr expr = parse_dataset_expr(text);
    const Dataset& base = get(expr.base);
    if (expr.parts.empty()) return base;
    std::vector<DatasetPart> parts;
    for (const auto& t : expr.parts) parts.push_back({&get(t.name), t.fraction});
    return combine(base, parts, cfg_.seed);
  }

 private:
  const RunConfig& cfg_;
  RunRecord& rec_;
  std::unordered_map<std::string, Dataset> cache_;
};

FeatureTable load_features(const RunConfig& cfg, RunRecord& rec) {
  const fs::path p = cfg.features_path();
  if (!fs::exists(p)) {
    throw InputError(fmt::format("features file {} not found; run extract first", p.string()));
  }
  rec.input(p);
  return read_feature_table(p);
}

ModelSpec model_spec(const RunConfig& cfg, ModelKind kind) {
  ModelSpec spec = cfg.model;
  spec.kind = kind;
  spec.seed = cfg.seed;
  spec.validate();
  return spec;
}

Predictor predictor_of(const Model& model) {
  return [&model](const Matrix& x) { return predict(model, x); };
}

// --- synth ------------------------------------------------------------------

int cmd_synth(const RunConfig& cfg) {
  if (cfg.synth.empty()) throw InputError("synth: no corpora configured");
  RunRecord rec(cfg, "synth");
  rec.arg("audio", cfg.synth_audio);
  rec.arg("rate_hz", cfg.synth_rate_hz);

  ordered_json generated;
  generated["seed"] = cfg.seed;
  generated["datasets"] = ordered_json::object();
  for (std::size_t i = 0; i < cfg.synth.size(); ++i) {
    SynthSpec spec = cfg.synth[i].spec;
    spec.audio_rate_hz = cfg.synth_rate_hz;
    spec.validate();
    const Dataset d = synth_generate(spec, derive_seed(cfg.seed, {i}));
    const fs::path dir = cfg.out / spec.name;
    const auto files = write_corpus(dir, d, cfg.synth_audio, cfg.synth_rate_hz,
                                    derive_seed(cfg.seed, {i, 1}));
    for (const auto& f : files) rec.artifact(dir / f, read_file(dir / f));
    generated["datasets"][spec.name] = spec.name + "/manifest.csv";
  }
  const fs::path res = cfg.out / "resources";
  const auto lexicons = synth_lexicons();
  for (const auto& f : write_resources(res, lexicons, default_rules())) {
    rec.artifact(res / f, read_file(res / f));
  }
  ordered_json lex = ordered_json::object();
  for (const auto& l : lexicons) {
    lex[std::string(to_string(l.kind))] = fmt::format("resources/lexicons/{}.csv", to_string(l.kind));
  }
  generated["features"] = "features.csv";
  generated["resources"] = {{"lexicons", lex}, {"rules", "resources/rules.txt"}};
  generated["out"] = "results";
  rec.write("config.json", generated.dump(2) + "\n");
  rec.finish();
  std::cout << fmt::format("wrote {} corpora under {}\n", cfg.synth.size(), cfg.out.string());
  return 0;
}

// --- extract ----------------------------------------------------------------

ExtractionConfig extraction_config(const RunConfig& cfg, RunRecord& rec) {
  ExtractionConfig ec;
  ec.linguistic.lexicons.clear();
  for (const auto& [kind, p] : cfg.lexicons) {
    ec.linguistic.lexicons.push_back(load_lexicon(p, kind));
    rec.input(p);
  }
  if (cfg.rules) {
    ec.linguistic.rules = load_rules(*cfg.rules);
    rec.input(*cfg.rules);
  }
  ec.linguistic.mattr_window = cfg.mattr_window;
  ec.linguistic.cosine_cutoff = cfg.cosine_cutoff;
  ec.acoustic = cfg.acoustic;
  return ec;
}

FeatureTable ordered_table(const FeatureSchema& schema, const std::vector<std::string>& order,
                           const std::map<std::string, std::vector<double>>& rows) {
  FeatureTable t;
  t.schema = schema;
  t.values = Matrix(0, schema.size());
  for (const auto& id : order) {
    const auto it = rows.find(id);
    if (it == rows.end()) continue;
    t.sample_ids.push_back(id);
    t.values.append_row(it->second);
  }
  return t;
}

void write_atomic(const fs::path& p, std::string_view contents) {
  fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".partial";
  write_file(tmp, contents);
  fs::rename(tmp, p);
}

int cmd_extract(const RunConfig& cfg, const std::vector<std::string>& names) {
  RunRecord rec(cfg, "extract");
  const ExtractionConfig ec = extraction_config(cfg, rec);
  FeatureSchema schema;
  if (cfg.schema) {
    schema = load_schema_file(*cfg.schema);
    rec.input(*cfg.schema);
  } else {
    schema = FeatureSchema(feature_names(ec));
  }

  std::vector<std::string> selected = names;
  if (selected.empty()) {
    for (const auto& [name, _] : cfg.datasets) selected.push_back(name);
  }
  if (selected.empty()) throw InputError("extract: no datasets configured");
  rec.arg("datasets", selected);

  Datasets datasets(cfg, rec);
  Dataset all;
  all.name = "extract";
  std::set<std::string> ids;
  for (const auto& name : selected) {
    for (const auto& s : datasets.get(name).samples) {
      if (!ids.insert(s.sample_id).second) {
        throw InputError(fmt::format("sample id {} appears in more than one dataset", s.sample_id));
      }
      all.samples.push_back(s);
    }
  }

  // Rows already on disk are kept; rows of other samples stay after ours.
  const fs::path out_path = cfg.features_path();
  std::map<std::string, std::vector<double>> rows;
  std::vector<std::string> order;
  for (const auto& s : all.samples) order.push_back(s.sample_id);
  if (fs::exists(out_path)) {
    const FeatureTable prior = read_feature_table(out_path);
    if (!(prior.schema == schema)) {
      throw InputError(fmt::format("{} was written under a different feature schema",
                                   out_path.string()));
    }
    for (std::size_t i = 0; i < prior.sample_ids.size(); ++i) {
      const auto r = prior.values.row(i);
      rows[prior.sample_ids[i]].assign(r.begin(), r.end());
      if (!ids.count(prior.sample_ids[i])) order.push_back(prior.sample_ids[i]);
    }
  }

  std::vector<SpeechSample> todo;
  for (const auto& s : all.samples) {
    if (!rows.count(s.sample_id)) todo.push_back(s);
  }
  const std::size_t resumed = all.samples.size() - todo.size();

  ExtractionLog log;
  const AudioSource audio = audio_from_files();
  for (std::size_t start = 0; start < todo.size(); start += kExtractChunk) {
    Dataset chunk;
    chunk.name = all.name;
    const std::size_t end = std::min(todo.size(), start + kExtractChunk);
    chunk.samples.assign(todo.begin() + static_cast<std::ptrdiff_t>(start),
                         todo.begin() + static_cast<std::ptrdiff_t>(end));
    const FeatureTable part = extract_dataset(chunk, schema, ec, audio, &log);
    for (std::size_t i = 0; i < part.sample_ids.size(); ++i) {
      const auto r = part.values.row(i);
      rows[part.sample_ids[i]].assign(r.begin(), r.end());
    }
    write_atomic(out_path, render_feature_table(ordered_table(schema, order, rows)));
  }
  const std::string table = render_feature_table(ordered_table(schema, order, rows));
  write_atomic(out_path, table);
  rec.artifact(out_path, table);

  std::string log_text;
  for (const auto& w : log.warnings) {
    log_text += w + "\n";
    std::cerr << "warning: " << w << "\n";
  }
  rec.write("extract.log", log_text);
  rec.arg("resumed", resumed);
  rec.arg("extracted", todo.size() - log.failed.size());
  rec.arg("failed", log.failed);
  rec.finish();
  std::cout << fmt::format("{} rows ({} resumed, {} failed) -> {}\n", rows.size(), resumed,
                           log.failed.size(), out_path.string());
  return log.failed.empty() ? 0 : 2;
}

// --- evaluate ---------------------------------------------------------------

int cmd_evaluate(const RunConfig& cfg, const std::vector<std::string>& exprs,
                 const std::vector<ModelKind>& kinds) {
  RunRecord rec(cfg, "evaluate");
  rec.arg("expressions", exprs);
  std::vector<std::string> model_names;
  for (auto k : kinds) model_names.emplace_back(to_string(k));
  rec.arg("models", model_names);
  rec.arg("k", cfg.cv_k);

  const FeatureTable features = load_features(cfg, rec);
  Datasets datasets(cfg, rec);
  std::vector<EvalReport> reports;
  std::string jsonl;
  for (const auto& text : exprs) {
    const Dataset d = datasets.eval(text);
    const DesignMatrix design = build_design(d, features);
    for (auto kind : kinds) {
      EvalReport r = cross_validate(design, model_spec(cfg, kind), cfg.cv_k, cfg.seed);
      r.dataset = text;
      for (const auto& note : r.notes) std::cerr << fmt::format("{} {}: {}\n", text, to_string(kind), note);
      jsonl += report_to_json(r) + "\n";
      reports.push_back(std::move(r));
    }
  }
  const ResultsTable table = results_table(reports);
  rec.write("results.csv", table_csv(table));
  const std::string text = table_text(table);
  rec.write("results.txt", text);
  rec.write("reports.jsonl", jsonl);
  rec.finish();
  std::cout << text;
  return 0;
}

// --- explain ----------------------------------------------------------------

int cmd_explain(const RunConfig& cfg, const std::string& train_expr,
                const std::optional<std::string>& test_expr, ModelKind kind,
                std::optional<std::size_t> limit) {
  RunRecord rec(cfg, "explain");
  rec.arg("train", train_expr);
  rec.arg("test", test_expr ? ordered_json(*test_expr) : ordered_json(nullptr));
  rec.arg("model", std::string(to_string(kind)));
  rec.arg("limit", limit ? ordered_json(*limit) : ordered_json(nullptr));
  cfg.anchors.validate();

  const FeatureTable features = load_features(cfg, rec);
  Datasets datasets(cfg, rec);
  const DesignMatrix train_d = build_design(datasets.eval(train_expr), features);
  const DesignMatrix test_d =
      test_expr ? build_design(datasets.eval(*test_expr), features) : train_d;

  const Model model = adspeech::train(model_spec(cfg, kind), train_d.x, train_d.y, train_d.schema_id);
  const Matrix train_x = model.imputer.apply(train_d.x);
  std::size_t n = test_d.size();
  if (limit) n = std::min(n, *limit);
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  const Matrix instances = model.imputer.apply(test_d.x.select_rows(rows));
  const std::vector<std::string> ids(test_d.sample_ids.begin(),
                                     test_d.sample_ids.begin() + static_cast<std::ptrdiff_t>(n));

  SearchConfig sc = cfg.anchors;
  sc.seed = cfg.seed;
  const auto anchors = explain_all(instances, ids, predictor_of(model), train_x, sc);
  std::string jsonl;
  double cov = 0;
  std::size_t converged = 0;
  for (const auto& a : anchors) {
    jsonl += anchor_to_json(a, features.schema.names()) + "\n";
    cov += a.coverage;
    converged += a.converged;
  }
  rec.write("anchors.jsonl", jsonl);
  rec.write("model.json", model_to_json(model) + "\n");
  const double mean_cov = anchors.empty() ? 0.0 : cov / static_cast<double>(anchors.size());
  rec.arg("mean_coverage", mean_cov);
  rec.arg("converged", converged);
  rec.finish();
  std::cout << fmt::format("{} anchors, {} converged, mean coverage {}\n", anchors.size(),
                           converged, format_double(mean_cov));
  return 0;
}

// --- embed ------------------------------------------------------------------

int cmd_embed(const RunConfig& cfg, const std::string& train_expr, const std::string& oot_expr,
              ModelKind kind) {
  RunRecord rec(cfg, "embed");
  rec.arg("train", train_expr);
  rec.arg("oot", oot_expr);
  rec.arg("model", std::string(to_string(kind)));

  const FeatureTable features = load_features(cfg, rec);
  Datasets datasets(cfg, rec);
  const DesignMatrix train_d = build_design(datasets.eval(train_expr), features);
  const DesignMatrix oot_d = build_design(datasets.eval(oot_expr), features);
  const Fig2Result r = fig2_pipeline(train_d, oot_d, model_spec(cfg, kind), cfg.embed);

  rec.write("boundary.pgm", raster_to_pgm(r.raster));
  rec.write("boundary.svg", raster_to_svg(r.raster, r.train2d, train_d.y, r.oot2d, oot_d.y));
  rec.write("embedding.csv", embedding_csv(train_d, r.train2d, oot_d, r.oot2d));
  ordered_json summary;
  summary["out_of_task_error"] = r.out_of_task_error;
  summary["n_train"] = train_d.size();
  summary["n_out_of_task"] = oot_d.size();
  summary["eigenvalues"] = r.map.eigenvalues;
  rec.write("embed.json", summary.dump(2) + "\n");
  rec.finish();
  std::cout << fmt::format("out-of-task error {}\n", format_double(r.out_of_task_error));
  return 0;
}

// --- fairness ---------------------------------------------------------------

int cmd_fairness(const RunConfig& cfg, const std::string& expr, ModelKind kind, int threshold) {
  RunRecord rec(cfg, "fairness");
  rec.arg("dataset", expr);
  rec.arg("model", std::string(to_string(kind)));
  rec.arg("threshold", threshold);

  const FeatureTable features = load_features(cfg, rec);
  Datasets datasets(cfg, rec);
  const DesignMatrix design = build_design(datasets.eval(expr), features);
  const EvalReport report = cross_validate(design, model_spec(cfg, kind), cfg.cv_k, cfg.seed);
  std::vector<Label> pred, truth;
  std::vector<int> ages;
  for (std::size_t i = 0; i < design.size(); ++i) {
    if (!report.predictions[i]) continue;
    pred.push_back(*report.predictions[i]);
    truth.push_back(design.y[i]);
    ages.push_back(design.ages[i]);
  }
  const FairnessReport f = fairness_by_age(pred, truth, ages, threshold);
  const std::string json = fairness_to_json(f);
  rec.write("fairness.json", json + "\n");
  rec.finish();
  std::cout << json << "\n";
  return 0;
}

// --- sweep ------------------------------------------------------------------

int cmd_sweep(const RunConfig& cfg, const std::string& base_expr, const std::string& augment_expr,
              ModelKind kind, const std::vector<double>& fractions) {
  RunRecord rec(cfg, "sweep");
  rec.arg("base", base_expr);
  rec.arg("augment", augment_expr);
  rec.arg("model", std::string(to_string(kind)));
  rec.arg("fractions", fractions);
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] >= 0 && fractions[i] <= 1) || (i && fractions[i] < fractions[i - 1])) {
      throw InputError("sweep: fractions must be ascending within [0, 1]");
    }
  }

  const FeatureTable features = load_features(cfg, rec);
  Datasets datasets(cfg, rec);
  const Dataset base = datasets.eval(base_expr);
  Dataset augment = datasets.eval(augment_expr);
  const auto curve =
      sweep_curve(base, augment, fractions, features, model_spec(cfg, kind), cfg.cv_k, cfg.seed);
  const std::string csv = sweep_csv(curve);
  rec.write("sweep.csv", csv);
  rec.write("sweep.svg",
            sweep_svg(curve, fmt::format("{} + f*{} ({})", base_expr, augment_expr, to_string(kind))));
  rec.finish();
  std::cout << csv;
  return 0;
}

std::vector<ModelKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<ModelKind> out;
  for (const auto& n : names) out.push_back(parse_model_kind(n));
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Speech-based dementia screening pipeline"};
  app.require_subcommand(1);

  std::optional<std::string> config_path, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> features;
  std::vector<std::string> manifests;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--jobs", jobs, "worker threads (1 = sequential)");
  app.add_option("--out", out, "output directory");
  app.add_option("--features", features, "feature table path");
  app.add_option("--manifest", manifests, "extra dataset NAME=PATH");

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with resources");
  std::optional<double> synth_delta;
  bool no_audio = false;
  synth->add_option("--delta", synth_delta, "class separation of every corpus");
  synth->add_flag("--no-audio", no_audio, "skip WAV rendering");

  auto* extract = app.add_subcommand("extract", "extract feature rows (resumable)");
  std::vector<std::string> extract_sets;
  extract->add_option("--dataset", extract_sets, "dataset names (default: all)");

  auto* evaluate = app.add_subcommand("evaluate", "cross-validate all models on dataset expressions");
  std::vector<std::string> exprs;
  std::vector<std::string> eval_models;
  std::optional<int> eval_k;
  evaluate->add_option("expr", exprs, "NAME (+ [FRAC*]NAME)*")->required();
  evaluate->add_option("--models", eval_models, "model kinds (default: all four)")->delimiter(',');
  evaluate->add_option("--k", eval_k, "folds");

  std::string model_name;
  auto* explain = app.add_subcommand("explain", "anchor explanations as JSON lines");
  std::string explain_train;
  std::optional<std::string> explain_test;
  std::optional<std::size_t> explain_limit;
  explain->add_option("train", explain_train, "training dataset expression")->required();
  explain->add_option("--test", explain_test, "instances to explain (default: training set)");
  explain->add_option("--limit", explain_limit, "explain only the first N instances");
  explain->add_option("--model", model_name, "model kind");

  auto* embed = app.add_subcommand("embed", "2-D embedding with decision raster");
  std::string embed_train, embed_oot;
  embed->add_option("train", embed_train, "training dataset expression")->required();
  embed->add_option("--oot", embed_oot, "out-of-task dataset expression")->required();
  embed->add_option("--model", model_name, "model kind");

  auto* fairness = app.add_subcommand("fairness", "F1 by age group from CV predictions");
  std::string fair_expr;
  std::optional<int> threshold;
  fairness->add_option("dataset", fair_expr, "dataset expression")->required();
  fairness->add_option("--threshold", threshold, "age threshold");
  fairness->add_option("--model", model_name, "model kind");

  auto* sweep = app.add_subcommand("sweep", "F1 versus augmentation fraction");
  std::string sweep_base, sweep_aug;
  std::vector<double> fractions;
  sweep->add_option("base", sweep_base, "base dataset expression")->required();
  sweep->add_option("--augment", sweep_aug, "augmentation dataset expression")->required();
  sweep->add_option("--fractions", fractions, "ascending fractions in [0, 1]")->delimiter(',');
  sweep->add_option("--model", model_name, "model kind");

  for (auto* sub : {synth, extract, evaluate, explain, embed, fairness, sweep}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = config_path ? load_config(*config_path) : default_config();
    const fs::path cwd = fs::current_path();
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    if (out) cfg.out = (cwd / *out).lexically_normal();
    if (features) cfg.features = (cwd / *features).lexically_normal();
    for (const auto& m : manifests) {
      const auto eq = m.find('=');
      if (eq == std::string::npos || eq == 0) throw InputError("--manifest expects NAME=PATH");
      cfg.datasets[m.substr(0, eq)] = (cwd / m.substr(eq + 1)).lexically_normal();
    }
    validate_paths(cfg);
    if (cfg.jobs < 0) throw InputError("--jobs must be >= 0");
    kernels::omp::set_threads(cfg.jobs);
    const ModelKind kind = model_name.empty() ? cfg.default_model : parse_model_kind(model_name);

    if (synth->parsed()) {
      if (synth_delta) {
        for (auto& c : cfg.synth) c.spec.delta = *synth_delta;
      }
      if (no_audio) cfg.synth_audio = false;
      return cmd_synth(cfg);
    }
    if (extract->parsed()) return cmd_extract(cfg, extract_sets);
    if (evaluate->parsed()) {
      if (eval_k) cfg.cv_k = *eval_k;
      return cmd_evaluate(cfg, exprs, eval_models.empty() ? cfg.models : parse_kinds(eval_models));
    }
    if (explain->parsed()) return cmd_explain(cfg, explain_train, explain_test, kind, explain_limit);
    if (embed->parsed()) return cmd_embed(cfg, embed_train, embed_oot, kind);
    if (fairness->parsed()) {
      return cmd_fairness(cfg, fair_expr, kind, threshold.value_or(cfg.fairness_threshold));
    }
    if (sweep->parsed()) {
      return cmd_sweep(cfg, sweep_base, sweep_aug, kind,
                       fractions.empty() ? cfg.sweep_fractions : fractions);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace adspeech::cli
