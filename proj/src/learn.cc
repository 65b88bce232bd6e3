#include "adspeech/learn.h"

#include <fmt/format.h>
#include <json.hpp>

#include "adspeech/kernels.h"
#include "adspeech/rng.h"

namespace adspeech {

DesignMatrix DesignMatrix::select(std::span<const std::size_t> rows) const {
  DesignMatrix out;
  out.schema_id = schema_id;
  out.feature_names = feature_names;
  out.x = x.select_rows(rows);
  for (std::size_t r : rows) {
    out.sample_ids.push_back(sample_ids[r]);
    out.subject_ids.push_back(subject_ids[r]);
    out.tasks.push_back(tasks[r]);
    out.ages.push_back(ages[r]);
    out.y.push_back(y[r]);
  }
  return out;
}

DesignMatrix build_design(const Dataset& dataset, const FeatureTable& features) {
  DesignMatrix dm;
  dm.schema_id = features.schema.id();
  dm.feature_names = features.schema.names();
  dm.x = Matrix(dataset.samples.size(), features.schema.size());
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const auto& s = dataset.samples[i];
    const auto row = features.row_of(s.sample_id);
    if (!row) throw InputError(fmt::format("no feature row for sample '{}'", s.sample_id));
    const auto src = features.values.row(*row);
    std::copy(src.begin(), src.end(), dm.x.row(i).begin());
    dm.sample_ids.push_back(s.sample_id);
    dm.subject_ids.push_back(s.subject_id);
    dm.tasks.push_back(s.task);
    dm.ages.push_back(s.age);
    dm.y.push_back(s.label);
  }
  return dm;
}

// --- Metrics ----------------------------------------------------------------

void Confusion::merge(const Confusion& o) {
  for (int t = 0; t < 2; ++t) {
    for (int p = 0; p < 2; ++p) counts[t][p] += o.counts[t][p];
  }
}

std::size_t Confusion::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

Confusion confusion(const std::vector<Label>& pred, const std::vector<Label>& truth) {
  if (pred.size() != truth.size()) throw InputError("prediction and truth lengths differ");
  Confusion c;
  for (std::size_t i = 0; i < pred.size(); ++i) c.add(truth[i], pred[i]);
  return c;
}

F1 f1_scores(const Confusion& c) {
  const std::size_t n = c.total();
  if (n == 0) throw InputError("f1 of empty input");
  F1 f;
  f.micro = static_cast<double>(c.counts[0][0] + c.counts[1][1]) / static_cast<double>(n);
  double sum = 0;
  for (int k = 0; k < 2; ++k) {
    const double tp = static_cast<double>(c.counts[k][k]);
    const double fp = static_cast<double>(c.counts[1 - k][k]);
    const double fn = static_cast<double>(c.counts[k][1 - k]);
    const double denom = 2 * tp + fp + fn;
    sum += denom > 0 ? 2 * tp / denom : 0.0;
  }
  f.macro = sum / 2.0;
  return f;
}

F1 f1_scores(const std::vector<Label>& pred, const std::vector<Label>& truth) {
  return f1_scores(confusion(pred, truth));
}

// --- Cross-validation -------------------------------------------------------

EvalReport cross_validate(const DesignMatrix& data, const ModelSpec& spec, int k,
                          std::uint64_t seed) {
  spec.validate();
  EvalReport rep;
  rep.spec = spec;
  rep.k = k;
  rep.seed = seed;
  for (Label l : data.y) ++(l == Label::AD ? rep.n_ad : rep.n_hc);
  if (rep.n_ad == 0 || rep.n_hc == 0) {
    throw InputError("cross-validation needs both AD and HC samples");
  }
  const auto fold_of = subject_folds(data.subject_ids, k, seed);

  rep.folds.resize(static_cast<std::size_t>(k));
  std::vector<std::vector<Label>> fold_preds(static_cast<std::size_t>(k));
  std::vector<std::vector<std::size_t>> test_rows(static_cast<std::size_t>(k));
  std::vector<std::vector<std::size_t>> train_rows(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (int f = 0; f < k; ++f) (fold_of[i] == f ? test_rows : train_rows)[f].push_back(i);
  }

  kernels::omp::for_each_index(static_cast<std::size_t>(k), [&](std::size_t f) {
    FoldResult& fr = rep.folds[f];
    fr.fold = static_cast<int>(f);
    fr.n_train = train_rows[f].size();
    fr.n_test = test_rows[f].size();
    bool seen[2] = {false, false};
    for (std::size_t r : train_rows[f]) seen[static_cast<int>(data.y[r])] = true;
    if (!seen[0] || !seen[1]) {
      fr.skipped = true;
      return;
    }
    const DesignMatrix train_set = data.select(train_rows[f]);
    const Matrix test_x = data.x.select_rows(test_rows[f]);
    ModelSpec fold_spec = spec;
    fold_spec.seed = derive_seed(spec.seed, {seed, f});
    const Model model = train(fold_spec, train_set.x, train_set.y, data.schema_id);
    fold_preds[f] = predict(model, test_x);
    std::vector<Label> truth;
    for (std::size_t r : test_rows[f]) truth.push_back(data.y[r]);
    fr.confusion = confusion(fold_preds[f], truth);
    fr.f1 = f1_scores(fr.confusion);
  });

  rep.predictions.assign(data.size(), std::nullopt);
  std::size_t evaluated = 0;
  for (std::size_t f = 0; f < rep.folds.size(); ++f) {
    const FoldResult& fr = rep.folds[f];
    if (fr.skipped) {
      rep.notes.push_back(
          fmt::format("fold {} skipped: training part lacks one of the classes", f));
      continue;
    }
    ++evaluated;
    rep.mean.micro += fr.f1.micro;
    rep.mean.macro += fr.f1.macro;
    rep.confusion.merge(fr.confusion);
    for (std::size_t i = 0; i < test_rows[f].size(); ++i) {
      const std::size_t r = test_rows[f][i];
      const Label p = fold_preds[f][i];
      rep.predictions[r] = p;
      auto& te = rep.task_errors[static_cast<int>(data.tasks[r])];
      ++te.n;
      te.errors += p != data.y[r];
    }
  }
  if (evaluated == 0) throw RuntimeError("every cross-validation fold was skipped");
  rep.mean.micro /= static_cast<double>(evaluated);
  rep.mean.macro /= static_cast<double>(evaluated);
  rep.pooled = f1_scores(rep.confusion);
  return rep;
}

std::string report_to_json(const EvalReport& r) {
  using nlohmann::json;
  const auto conf = [](const Confusion& c) {
    return json{{"hc_as_hc", c.counts[0][0]},
                {"hc_as_ad", c.counts[0][1]},
                {"ad_as_hc", c.counts[1][0]},
                {"ad_as_ad", c.counts[1][1]}};
  };
  json j;
  j["dataset"] = r.dataset;
  j["model"] = to_string(r.spec.kind);
  j["k"] = r.k;
  j["seed"] = r.seed;
  j["n_ad"] = r.n_ad;
  j["n_hc"] = r.n_hc;
  j["f1_micro_mean"] = r.mean.micro;
  j["f1_macro_mean"] = r.mean.macro;
  j["f1_micro_pooled"] = r.pooled.micro;
  j["f1_macro_pooled"] = r.pooled.macro;
  j["confusion"] = conf(r.confusion);
  json folds = json::array();
  for (const auto& f : r.folds) {
    json jf{{"fold", f.fold}, {"n_train", f.n_train}, {"n_test", f.n_test},
            {"skipped", f.skipped}};
    if (!f.skipped) {
      jf["f1_micro"] = f.f1.micro;
      jf["f1_macro"] = f.f1.macro;
      jf["confusion"] = conf(f.confusion);
    }
    folds.push_back(std::move(jf));
  }
  j["folds"] = std::move(folds);
  json tasks = json::object();
  for (int t = 0; t < kNumTasks; ++t) {
    const auto& te = r.task_errors[t];
    if (te.n == 0) continue;
    tasks[std::string(manifest_name(static_cast<Task>(t)))] = {
        {"n", te.n}, {"errors", te.errors}, {"error_rate", te.rate()}};
  }
  j["task_errors"] = std::move(tasks);
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

double out_of_task_error(const std::vector<Label>& pred, const std::vector<Label>& truth,
                         const std::vector<Task>& tasks, const std::set<Task>& trained_tasks) {
  if (pred.size() != truth.size() || pred.size() != tasks.size()) {
    throw InputError("out-of-task error: inputs differ in length");
  }
  std::size_t n = 0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (trained_tasks.count(tasks[i])) continue;
    ++n;
    errors += pred[i] != truth[i];
  }
  if (n == 0) throw InputError("out-of-task error: no samples from tasks outside training");
  return static_cast<double>(errors) / static_cast<double>(n);
}

double out_of_task_error(const Model& model, const Matrix& x, const std::vector<Label>& truth,
                         const std::vector<Task>& tasks, const std::set<Task>& trained_tasks) {
  return out_of_task_error(predict(model, x), truth, tasks, trained_tasks);
}

}  // namespace adspeech
