#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "adspeech/corpus.h"
#include "adspeech/features.h"
#include "adspeech/models.h"

namespace adspeech {

// Feature rows joined with sample metadata. x may hold NaN (missing) cells;
// models impute with training-fold means.
struct DesignMatrix {
  std::string schema_id;
  std::vector<std::string> feature_names;
  std::vector<std::string> sample_ids;
  std::vector<std::string> subject_ids;
  std::vector<Task> tasks;
  std::vector<int> ages;
  std::vector<Label> y;
  Matrix x;

  std::size_t size() const { return sample_ids.size(); }
  DesignMatrix select(std::span<const std::size_t> rows) const;
};

// Rows in dataset order; every sample must have a feature row.
DesignMatrix build_design(const Dataset& dataset, const FeatureTable& features);

// --- Metrics ----------------------------------------------------------------

// counts[truth][pred], index 0 = HC, 1 = AD.
struct Confusion {
  std::array<std::array<std::size_t, 2>, 2> counts{};

  void add(Label truth, Label pred) { ++counts[static_cast<int>(truth)][static_cast<int>(pred)]; }
  void merge(const Confusion& o);
  std::size_t total() const;
};

Confusion confusion(const std::vector<Label>& pred, const std::vector<Label>& truth);

struct F1 {
  double micro = 0;
  double macro = 0;
};

F1 f1_scores(const std::vector<Label>& pred, const std::vector<Label>& truth);
F1 f1_scores(const Confusion& c);

// --- Cross-validation -------------------------------------------------------

struct FoldResult {
  int fold = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  bool skipped = false;
  F1 f1;
  Confusion confusion;
};

struct TaskError {
  std::size_t n = 0;
  std::size_t errors = 0;
  double rate() const { return n ? static_cast<double>(errors) / static_cast<double>(n) : 0.0; }
};

struct EvalReport {
  std::string dataset;
  std::size_t n_ad = 0;
  std::size_t n_hc = 0;
  ModelSpec spec;
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  F1 mean;    // over evaluated folds
  F1 pooled;  // over all out-of-fold predictions
  Confusion confusion;
  std::array<TaskError, kNumTasks> task_errors{};
  // Out-of-fold prediction per design row; empty when its fold was skipped.
  std::vector<std::optional<Label>> predictions;
  std::vector<std::string> notes;
};

// Subject-stratified k-fold CV. Imputation, SMOTE and standardization are fit
// on each training fold only. Folds run in parallel; results do not depend on
// the thread count.
EvalReport cross_validate(const DesignMatrix& data, const ModelSpec& spec, int k,
                          std::uint64_t seed);

std::string report_to_json(const EvalReport& report);

// Error rate on rows whose task is not in trained_tasks.
double out_of_task_error(const Model& model, const Matrix& x, const std::vector<Label>& truth,
                         const std::vector<Task>& tasks, const std::set<Task>& trained_tasks);
double out_of_task_error(const std::vector<Label>& pred, const std::vector<Label>& truth,
                         const std::vector<Task>& tasks, const std::set<Task>& trained_tasks);

}  // namespace adspeech
