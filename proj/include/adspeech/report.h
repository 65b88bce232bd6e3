#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adspeech/learn.h"

namespace adspeech {

struct GroupMetric {
  std::size_t n = 0;
  std::optional<double> f1_micro;  // absent for an empty group
};

// Ages below the threshold are "young"; the threshold age itself is "old".
struct FairnessReport {
  int threshold = 60;
  GroupMetric young;
  GroupMetric old;
  std::optional<double> gap;  // |young - old| when both exist
};

FairnessReport fairness_by_age(const std::vector<Label>& pred, const std::vector<Label>& truth,
                               const std::vector<int>& ages, int threshold = 60);
std::string fairness_to_json(const FairnessReport& r);

struct TableRow {
  std::string dataset;
  std::size_t n_ad = 0;
  std::size_t n_hc = 0;
  std::vector<std::optional<F1>> scores;  // aligned with ResultsTable::models
};

struct ResultsTable {
  std::vector<ModelKind> models;
  std::vector<TableRow> rows;
};

// One row per dataset label, one column pair per model kind, both in order of
// first appearance. Cells hold fold-mean F1.
ResultsTable results_table(const std::vector<EvalReport>& reports);

// mark[row][2 * model + {0: micro, 1: macro}]: cell equals its column maximum.
std::vector<std::vector<bool>> column_maxima(const ResultsTable& t);

// Raw values at full precision.
std::string table_csv(const ResultsTable& t);
ResultsTable parse_table_csv(std::string_view csv);
// Percentages with two decimals; column maxima starred.
std::string table_text(const ResultsTable& t);

struct SweepPoint {
  double fraction = 0;
  std::size_t added = 0;
  F1 f1;
};

// For each fraction: combine(base, augment * fraction), then subject-stratified
// CV of `spec`.
std::vector<SweepPoint> sweep_curve(const Dataset& base, const Dataset& augment,
                                    const std::vector<double>& fractions,
                                    const FeatureTable& features, const ModelSpec& spec, int k,
                                    std::uint64_t seed);

std::string sweep_csv(const std::vector<SweepPoint>& curve);
std::string sweep_svg(const std::vector<SweepPoint>& curve, const std::string& title);

}  // namespace adspeech
