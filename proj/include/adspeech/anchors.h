#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "adspeech/common.h"
#include "adspeech/matrix.h"

namespace adspeech {

// feature value in [lo, hi); lo = -inf / hi = +inf for open-ended bins.
struct Predicate {
  std::size_t feature = 0;
  double lo = 0;
  double hi = 0;

  bool holds(double v) const { return v >= lo && v < hi; }
  bool operator==(const Predicate&) const = default;
};

using PredicateSet = std::vector<Predicate>;

bool satisfies(const PredicateSet& a, std::span<const double> row);

struct Anchor {
  PredicateSet predicates;  // sorted by feature
  double precision = 0;
  double radius = 0;
  double coverage = 0;
  std::string instance_id;
  Label label = Label::HC;
  bool converged = false;
};

struct SearchConfig {
  double tau = 0.95;
  double delta = 0.05;
  std::size_t budget = 1000;
  std::size_t beam_width = 10;
  int n_bins = 4;
  std::size_t max_predicates = 0;  // 0: number of features
  std::uint64_t seed = 0;

  void validate() const;
};

// Batch classifier: one label per row.
using Predictor = std::function<std::vector<Label>(const Matrix&)>;

// Interior quantile edges per feature (linear interpolation between order
// statistics), deduplicated, dropping edges at or below the column minimum.
// A constant column gets no edges, i.e. one bin. x must not contain NaN.
std::vector<std::vector<double>> discretize(const Matrix& x, int n_bins);

// The bin of `edges` that contains v.
Predicate bin_predicate(std::size_t feature, const std::vector<double>& edges, double v);

double coverage(const PredicateSet& a, const Matrix& x);

struct PrecisionEstimate {
  double precision = 0;
  double radius = 0;  // Hoeffding: sqrt(ln(2/delta) / (2 budget))
  double lower() const { return std::max(0.0, precision - radius); }
};

// Perturbations keep the anchored features at the instance's values and draw
// every other feature independently from its empirical marginal in `train`.
// Throws InputError when no training row satisfies the anchor.
PrecisionEstimate estimate_precision(const PredicateSet& a, std::span<const double> instance,
                                     Label label, const Predictor& model, const Matrix& train,
                                     std::size_t budget, double delta, std::uint64_t seed);

// Beam search for the highest-coverage anchor whose precision lower bound
// reaches tau. If none does, the anchor with the best lower bound is returned
// with converged = false.
Anchor find_anchor(std::span<const double> instance, const Predictor& model, const Matrix& train,
                   const SearchConfig& cfg, std::string instance_id = {});

// Instance i is searched with seed derive_seed(cfg.seed, {i}).
std::vector<Anchor> explain_all(const Matrix& instances, const std::vector<std::string>& ids,
                                const Predictor& model, const Matrix& train,
                                const SearchConfig& cfg);

double mean_coverage(const Matrix& test, const Predictor& model, const Matrix& train,
                     const SearchConfig& cfg);

// One JSON object (single line, no trailing newline).
std::string anchor_to_json(const Anchor& a, const std::vector<std::string>& feature_names);

}  // namespace adspeech
