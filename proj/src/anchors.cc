#include "adspeech/anchors.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "adspeech/kernels.h"
#include "adspeech/rng.h"

namespace adspeech {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t candidate_seed(std::uint64_t seed, const PredicateSet& a) {
  std::uint64_t h = derive_seed(seed, {0xA4C, a.size()});
  for (const auto& p : a) h = derive_seed(h, {p.feature});
  return h;
}

PrecisionEstimate precision_unchecked(const PredicateSet& a, std::span<const double> instance,
                                      Label label, const Predictor& model, const Matrix& train,
                                      std::size_t budget, double delta, std::uint64_t seed) {
  const std::size_t d = train.cols();
  std::vector<bool> fixed(d, false);
  for (const auto& p : a) fixed[p.feature] = true;
  Matrix z(budget, d);
  Rng rng(seed);
  for (std::size_t s = 0; s < budget; ++s) {
    auto row = z.row(s);
    for (std::size_t j = 0; j < d; ++j) {
      row[j] = fixed[j] ? instance[j] : train(rng.index(train.rows()), j);
    }
  }
  const auto labels = model(z);
  std::size_t hits = 0;
  for (Label l : labels) hits += l == label;
  PrecisionEstimate e;
  e.precision = static_cast<double>(hits) / static_cast<double>(budget);
  e.radius = std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(budget)));
  return e;
}

void check_matrix(const Matrix& x) {
  for (double v : x.data()) {
    if (std::isnan(v)) throw InputError("anchors need imputed (NaN-free) features");
  }
}

struct Candidate {
  PredicateSet preds;
  PrecisionEstimate est;
  double coverage = 0;
};

// Ranking for the beam and the fallback: lower bound, then coverage, then the
// feature list.
bool better(const Candidate& a, const Candidate& b) {
  if (a.est.lower() != b.est.lower()) return a.est.lower() > b.est.lower();
  if (a.coverage != b.coverage) return a.coverage > b.coverage;
  return std::lexicographical_compare(
      a.preds.begin(), a.preds.end(), b.preds.begin(), b.preds.end(),
      [](const Predicate& x, const Predicate& y) { return x.feature < y.feature; });
}

}  // namespace

bool satisfies(const PredicateSet& a, std::span<const double> row) {
  for (const auto& p : a) {
    if (!p.holds(row[p.feature])) return false;
  }
  return true;
}

void SearchConfig::validate() const {
  if (!(tau >= 0 && tau <= 1)) throw InputError("anchors: tau must lie in [0, 1]");
  if (!(delta > 0 && delta < 1)) throw InputError("anchors: delta must lie in (0, 1)");
  if (budget < 1) throw InputError("anchors: budget must be >= 1");
  if (beam_width < 1) throw InputError("anchors: beam width must be >= 1");
  if (n_bins < 2) throw InputError("anchors: n_bins must be >= 2");
}

std::vector<std::vector<double>> discretize(const Matrix& x, int n_bins) {
  if (n_bins < 2) throw InputError("discretize: n_bins must be >= 2");
  if (x.rows() == 0) throw InputError("discretize: empty training matrix");
  check_matrix(x);
  std::vector<std::vector<double>> edges(x.cols());
  std::vector<double> col(x.rows());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    for (std::size_t r = 0; r < x.rows(); ++r) col[r] = x(r, j);
    std::sort(col.begin(), col.end());
    for (int b = 1; b < n_bins; ++b) {
      const double pos = static_cast<double>(b) / n_bins * static_cast<double>(col.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const std::size_t hi = std::min(lo + 1, col.size() - 1);
      const double e = col[lo] + (pos - static_cast<double>(lo)) * (col[hi] - col[lo]);
      if (e > col.front() && (edges[j].empty() || e > edges[j].back())) edges[j].push_back(e);
    }
  }
  return edges;
}

Predicate bin_predicate(std::size_t feature, const std::vector<double>& edges, double v) {
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  Predicate p;
  p.feature = feature;
  p.lo = it == edges.begin() ? -kInf : *(it - 1);
  p.hi = it == edges.end() ? kInf : *it;
  return p;
}

double coverage(const PredicateSet& a, const Matrix& x) {
  if (x.rows() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < x.rows(); ++r) hits += satisfies(a, x.row(r));
  return static_cast<double>(hits) / static_cast<double>(x.rows());
}

PrecisionEstimate estimate_precision(const PredicateSet& a, std::span<const double> instance,
                                     Label label, const Predictor& model, const Matrix& train,
                                     std::size_t budget, double delta, std::uint64_t seed) {
  if (budget < 1) throw InputError("precision budget must be >= 1");
  if (coverage(a, train) == 0.0) throw InputError("anchor is not satisfied by any training row");
  return precision_unchecked(a, instance, label, model, train, budget, delta, seed);
}

Anchor find_anchor(std::span<const double> instance, const Predictor& model, const Matrix& train,
                   const SearchConfig& cfg, std::string instance_id) {
  cfg.validate();
  if (instance.size() != train.cols()) throw InputError("anchors: instance dimension mismatch");
  const auto edges = discretize(train, cfg.n_bins);
  const std::size_t d = train.cols();
  const std::size_t max_preds = cfg.max_predicates ? std::min(cfg.max_predicates, d) : d;

  Matrix one(1, d);
  std::copy(instance.begin(), instance.end(), one.row(0).begin());
  const Label label = model(one).at(0);

  const auto evaluate = [&](Candidate& c) {
    c.est = precision_unchecked(c.preds, instance, label, model, train, cfg.budget, cfg.delta,
                                candidate_seed(cfg.seed, c.preds));
    c.coverage = coverage(c.preds, train);
  };
  const auto qualifies = [&](const Candidate& c) { return c.est.lower() >= cfg.tau; };

  Candidate root;
  evaluate(root);
  std::optional<Candidate> best_q;
  Candidate best_any = root;
  if (qualifies(root)) best_q = root;

  std::vector<Candidate> beam;
  if (!best_q) beam.push_back(root);
  for (std::size_t level = 1; level <= max_preds && !beam.empty(); ++level) {
    std::set<std::vector<std::size_t>> seen;
    std::vector<Candidate> cands;
    for (const auto& b : beam) {
      std::vector<bool> used(d, false);
      for (const auto& p : b.preds) used[p.feature] = true;
      for (std::size_t f = 0; f < d; ++f) {
        if (used[f]) continue;
        Candidate c;
        c.preds = b.preds;
        c.preds.push_back(bin_predicate(f, edges[f], instance[f]));
        std::sort(c.preds.begin(), c.preds.end(),
                  [](const Predicate& x, const Predicate& y) { return x.feature < y.feature; });
        std::vector<std::size_t> key;
        for (const auto& p : c.preds) key.push_back(p.feature);
        if (seen.insert(key).second) cands.push_back(std::move(c));
      }
    }
    kernels::omp::for_each_index(cands.size(), [&](std::size_t i) { evaluate(cands[i]); });

    for (const auto& c : cands) {
      if (better(c, best_any)) best_any = c;
      if (!qualifies(c)) continue;
      if (!best_q || c.coverage > best_q->coverage ||
          (c.coverage == best_q->coverage && better(c, *best_q))) {
        best_q = c;
      }
    }
    // Extensions can only lose coverage, so anything not beating the current
    // qualifying anchor is pruned.
    beam.clear();
    for (auto& c : cands) {
      if (qualifies(c)) continue;
      if (best_q && c.coverage <= best_q->coverage) continue;
      beam.push_back(std::move(c));
    }
    std::sort(beam.begin(), beam.end(), better);
    if (beam.size() > cfg.beam_width) beam.resize(cfg.beam_width);
  }

  const Candidate& chosen = best_q ? *best_q : best_any;
  Anchor a;
  a.predicates = chosen.preds;
  a.precision = chosen.est.precision;
  a.radius = chosen.est.radius;
  a.coverage = chosen.coverage;
  a.instance_id = std::move(instance_id);
  a.label = label;
  a.converged = best_q.has_value();
  return a;
}

std::vector<Anchor> explain_all(const Matrix& instances, const std::vector<std::string>& ids,
                                const Predictor& model, const Matrix& train,
                                const SearchConfig& cfg) {
  if (!ids.empty() && ids.size() != instances.rows()) {
    throw InputError("explain: ids and instances differ in length");
  }
  std::vector<Anchor> out;
  for (std::size_t i = 0; i < instances.rows(); ++i) {
    SearchConfig c = cfg;
    c.seed = derive_seed(cfg.seed, {i});
    out.push_back(find_anchor(instances.row(i), model, train, c, ids.empty() ? "" : ids[i]));
  }
  return out;
}

double mean_coverage(const Matrix& test, const Predictor& model, const Matrix& train,
                     const SearchConfig& cfg) {
  if (test.rows() == 0) throw InputError("mean coverage of an empty test set");
  double s = 0;
  for (const auto& a : explain_all(test, {}, model, train, cfg)) s += a.coverage;
  return s / static_cast<double>(test.rows());
}

std::string anchor_to_json(const Anchor& a, const std::vector<std::string>& names) {
  using nlohmann::json;
  json preds = json::array();
  for (const auto& p : a.predicates) {
    json jp;
    jp["feature"] = p.feature < names.size() ? names[p.feature] : fmt::format("f{}", p.feature);
    jp["lo"] = std::isinf(p.lo) ? json(nullptr) : json(p.lo);
    jp["hi"] = std::isinf(p.hi) ? json(nullptr) : json(p.hi);
    preds.push_back(std::move(jp));
  }
  json j;
  j["instance"] = a.instance_id;
  j["label"] = to_string(a.label);
  j["predicates"] = std::move(preds);
  j["precision"] = a.precision;
  j["radius"] = a.radius;
  j["coverage"] = a.coverage;
  j["converged"] = a.converged;
  return j.dump();
}

}  // namespace adspeech
