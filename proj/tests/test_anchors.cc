#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

#include "adspeech/anchors.h"
#include "test_util.h"

namespace adspeech {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Labels looked up from an 8-entry table indexed by three binary features.
Predictor table_model(const std::array<Label, 8>& table) {
  return [table](const Matrix& z) {
    std::vector<Label> out;
    for (std::size_t r = 0; r < z.rows(); ++r) {
      const int idx = static_cast<int>(z(r, 0)) * 4 + static_cast<int>(z(r, 1)) * 2 +
                      static_cast<int>(z(r, 2));
      out.push_back(table[static_cast<std::size_t>(idx)]);
    }
    return out;
  };
}

// Exact precision under independent empirical marginals.
double brute_precision(const PredicateSet& a, std::span<const double> instance, Label label,
                       const std::array<Label, 8>& table, const Matrix& train) {
  double p1[3];
  for (int j = 0; j < 3; ++j) {
    double ones = 0;
    for (std::size_t r = 0; r < train.rows(); ++r) ones += train(r, j);
    p1[j] = ones / static_cast<double>(train.rows());
  }
  bool fixed[3] = {false, false, false};
  for (const auto& p : a) fixed[p.feature] = true;
  double total = 0;
  for (int idx = 0; idx < 8; ++idx) {
    const int bits[3] = {idx >> 2 & 1, idx >> 1 & 1, idx & 1};
    double prob = 1;
    for (int j = 0; j < 3; ++j) {
      if (fixed[j]) prob *= bits[j] == static_cast<int>(instance[j]) ? 1.0 : 0.0;
      else prob *= bits[j] ? p1[j] : 1 - p1[j];
    }
    if (table[static_cast<std::size_t>(idx)] == label) total += prob;
  }
  return total;
}

TEST(Anchors, PrecisionWithinHoeffdingRadiusOfBruteForce) {
  std::mt19937_64 gen(17);
  int within = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::array<Label, 8> table;
    for (auto& l : table) l = gen() % 2 ? Label::AD : Label::HC;
    Matrix train(40, 3);
    const double bias[3] = {0.2 + 0.6 * (gen() % 100) / 100.0, 0.5, 0.3};
    for (std::size_t r = 0; r < 40; ++r) {
      for (int j = 0; j < 3; ++j) train(r, j) = std::bernoulli_distribution(bias[j])(gen) ? 1 : 0;
    }
    const std::size_t pick = gen() % 40;
    const auto inst = train.row(pick);
    PredicateSet a;
    for (std::size_t j = 0; j < 3; ++j) {
      if (gen() % 2) a.push_back({j, inst[j], inst[j] + 0.5});
    }
    const Label label = table_model(table)(train.select_rows(std::vector<std::size_t>{pick}))[0];
    const PrecisionEstimate e =
        estimate_precision(a, inst, label, table_model(table), train, 400, 0.05, trial);
    EXPECT_NEAR(e.radius, std::sqrt(std::log(2 / 0.05) / 800.0), 1e-15);
    within += std::abs(e.precision - brute_precision(a, inst, label, table, train)) <= e.radius;
  }
  EXPECT_GE(within, 95);
}

TEST(Anchors, CoverageAntiMonotoneOnChains) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1, 1);
  const Matrix x = testing::random_matrix(200, 6, gen);
  for (int chain = 0; chain < 1000; ++chain) {
    PredicateSet a;
    double prev = coverage(a, x);
    EXPECT_EQ(prev, 1.0);
    const int len = 1 + static_cast<int>(gen() % 6);
    for (int step = 0; step < len; ++step) {
      double lo = u(gen), hi = u(gen);
      if (lo > hi) std::swap(lo, hi);
      if (gen() % 4 == 0) lo = -kInf;
      if (gen() % 4 == 0) hi = kInf;
      a.push_back({static_cast<std::size_t>(gen() % 6), lo, hi});
      const double c = coverage(a, x);
      EXPECT_LE(c, prev);
      prev = c;
    }
  }
}

TEST(Anchors, DiscretizeQuantiles) {
  Matrix x(9, 2);
  for (int i = 0; i < 9; ++i) x(i, 0) = i, x(i, 1) = 3.0;
  const auto e = discretize(x, 4);
  EXPECT_EQ(e[0], (std::vector<double>{2, 4, 6}));
  EXPECT_TRUE(e[1].empty());
  const Predicate low = bin_predicate(0, e[0], -5);
  EXPECT_EQ(low.lo, -kInf);
  EXPECT_EQ(low.hi, 2.0);
  const Predicate mid = bin_predicate(0, e[0], 4);
  EXPECT_EQ(mid.lo, 4.0);
  EXPECT_EQ(mid.hi, 6.0);
  EXPECT_TRUE(mid.holds(4.0));
  EXPECT_FALSE(mid.holds(6.0));
  EXPECT_EQ(bin_predicate(1, e[1], 3.0).lo, -kInf);
  x(0, 0) = kMissing;
  EXPECT_THROW(discretize(x, 4), InputError);
}

TEST(Anchors, SkewedColumnDropsDuplicateEdges) {
  Matrix x(10, 1, 0.0);
  x(9, 0) = 1.0;
  EXPECT_TRUE(discretize(x, 4)[0].empty());
}

TEST(Anchors, UnsatisfiedAnchorRejected) {
  Matrix train(5, 1, 0.0);
  const double inst[] = {7.0};
  const PredicateSet a = {{0, 5.0, 10.0}};
  const Predictor m = [](const Matrix& z) { return std::vector<Label>(z.rows(), Label::AD); };
  EXPECT_THROW(estimate_precision(a, inst, Label::AD, m, train, 10, 0.05, 0), InputError);
}

Predictor threshold_on(std::size_t feature, double t) {
  return [=](const Matrix& z) {
    std::vector<Label> out;
    for (std::size_t r = 0; r < z.rows(); ++r) out.push_back(z(r, feature) > t ? Label::AD : Label::HC);
    return out;
  };
}

TEST(Anchors, FindsTheDecisiveFeature) {
  std::mt19937_64 gen(3);
  const Matrix train = testing::random_matrix(400, 4, gen);
  SearchConfig cfg;
  cfg.budget = 2000;
  const double inst[] = {0.1, 0.9, 0.95, -0.3};
  const Anchor a = find_anchor(inst, threshold_on(2, 0.0), train, cfg, "x");
  EXPECT_TRUE(a.converged);
  EXPECT_EQ(a.label, Label::AD);
  ASSERT_EQ(a.predicates.size(), 1u);
  EXPECT_EQ(a.predicates[0].feature, 2u);
  EXPECT_EQ(a.precision, 1.0);
  EXPECT_NEAR(a.coverage, coverage(a.predicates, train), 0);
  EXPECT_GE(a.precision - a.radius, cfg.tau);

  const auto j = nlohmann::json::parse(anchor_to_json(a, {"a", "b", "c", "d"}));
  EXPECT_EQ(j["predicates"][0]["feature"], "c");
  EXPECT_TRUE(j["predicates"][0]["hi"].is_null());
  EXPECT_EQ(j["instance"], "x");
}

TEST(Anchors, EmptyAnchorForConstantModel) {
  std::mt19937_64 gen(4);
  const Matrix train = testing::random_matrix(100, 3, gen);
  const Predictor m = [](const Matrix& z) { return std::vector<Label>(z.rows(), Label::HC); };
  const double inst[] = {0, 0, 0};
  const Anchor a = find_anchor(inst, m, train, {}, "");
  EXPECT_TRUE(a.converged);
  EXPECT_TRUE(a.predicates.empty());
  EXPECT_EQ(a.coverage, 1.0);
}

TEST(Anchors, UnreachableTauReportsBestEffort) {
  std::mt19937_64 gen(6);
  const Matrix train = testing::random_matrix(100, 2, gen);
  // Label is a hash of the raw values: no interval anchor pins it down.
  const Predictor noisy = [](const Matrix& z) {
    std::vector<Label> out;
    for (std::size_t r = 0; r < z.rows(); ++r) {
      out.push_back(static_cast<long>(std::floor(z(r, 0) * 1e4 + z(r, 1) * 1e6)) % 2 ? Label::AD
                                                                                     : Label::HC);
    }
    return out;
  };
  SearchConfig cfg;
  cfg.tau = 0.99;
  cfg.budget = 200;
  cfg.max_predicates = 1;  // with every feature fixed the perturbations collapse onto the instance
  const double inst[] = {train(0, 0), train(0, 1)};
  const Anchor a = find_anchor(inst, noisy, train, cfg, "");
  EXPECT_FALSE(a.converged);
  EXPECT_LT(a.precision - a.radius, cfg.tau);
}

TEST(Anchors, ExplainAllIsDeterministic) {
  std::mt19937_64 gen(7);
  const Matrix train = testing::random_matrix(150, 5, gen);
  const Matrix test = testing::random_matrix(6, 5, gen);
  SearchConfig cfg;
  cfg.budget = 300;
  cfg.seed = 12;
  const auto model = threshold_on(1, 0.2);
  const auto a = explain_all(test, {}, model, train, cfg);
  const auto b = explain_all(test, {}, model, train, cfg);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(anchor_to_json(a[i], {}), anchor_to_json(b[i], {}));
  }
  double mean = 0;
  for (const auto& x : a) mean += x.coverage;
  EXPECT_DOUBLE_EQ(mean_coverage(test, model, train, cfg), mean / 6);
}

TEST(Anchors, ConfigValidation) {
  SearchConfig c;
  c.tau = 1.5;
  EXPECT_THROW(c.validate(), InputError);
  c = {};
  c.n_bins = 1;
  EXPECT_THROW(c.validate(), InputError);
  c = {};
  c.budget = 0;
  EXPECT_THROW(c.validate(), InputError);
}

}  // namespace
}  // namespace adspeech
