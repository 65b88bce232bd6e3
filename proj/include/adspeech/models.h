#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "adspeech/common.h"
#include "adspeech/matrix.h"
#include "adspeech/preprocess.h"

namespace adspeech {

enum class ModelKind : std::uint8_t { NB, SVM, RF, NN };
inline constexpr ModelKind kAllModelKinds[] = {ModelKind::NB, ModelKind::SVM, ModelKind::RF,
                                               ModelKind::NN};

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view s);

struct ModelSpec {
  ModelKind kind = ModelKind::RF;
  std::uint64_t seed = 0;

  double nb_var_floor = 1e-9;

  int rf_trees = 100;
  bool rf_bootstrap = true;
  int rf_max_features = 0;  // 0: ceil(sqrt(d))

  double svm_c = 1.0;
  double svm_gamma = 0.001;
  double svm_tol = 1e-3;
  long svm_max_iter = 100000;

  int nn_hidden = 10;
  int nn_epochs = 500;
  double nn_lr = 1e-3;

  bool smote = true;
  int smote_k = 5;
  // Empty: on for SVM and NN, off for NB and RF.
  std::optional<bool> standardize;
  // Label assigned when P(AD) == P(HC).
  Label tie_label = Label::HC;

  bool uses_standardization() const {
    return standardize.value_or(kind == ModelKind::SVM || kind == ModelKind::NN);
  }
  void validate() const;
};

// --- Gaussian naive Bayes ---------------------------------------------------

struct GaussianNb {
  // [class][feature]; class 0 = HC, 1 = AD. Priors are equal.
  std::vector<double> mean[2];
  std::vector<double> var[2];

  static GaussianNb fit(const Matrix& x, const std::vector<Label>& y, double var_floor);
  double proba_ad(std::span<const double> row) const;
};

// --- Random forest ----------------------------------------------------------

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1;  // x[feature] <= threshold
  int right = -1;
  double proba_ad = 0;  // leaf class fraction
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  // Gini splits over `max_features` randomly drawn features per node; grown until
  // leaves are pure or hold a single row. `rows` selects (with repetition) the
  // training rows.
  static DecisionTree fit(const Matrix& x, const std::vector<Label>& y,
                          const std::vector<std::size_t>& rows, std::size_t max_features,
                          std::uint64_t seed);
  double proba_ad(std::span<const double> row) const;
};

struct RandomForest {
  std::vector<DecisionTree> trees;

  static RandomForest fit(const Matrix& x, const std::vector<Label>& y, const ModelSpec& spec);
  double proba_ad(std::span<const double> row) const;
};

// --- RBF support vector machine ---------------------------------------------

struct SvmTrace {
  std::vector<double> dual_objective;  // after every SMO update
};

struct SvmRbf {
  double gamma = 0;
  double c = 0;
  Matrix support;              // support vectors
  std::vector<double> coef;    // alpha_i * y_i
  double rho = 0;              // decision = sum coef_i K(sv_i, x) - rho
  double platt_a = 0;          // P(AD) = 1 / (1 + exp(a f + b))
  double platt_b = 0;
  long iterations = 0;
  double kkt_gap = 0;          // max violating-pair gap at exit
  std::vector<double> alpha;   // full dual vector over training rows

  // y = +1 for AD. Throws RuntimeError when SMO does not converge.
  static SvmRbf fit(const Matrix& x, const std::vector<Label>& y, double c, double gamma,
                    double tol, long max_iter, SvmTrace* trace = nullptr);
  double decision(std::span<const double> row) const;
  double proba_ad(std::span<const double> row) const;
};

// Platt's sigmoid fit (Newton with backtracking) on decision values.
std::pair<double, double> fit_platt(const std::vector<double>& decision,
                                    const std::vector<Label>& y);

// --- Two-layer perceptron ---------------------------------------------------

struct Mlp {
  std::size_t d = 0;
  std::size_t h = 0;
  // Flat parameters: W1 (h x d), b1 (h), W2 (2 x h), b2 (2).
  std::vector<double> params;

  static Mlp init(std::size_t d, std::size_t h, std::uint64_t seed);
  static Mlp fit(const Matrix& x, const std::vector<Label>& y, const ModelSpec& spec);

  // Mean cross-entropy over rows; fills grad (same layout as params) when non-null.
  double loss(const Matrix& x, const std::vector<Label>& y, std::vector<double>* grad) const;
  double proba_ad(std::span<const double> row) const;
};

// --- Uniform model interface ------------------------------------------------

using Classifier = std::variant<GaussianNb, RandomForest, SvmRbf, Mlp>;

struct Model {
  ModelSpec spec;
  std::string schema_id;
  Imputer imputer;
  std::optional<Standardizer> standardizer;
  Classifier classifier;

  std::size_t n_features() const { return imputer.means.size(); }
};

// Impute (train means) -> SMOTE to parity -> standardize (SVM/NN) -> fit.
Model train(const ModelSpec& spec, const Matrix& x, const std::vector<Label>& y,
            std::string schema_id = {});

// Columns: P(HC), P(AD). Raw feature rows; missing cells are imputed.
Matrix predict_proba(const Model& model, const Matrix& x);
std::vector<Label> predict(const Model& model, const Matrix& x);

std::string model_to_json(const Model& model);
Model model_from_json(std::string_view json);

}  // namespace adspeech
