#include "adspeech/models.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "adspeech/kernels.h"
#include "adspeech/rng.h"

namespace adspeech {
namespace {

using nlohmann::json;

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_both_classes(const std::vector<Label>& y) {
  bool seen[2] = {false, false};
  for (Label l : y) seen[static_cast<int>(l)] = true;
  if (!seen[0] || !seen[1]) throw InputError("training data must contain both AD and HC samples");
}

double gini(double n_ad, double n) {
  if (n <= 0) return 0.0;
  const double p = n_ad / n;
  return 2.0 * p * (1.0 - p);
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::NB: return "NB";
    case ModelKind::SVM: return "SVM";
    case ModelKind::RF: return "RF";
    case ModelKind::NN: return "NN";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  for (ModelKind k : kAllModelKinds) {
    if (to_string(k) == s) return k;
  }
  throw InputError(fmt::format("unknown model kind '{}' (expected NB, SVM, RF or NN)", s));
}

void ModelSpec::validate() const {
  switch (kind) {
    case ModelKind::NB:
      if (!(nb_var_floor > 0)) throw InputError("NB variance floor must be positive");
      break;
    case ModelKind::RF:
      if (rf_trees < 1) throw InputError("RF needs at least one tree");
      if (rf_max_features < 0) throw InputError("RF max_features must be >= 0");
      break;
    case ModelKind::SVM:
      if (!(svm_c > 0) || !(svm_gamma > 0) || !(svm_tol > 0) || svm_max_iter < 1) {
        throw InputError("SVM needs C > 0, gamma > 0, tol > 0, max_iter >= 1");
      }
      break;
    case ModelKind::NN:
      if (nn_hidden < 1 || nn_epochs < 0 || !(nn_lr > 0)) {
        throw InputError("NN needs hidden >= 1, epochs >= 0, lr > 0");
      }
      break;
  }
  if (smote && smote_k < 1) throw InputError("smote_k must be >= 1");
}

// --- Gaussian naive Bayes ---------------------------------------------------

GaussianNb GaussianNb::fit(const Matrix& x, const std::vector<Label>& y, double var_floor) {
  check_both_classes(y);
  GaussianNb nb;
  const std::size_t d = x.cols();
  double count[2] = {0, 0};
  for (int c = 0; c < 2; ++c) {
    nb.mean[c].assign(d, 0.0);
    nb.var[c].assign(d, 0.0);
  }
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const int c = static_cast<int>(y[r]);
    count[c] += 1;
    for (std::size_t j = 0; j < d; ++j) nb.mean[c][j] += x(r, j);
  }
  for (int c = 0; c < 2; ++c) {
    for (auto& m : nb.mean[c]) m /= count[c];
  }
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const int c = static_cast<int>(y[r]);
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = x(r, j) - nb.mean[c][j];
      nb.var[c][j] += dev * dev;
    }
  }
  for (int c = 0; c < 2; ++c) {
    for (auto& v : nb.var[c]) v = std::max(v / count[c], var_floor);
  }
  return nb;
}

double GaussianNb::proba_ad(std::span<const double> row) const {
  double ll[2] = {0, 0};
  for (int c = 0; c < 2; ++c) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double dev = row[j] - mean[c][j];
      ll[c] += -0.5 * std::log(2.0 * std::numbers::pi * var[c][j]) - dev * dev / (2.0 * var[c][j]);
    }
  }
  return logistic(ll[1] - ll[0]);
}

// --- Decision tree / random forest -----------------------------------------

DecisionTree DecisionTree::fit(const Matrix& x, const std::vector<Label>& y,
                               const std::vector<std::size_t>& rows, std::size_t max_features,
                               std::uint64_t seed) {
  DecisionTree tree;
  if (rows.empty()) throw InputError("decision tree needs at least one row");
  const std::size_t d = x.cols();
  max_features = std::clamp<std::size_t>(max_features, 1, std::max<std::size_t>(d, 1));
  Rng rng(seed);

  struct Pending {
    int node;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, rows});

  std::vector<std::size_t> features(d);
  std::vector<std::pair<double, int>> column;
  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    const double n = static_cast<double>(job.rows.size());
    double n_ad = 0;
    for (std::size_t r : job.rows) n_ad += static_cast<double>(y[r] == Label::AD);
    tree.nodes[job.node].proba_ad = n_ad / n;
    if (n_ad == 0 || n_ad == n || job.rows.size() < 2) continue;

    std::iota(features.begin(), features.end(), 0);
    int best_feature = -1;
    double best_threshold = 0;
    double best_impurity = std::numeric_limits<double>::infinity();
    // Draw features without replacement; past max_features keep drawing only
    // until some feature admits a split.
    for (std::size_t f = 0; f < d; ++f) {
      if (f >= max_features && best_feature >= 0) break;
      std::swap(features[f], features[f + rng.index(d - f)]);
      const std::size_t feat = features[f];
      column.clear();
      for (std::size_t r : job.rows) column.emplace_back(x(r, feat), static_cast<int>(y[r]));
      std::sort(column.begin(), column.end());
      double left_n = 0;
      double left_ad = 0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left_n += 1;
        left_ad += column[i].second;
        if (column[i].first == column[i + 1].first) continue;
        const double impurity =
            (left_n * gini(left_ad, left_n) + (n - left_n) * gini(n_ad - left_ad, n - left_n)) / n;
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best_feature = static_cast<int>(feat);
          const double mid = 0.5 * (column[i].first + column[i + 1].first);
          best_threshold = mid < column[i + 1].first ? mid : column[i].first;
        }
      }
    }
    if (best_feature < 0) continue;

    Pending left{static_cast<int>(tree.nodes.size()), {}};
    Pending right{static_cast<int>(tree.nodes.size() + 1), {}};
    for (std::size_t r : job.rows) {
      (x(r, best_feature) <= best_threshold ? left.rows : right.rows).push_back(r);
    }
    tree.nodes[job.node].feature = best_feature;
    tree.nodes[job.node].threshold = best_threshold;
    tree.nodes[job.node].left = left.node;
    tree.nodes[job.node].right = right.node;
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    stack.push_back(std::move(right));
    stack.push_back(std::move(left));
  }
  return tree;
}

double DecisionTree::proba_ad(std::span<const double> row) const {
  int i = 0;
  while (nodes[i].feature >= 0) {
    i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return nodes[i].proba_ad;
}

RandomForest RandomForest::fit(const Matrix& x, const std::vector<Label>& y,
                               const ModelSpec& spec) {
  check_both_classes(y);
  const std::size_t n = x.rows();
  const std::size_t max_features =
      spec.rf_max_features > 0
          ? static_cast<std::size_t>(spec.rf_max_features)
          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
  RandomForest rf;
  rf.trees.resize(static_cast<std::size_t>(spec.rf_trees));
  kernels::omp::for_each_index(rf.trees.size(), [&](std::size_t t) {
    std::vector<std::size_t> rows(n);
    if (spec.rf_bootstrap) {
      Rng rng(derive_seed(spec.seed, {0x7EE, t, 0}));
      for (auto& r : rows) r = rng.index(n);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    rf.trees[t] = DecisionTree::fit(x, y, rows, max_features, derive_seed(spec.seed, {0x7EE, t, 1}));
  });
  return rf;
}

double RandomForest::proba_ad(std::span<const double> row) const {
  double s = 0;
  for (const auto& t : trees) s += t.proba_ad(row);
  return s / static_cast<double>(trees.size());
}

// --- SVM --------------------------------------------------------------------

SvmRbf SvmRbf::fit(const Matrix& x, const std::vector<Label>& labels, double c, double gamma,
                   double tol, long max_iter, SvmTrace* trace) {
  check_both_classes(labels);
  const std::size_t n = x.rows();
  const Matrix k = kernels::omp::rbf_gram(x, gamma);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == Label::AD ? 1.0 : -1.0;

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // G = Q alpha - e
  const auto q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * k(i, j); };
  const auto upper = [&](std::size_t t) { return alpha[t] >= c; };
  const auto lower = [&](std::size_t t) { return alpha[t] <= 0; };
  const auto objective = [&] {
    double f = 0;
    for (std::size_t t = 0; t < n; ++t) f += alpha[t] * (grad[t] - 1.0);
    return -0.5 * f;
  };
  constexpr double kTau = 1e-12;

  SvmRbf m;
  m.gamma = gamma;
  m.c = c;
  if (trace) trace->dual_objective.push_back(objective());
  long iter = 0;
  double gap = 0;
  while (true) {
    // Maximal violating pair with second-order selection of j.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0 ? !upper(t) : !lower(t)) {
        const double v = -y[t] * grad[t];
        if (v >= gmax) {
          gmax = v;
          i = t;
        }
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0 ? lower(t) : upper(t)) continue;
      const double v = y[t] * grad[t];
      gmax2 = std::max(gmax2, v);
      if (i == n) continue;
      const double diff = gmax + v;
      if (diff > 0) {
        double quad = k(i, i) + k(t, t) - 2.0 * k(i, t);
        if (quad <= 0) quad = kTau;
        const double obj = -(diff * diff) / quad;
        if (obj <= best) {
          best = obj;
          j = t;
        }
      }
    }
    gap = gmax + gmax2;
    if (gap < tol || i == n || j == n) break;
    if (iter >= max_iter) {
      throw RuntimeError(fmt::format("SMO did not converge after {} iterations (gap {:.3g})", iter,
                                     gap));
    }
    ++iter;

    const double ai = alpha[i];
    const double aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = k(i, i) + k(j, j) + 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = k(i, i) + k(j, j) - 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - ai;
    const double daj = alpha[j] - aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * dai + q(t, j) * daj;
    if (trace) trace->dual_objective.push_back(objective());
  }

  // rho from free vectors, else midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  m.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
  m.iterations = iter;
  m.kkt_gap = gap;
  m.alpha = alpha;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0) {
      m.support.append_row(x.row(t));
      m.coef.push_back(alpha[t] * y[t]);
    }
  }
  if (m.support.rows() == 0) m.support = Matrix(0, x.cols());

  std::vector<double> dec(n);
  for (std::size_t t = 0; t < n; ++t) dec[t] = m.decision(x.row(t));
  std::tie(m.platt_a, m.platt_b) = fit_platt(dec, labels);
  return m;
}

double SvmRbf::decision(std::span<const double> row) const {
  double s = 0;
  for (std::size_t i = 0; i < support.rows(); ++i) {
    const auto sv = support.row(i);
    double d2 = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double diff = sv[j] - row[j];
      d2 += diff * diff;
    }
    s += coef[i] * std::exp(-gamma * d2);
  }
  return s - rho;
}

double SvmRbf::proba_ad(std::span<const double> row) const {
  return logistic(-(platt_a * decision(row) + platt_b));
}

std::pair<double, double> fit_platt(const std::vector<double>& dec, const std::vector<Label>& y) {
  double prior1 = 0;
  double prior0 = 0;
  for (Label l : y) (l == Label::AD ? prior1 : prior0) += 1;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  std::vector<double> t(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] == Label::AD ? hi : lo;

  const auto fval_at = [&](double a, double b) {
    double f = 0;
    for (std::size_t i = 0; i < dec.size(); ++i) {
      const double z = dec[i] * a + b;
      f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };

  double a = 0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double fval = fval_at(a, b);
  for (int it = 0; it < 100; ++it) {
    double h11 = 1e-12, h22 = 1e-12, h21 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < dec.size(); ++i) {
      const double z = dec[i] * a + b;
      double p, q;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += dec[i] * dec[i] * d2;
      h22 += d2;
      h21 += dec[i] * d2;
      const double d1 = t[i] - p;
      g1 += dec[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= 1e-10) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = fval_at(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < 1e-10) break;
  }
  return {a, b};
}

// --- MLP --------------------------------------------------------------------

Mlp Mlp::init(std::size_t d, std::size_t h, std::uint64_t seed) {
  Mlp m;
  m.d = d;
  m.h = h;
  m.params.assign(h * d + h + 2 * h + 2, 0.0);
  Rng rng(derive_seed(seed, {0x3317}));
  const double r1 = std::sqrt(6.0 / static_cast<double>(d + h));
  for (std::size_t i = 0; i < h * d; ++i) m.params[i] = rng.uniform(-r1, r1);
  const double r2 = std::sqrt(6.0 / static_cast<double>(h + 2));
  const std::size_t w2 = h * d + h;
  for (std::size_t i = 0; i < 2 * h; ++i) m.params[w2 + i] = rng.uniform(-r2, r2);
  return m;
}

double Mlp::loss(const Matrix& x, const std::vector<Label>& y, std::vector<double>* grad) const {
  const double* w1 = params.data();
  const double* b1 = w1 + h * d;
  const double* w2 = b1 + h;
  const double* b2 = w2 + 2 * h;
  if (grad) grad->assign(params.size(), 0.0);
  std::vector<double> a(h);
  double total = 0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto xr = x.row(r);
    for (std::size_t u = 0; u < h; ++u) {
      double z = b1[u];
      for (std::size_t j = 0; j < d; ++j) z += w1[u * d + j] * xr[j];
      a[u] = std::tanh(z);
    }
    double z2[2];
    for (int o = 0; o < 2; ++o) {
      z2[o] = b2[o];
      for (std::size_t u = 0; u < h; ++u) z2[o] += w2[o * h + u] * a[u];
    }
    const double zmax = std::max(z2[0], z2[1]);
    const double lse = zmax + std::log(std::exp(z2[0] - zmax) + std::exp(z2[1] - zmax));
    const int target = static_cast<int>(y[r]);
    total += lse - z2[target];
    if (!grad) continue;
    double* g_w1 = grad->data();
    double* g_b1 = g_w1 + h * d;
    double* g_w2 = g_b1 + h;
    double* g_b2 = g_w2 + 2 * h;
    double dz2[2];
    for (int o = 0; o < 2; ++o) dz2[o] = std::exp(z2[o] - lse) - (o == target ? 1.0 : 0.0);
    for (int o = 0; o < 2; ++o) {
      g_b2[o] += dz2[o];
      for (std::size_t u = 0; u < h; ++u) g_w2[o * h + u] += dz2[o] * a[u];
    }
    for (std::size_t u = 0; u < h; ++u) {
      const double da = w2[u] * dz2[0] + w2[h + u] * dz2[1];
      const double dz1 = da * (1.0 - a[u] * a[u]);
      g_b1[u] += dz1;
      for (std::size_t j = 0; j < d; ++j) g_w1[u * d + j] += dz1 * xr[j];
    }
  }
  const double n = static_cast<double>(x.rows());
  if (grad) {
    for (auto& g : *grad) g /= n;
  }
  return total / n;
}

Mlp Mlp::fit(const Matrix& x, const std::vector<Label>& y, const ModelSpec& spec) {
  check_both_classes(y);
  Mlp m = init(x.cols(), static_cast<std::size_t>(spec.nn_hidden), spec.seed);
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  std::vector<double> mom(m.params.size(), 0.0);
  std::vector<double> vel(m.params.size(), 0.0);
  std::vector<double> g;
  double b1t = 1.0;
  double b2t = 1.0;
  for (int epoch = 0; epoch < spec.nn_epochs; ++epoch) {
    m.loss(x, y, &g);
    b1t *= kBeta1;
    b2t *= kBeta2;
    for (std::size_t i = 0; i < g.size(); ++i) {
      mom[i] = kBeta1 * mom[i] + (1.0 - kBeta1) * g[i];
      vel[i] = kBeta2 * vel[i] + (1.0 - kBeta2) * g[i] * g[i];
      const double mhat = mom[i] / (1.0 - b1t);
      const double vhat = vel[i] / (1.0 - b2t);
      m.params[i] -= spec.nn_lr * mhat / (std::sqrt(vhat) + kEps);
    }
  }
  return m;
}

double Mlp::proba_ad(std::span<const double> row) const {
  const double* w1 = params.data();
  const double* b1 = w1 + h * d;
  const double* w2 = b1 + h;
  const double* b2 = w2 + 2 * h;
  double z2[2] = {b2[0], b2[1]};
  for (std::size_t u = 0; u < h; ++u) {
    double z = b1[u];
    for (std::size_t j = 0; j < d; ++j) z += w1[u * d + j] * row[j];
    const double a = std::tanh(z);
    z2[0] += w2[u] * a;
    z2[1] += w2[h + u] * a;
  }
  return logistic(z2[1] - z2[0]);
}

// --- Model ------------------------------------------------------------------

Model train(const ModelSpec& spec, const Matrix& x, const std::vector<Label>& y,
            std::string schema_id) {
  spec.validate();
  if (x.rows() != y.size()) throw InputError("feature rows and labels differ in length");
  check_both_classes(y);
  Model model;
  model.spec = spec;
  model.schema_id = std::move(schema_id);
  model.imputer = Imputer::fit(x);
  Matrix xt = model.imputer.apply(x);
  std::vector<Label> yt = y;
  if (spec.smote) {
    auto over = oversample_to_parity(xt, yt, static_cast<std::size_t>(spec.smote_k),
                                     derive_seed(spec.seed, {0x5307}));
    xt = std::move(over.x);
    yt = std::move(over.y);
  }
  if (spec.uses_standardization()) {
    model.standardizer = Standardizer::fit(xt);
    xt = model.standardizer->apply(xt);
  }
  switch (spec.kind) {
    case ModelKind::NB:
      model.classifier = GaussianNb::fit(xt, yt, spec.nb_var_floor);
      break;
    case ModelKind::RF:
      model.classifier = RandomForest::fit(xt, yt, spec);
      break;
    case ModelKind::SVM:
      model.classifier =
          SvmRbf::fit(xt, yt, spec.svm_c, spec.svm_gamma, spec.svm_tol, spec.svm_max_iter);
      break;
    case ModelKind::NN:
      model.classifier = Mlp::fit(xt, yt, spec);
      break;
  }
  return model;
}

namespace {

struct Score {
  double proba_ad;
  Label label;
};

Score score_row(const Model& model, std::span<double> row) {
  model.imputer.apply_row(row);
  if (model.standardizer) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] = (row[c] - model.standardizer->mean[c]) / model.standardizer->sd[c];
    }
  }
  const Label tie = model.spec.tie_label;
  if (const auto* svm = std::get_if<SvmRbf>(&model.classifier)) {
    const double f = svm->decision(row);
    const double p = logistic(-(svm->platt_a * f + svm->platt_b));
    return {p, f > 0 ? Label::AD : f < 0 ? Label::HC : tie};
  }
  const double p = std::visit([&](const auto& c) { return c.proba_ad(row); }, model.classifier);
  return {p, p > 0.5 ? Label::AD : p < 0.5 ? Label::HC : tie};
}

std::vector<Score> score_all(const Model& model, const Matrix& x) {
  if (x.cols() != model.n_features()) {
    throw InputError(fmt::format("model expects {} features, got {}", model.n_features(), x.cols()));
  }
  std::vector<Score> out(x.rows());
  kernels::omp::for_each_index(x.rows(), [&](std::size_t r) {
    std::vector<double> row(x.row(r).begin(), x.row(r).end());
    out[r] = score_row(model, row);
  });
  return out;
}

}  // namespace

Matrix predict_proba(const Model& model, const Matrix& x) {
  const auto scores = score_all(model, x);
  Matrix p(x.rows(), 2);
  for (std::size_t r = 0; r < scores.size(); ++r) {
    p(r, 1) = scores[r].proba_ad;
    p(r, 0) = 1.0 - scores[r].proba_ad;
  }
  return p;
}

std::vector<Label> predict(const Model& model, const Matrix& x) {
  const auto scores = score_all(model, x);
  std::vector<Label> out(scores.size());
  for (std::size_t r = 0; r < scores.size(); ++r) out[r] = scores[r].label;
  return out;
}

// --- JSON -------------------------------------------------------------------

namespace {

constexpr int kModelFormatVersion = 1;

json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.data() = j.at("data").get<std::vector<double>>();
  if (m.data().size() != m.rows() * m.cols()) throw ParseError("matrix data size mismatch");
  return m;
}

json spec_json(const ModelSpec& s) {
  json j = {{"kind", to_string(s.kind)},
            {"seed", s.seed},
            {"nb_var_floor", s.nb_var_floor},
            {"rf_trees", s.rf_trees},
            {"rf_bootstrap", s.rf_bootstrap},
            {"rf_max_features", s.rf_max_features},
            {"svm_c", s.svm_c},
            {"svm_gamma", s.svm_gamma},
            {"svm_tol", s.svm_tol},
            {"svm_max_iter", s.svm_max_iter},
            {"nn_hidden", s.nn_hidden},
            {"nn_epochs", s.nn_epochs},
            {"nn_lr", s.nn_lr},
            {"smote", s.smote},
            {"smote_k", s.smote_k},
            {"tie_label", to_string(s.tie_label)}};
  j["standardize"] = s.standardize ? json(*s.standardize) : json(nullptr);
  return j;
}

ModelSpec spec_from(const json& j) {
  ModelSpec s;
  s.kind = parse_model_kind(j.at("kind").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
  s.nb_var_floor = j.at("nb_var_floor").get<double>();
  s.rf_trees = j.at("rf_trees").get<int>();
  s.rf_bootstrap = j.at("rf_bootstrap").get<bool>();
  s.rf_max_features = j.at("rf_max_features").get<int>();
  s.svm_c = j.at("svm_c").get<double>();
  s.svm_gamma = j.at("svm_gamma").get<double>();
  s.svm_tol = j.at("svm_tol").get<double>();
  s.svm_max_iter = j.at("svm_max_iter").get<long>();
  s.nn_hidden = j.at("nn_hidden").get<int>();
  s.nn_epochs = j.at("nn_epochs").get<int>();
  s.nn_lr = j.at("nn_lr").get<double>();
  s.smote = j.at("smote").get<bool>();
  s.smote_k = j.at("smote_k").get<int>();
  s.tie_label = parse_label(j.at("tie_label").get<std::string>());
  if (!j.at("standardize").is_null()) s.standardize = j.at("standardize").get<bool>();
  return s;
}

struct ClassifierToJson {
  json operator()(const GaussianNb& nb) const {
    return {{"mean_hc", nb.mean[0]}, {"mean_ad", nb.mean[1]},
            {"var_hc", nb.var[0]},   {"var_ad", nb.var[1]}};
  }
  json operator()(const RandomForest& rf) const {
    json trees = json::array();
    for (const auto& t : rf.trees) {
      json nodes = json::array();
      for (const auto& n : t.nodes) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.proba_ad});
      }
      trees.push_back(std::move(nodes));
    }
    return {{"trees", std::move(trees)}};
  }
  json operator()(const SvmRbf& s) const {
    return {{"gamma", s.gamma},       {"c", s.c},
            {"support", matrix_json(s.support)},
            {"coef", s.coef},         {"rho", s.rho},
            {"platt_a", s.platt_a},   {"platt_b", s.platt_b},
            {"iterations", s.iterations}, {"kkt_gap", s.kkt_gap}};
  }
  json operator()(const Mlp& m) const { return {{"d", m.d}, {"h", m.h}, {"params", m.params}}; }
};

Classifier classifier_from(ModelKind kind, const json& j) {
  switch (kind) {
    case ModelKind::NB: {
      GaussianNb nb;
      nb.mean[0] = j.at("mean_hc").get<std::vector<double>>();
      nb.mean[1] = j.at("mean_ad").get<std::vector<double>>();
      nb.var[0] = j.at("var_hc").get<std::vector<double>>();
      nb.var[1] = j.at("var_ad").get<std::vector<double>>();
      return nb;
    }
    case ModelKind::RF: {
      RandomForest rf;
      for (const auto& jt : j.at("trees")) {
        DecisionTree t;
        for (const auto& jn : jt) {
          t.nodes.push_back({jn.at(0).get<int>(), jn.at(1).get<double>(), jn.at(2).get<int>(),
                             jn.at(3).get<int>(), jn.at(4).get<double>()});
        }
        rf.trees.push_back(std::move(t));
      }
      return rf;
    }
    case ModelKind::SVM: {
      SvmRbf s;
      s.gamma = j.at("gamma").get<double>();
      s.c = j.at("c").get<double>();
      s.support = matrix_from(j.at("support"));
      s.coef = j.at("coef").get<std::vector<double>>();
      s.rho = j.at("rho").get<double>();
      s.platt_a = j.at("platt_a").get<double>();
      s.platt_b = j.at("platt_b").get<double>();
      s.iterations = j.at("iterations").get<long>();
      s.kkt_gap = j.at("kkt_gap").get<double>();
      return s;
    }
    case ModelKind::NN: {
      Mlp m;
      m.d = j.at("d").get<std::size_t>();
      m.h = j.at("h").get<std::size_t>();
      m.params = j.at("params").get<std::vector<double>>();
      return m;
    }
  }
  throw ParseError("unknown classifier kind");
}

}  // namespace

std::string model_to_json(const Model& model) {
  json j;
  j["format"] = "adspeech-model";
  j["version"] = kModelFormatVersion;
  j["spec"] = spec_json(model.spec);
  j["schema_id"] = model.schema_id;
  j["imputer"] = model.imputer.means;
  if (model.standardizer) {
    j["standardizer"] = {{"mean", model.standardizer->mean}, {"sd", model.standardizer->sd}};
  } else {
    j["standardizer"] = nullptr;
  }
  j["classifier"] = std::visit(ClassifierToJson{}, model.classifier);
  return j.dump();
}

Model model_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "adspeech-model") throw ParseError("not a model file");
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw ParseError(fmt::format("unsupported model version {}", j.at("version").get<int>()));
    }
    Model m;
    m.spec = spec_from(j.at("spec"));
    m.schema_id = j.at("schema_id").get<std::string>();
    m.imputer.means = j.at("imputer").get<std::vector<double>>();
    if (!j.at("standardizer").is_null()) {
      m.standardizer = Standardizer{j["standardizer"].at("mean").get<std::vector<double>>(),
                                    j["standardizer"].at("sd").get<std::vector<double>>()};
    }
    m.classifier = classifier_from(m.spec.kind, j.at("classifier"));
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model json: ") + e.what());
  }
}

}  // namespace adspeech
