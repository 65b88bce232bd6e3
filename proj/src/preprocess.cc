#include "adspeech/preprocess.h"

#include <cmath>

#include "adspeech/kernels.h"
#include "adspeech/rng.h"

namespace adspeech {

Imputer Imputer::fit(const Matrix& x) {
  Imputer imp;
  imp.means.assign(x.cols(), 0.0);
  std::vector<std::size_t> counts(x.cols(), 0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (!is_missing(x(r, c))) {
        imp.means[c] += x(r, c);
        ++counts[c];
      }
    }
  }
  for (std::size_t c = 0; c < x.cols(); ++c) {
    imp.means[c] = counts[c] > 0 ? imp.means[c] / static_cast<double>(counts[c]) : 0.0;
  }
  return imp;
}

void Imputer::apply_row(std::span<double> row) const {
  if (row.size() != means.size()) throw InputError("imputer: dimension mismatch");
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (is_missing(row[c])) row[c] = means[c];
  }
}

Matrix Imputer::apply(const Matrix& x) const {
  Matrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) apply_row(out.row(r));
  return out;
}

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  const std::size_t d = x.cols();
  s.mean.assign(d, 0.0);
  s.sd.assign(d, 1.0);
  if (x.rows() == 0) return s;
  const double n = static_cast<double>(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) s.mean[c] += x(r, c);
  }
  for (auto& m : s.mean) m /= n;
  std::vector<double> ss(d, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dev = x(r, c) - s.mean[c];
      ss[c] += dev * dev;
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    const double sd = std::sqrt(ss[c] / n);
    s.sd[c] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw InputError("standardizer: dimension mismatch");
  Matrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = (out(r, c) - mean[c]) / sd[c];
  }
  return out;
}

Matrix smote(const Matrix& x_min, std::size_t n_new, std::size_t k, std::uint64_t seed) {
  if (x_min.rows() < 2) throw InputError("smote needs at least 2 minority rows");
  if (k < 1) throw InputError("smote needs k >= 1");
  Matrix out(n_new, x_min.cols());
  if (n_new == 0) return out;
  const std::size_t kk = std::min(k, x_min.rows() - 1);
  const auto neighbors = kernels::omp::k_nearest(x_min, x_min, kk, true);
  Rng rng(derive_seed(seed, {0x5307E}));
  for (std::size_t i = 0; i < n_new; ++i) {
    const std::size_t src = rng.index(x_min.rows());
    const std::size_t nn = neighbors[src][rng.index(kk)];
    const double u = rng.uniform();
    const auto a = x_min.row(src);
    const auto b = x_min.row(nn);
    auto dst = out.row(i);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] = a[c] + u * (b[c] - a[c]);
  }
  return out;
}

Oversampled oversample_to_parity(const Matrix& x, const std::vector<Label>& y, std::size_t k,
                                 std::uint64_t seed) {
  std::vector<std::size_t> idx[2];
  for (std::size_t i = 0; i < y.size(); ++i) idx[static_cast<int>(y[i])].push_back(i);
  Oversampled out{x, y};
  const int minority = idx[0].size() < idx[1].size() ? 0 : 1;
  const std::size_t gap = idx[1 - minority].size() - idx[minority].size();
  if (gap == 0) return out;
  const Matrix synth = smote(x.select_rows(idx[minority]), gap, k, seed);
  for (std::size_t r = 0; r < synth.rows(); ++r) {
    out.x.append_row(synth.row(r));
    out.y.push_back(static_cast<Label>(minority));
  }
  return out;
}

}  // namespace adspeech
