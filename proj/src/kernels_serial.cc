#include "adspeech/kernels.h"
#include "kernels_detail.h"

namespace adspeech::kernels::serial {

Matrix magnitude_spectra(const Matrix& frames, std::size_t nfft) {
  Matrix out(frames.rows(), nfft / 2 + 1);
  for (std::size_t r = 0; r < frames.rows(); ++r) detail::spectrum_row(frames, r, nfft, out);
  return out;
}

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = detail::sq_dist(a.row(i), b.row(j));
  }
  return out;
}

NeighborLists k_nearest(const Matrix& ref, const Matrix& queries, std::size_t k,
                        bool exclude_self) {
  NeighborLists out(queries.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    out[i] = detail::nearest_for(ref, queries.row(i), k, i, exclude_self);
  }
  return out;
}

Matrix rbf_gram(const Matrix& x, double gamma) {
  Matrix out(x.rows(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.rows(); ++j) {
      out(i, j) = std::exp(-gamma * detail::sq_dist(x.row(i), x.row(j)));
    }
  }
  return out;
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn) {
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace adspeech::kernels::serial
