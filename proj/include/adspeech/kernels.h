#pragma once

// Data-parallel kernels. Each kernel exists twice with identical signatures:
// `serial` is the reference kept for tests, `omp` is what the library calls.
// Every output element is written by exactly one thread with the same
// arithmetic as the serial path, so the two agree bit for bit.

#include <cstddef>
#include <functional>
#include <vector>

#include "adspeech/matrix.h"

namespace adspeech::kernels {

using NeighborLists = std::vector<std::vector<std::size_t>>;

#define ADSPEECH_KERNEL_DECLS                                                        \
  /* Row-wise magnitude spectra, frames zero-padded to nfft. */                      \
  Matrix magnitude_spectra(const Matrix& frames, std::size_t nfft);                  \
  /* D(i,j) = ||a_i - b_j||^2. */                                                    \
  Matrix squared_distances(const Matrix& a, const Matrix& b);                        \
  /* k nearest rows of `ref` for each query row, ordered by (distance, index).       \
     With exclude_self, ref row i is never a neighbor of query row i. */             \
  NeighborLists k_nearest(const Matrix& ref, const Matrix& queries, std::size_t k,   \
                          bool exclude_self);                                        \
  /* K(i,j) = exp(-gamma ||x_i - x_j||^2). */                                        \
  Matrix rbf_gram(const Matrix& x, double gamma);                                    \
  /* Calls fn(i) for every i in [0, n). fn must only write state owned by i. */      \
  void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn);

namespace serial {
ADSPEECH_KERNEL_DECLS
}  // namespace serial

namespace omp {
ADSPEECH_KERNEL_DECLS
// Caps the OpenMP team size; n <= 0 restores the runtime default.
void set_threads(int n);
int max_threads();
}  // namespace omp

#undef ADSPEECH_KERNEL_DECLS

}  // namespace adspeech::kernels
