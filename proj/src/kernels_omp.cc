#include <omp.h>

#include <exception>

#include "adspeech/kernels.h"
#include "kernels_detail.h"

namespace adspeech::kernels::omp {

void set_threads(int n) {
  omp_set_num_threads(n > 0 ? n : omp_get_num_procs());
}

int max_threads() { return omp_get_max_threads(); }

Matrix magnitude_spectra(const Matrix& frames, std::size_t nfft) {
  Matrix out(frames.rows(), nfft / 2 + 1);
  const auto n = static_cast<std::ptrdiff_t>(frames.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    detail::spectrum_row(frames, static_cast<std::size_t>(r), nfft, out);
  }
  return out;
}

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.rows());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < b.rows(); ++j) out(ii, j) = detail::sq_dist(a.row(ii), b.row(j));
  }
  return out;
}

NeighborLists k_nearest(const Matrix& ref, const Matrix& queries, std::size_t k,
                        bool exclude_self) {
  NeighborLists out(queries.rows());
  const auto n = static_cast<std::ptrdiff_t>(queries.rows());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    out[ii] = detail::nearest_for(ref, queries.row(ii), k, ii, exclude_self);
  }
  return out;
}

Matrix rbf_gram(const Matrix& x, double gamma) {
  Matrix out(x.rows(), x.rows());
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < x.rows(); ++j) {
      out(ii, j) = std::exp(-gamma * detail::sq_dist(x.row(ii), x.row(j)));
    }
  }
  return out;
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const auto count = static_cast<std::ptrdiff_t>(n);
  // Exceptions cannot cross the parallel region; keep the lowest-index one.
  std::exception_ptr error;
  std::ptrdiff_t error_index = count;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(adspeech_for_each_error)
      if (i < error_index) {
        error_index = i;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace adspeech::kernels::omp
