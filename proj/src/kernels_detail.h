#pragma once

// Per-element bodies shared by the serial and OpenMP kernels.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "adspeech/dsp.h"
#include "adspeech/matrix.h"

namespace adspeech::kernels::detail {

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline std::vector<std::size_t> nearest_for(const Matrix& ref, std::span<const double> q,
                                            std::size_t k, std::size_t self,
                                            bool exclude_self) {
  std::vector<std::pair<double, std::size_t>> cand;
  cand.reserve(ref.rows());
  for (std::size_t j = 0; j < ref.rows(); ++j) {
    if (exclude_self && j == self) continue;
    cand.emplace_back(sq_dist(ref.row(j), q), j);
  }
  const std::size_t take = std::min(k, cand.size());
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end());
  std::vector<std::size_t> out(take);
  for (std::size_t i = 0; i < take; ++i) out[i] = cand[i].second;
  return out;
}

inline void spectrum_row(const Matrix& frames, std::size_t r, std::size_t nfft, Matrix& out) {
  const auto mag = dsp::magnitude_spectrum(frames.row(r), nfft);
  std::copy(mag.begin(), mag.end(), out.row(r).begin());
}

}  // namespace adspeech::kernels::detail
