#include "adspeech/dsp.h"

#include <cassert>
#include <cmath>
#include <numbers>
#include <utility>

namespace adspeech::dsp {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace {

// Twiddles exp(-2 pi i k / n), each from std::polar directly rather than by
// recurrence; cached per thread for the last size used.
const std::vector<std::complex<double>>& twiddles(std::size_t n) {
  thread_local std::vector<std::complex<double>> table;
  thread_local std::size_t table_n = 0;
  if (table_n != n) {
    table.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      table[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                     static_cast<double>(n));
    }
    table_n = n;
  }
  return table;
}

}  // namespace

void fft(std::span<std::complex<double>> a) {
  const std::size_t n = a.size();
  assert((n & (n - 1)) == 0);
  if (n < 2) return;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const auto& w = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w[k * stride];
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

std::vector<double> magnitude_spectrum(std::span<const double> frame, std::size_t nfft) {
  std::vector<std::complex<double>> buf(nfft);
  for (std::size_t i = 0; i < frame.size() && i < nfft; ++i) buf[i] = frame[i];
  fft(buf);
  std::vector<double> mag(nfft / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
  return mag;
}

std::vector<double> magnitude_spectrum_dft(std::span<const double> frame, std::size_t nfft) {
  std::vector<double> mag(nfft / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < frame.size() && n < nfft; ++n) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * n % nfft) /
                         static_cast<double>(nfft);
      acc += frame[n] * std::polar(1.0, ang);
    }
    mag[k] = std::abs(acc);
  }
  return mag;
}

}  // namespace adspeech::dsp
