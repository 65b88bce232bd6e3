#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace adspeech::dsp {

std::size_t next_pow2(std::size_t n);

// In-place iterative radix-2 FFT; size must be a power of two.
void fft(std::span<std::complex<double>> data);

// |X_k| for k in [0, nfft/2], frame zero-padded to nfft.
std::vector<double> magnitude_spectrum(std::span<const double> frame, std::size_t nfft);

// Reference O(N^2) DFT magnitude, same contract as magnitude_spectrum.
std::vector<double> magnitude_spectrum_dft(std::span<const double> frame, std::size_t nfft);

}  // namespace adspeech::dsp
