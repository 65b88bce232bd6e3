#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adspeech/audio.h"
#include "adspeech/features.h"
#include "adspeech/matrix.h"

namespace adspeech {

struct AcousticConfig {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  int n_mels = 26;
  int n_coeffs = 13;
  double vad_win_ms = 30.0;
  double vad_percentile = 30.0;
  double vad_hang_ms = 60.0;
};

struct Frames {
  Matrix data;             // one windowed frame per row
  std::size_t n_full = 0;  // frames lying entirely inside the signal
  std::size_t frame_len = 0;
  std::size_t hop = 0;
};

// Pre-emphasis 0.97, Hamming window; frames advance by hop until one covers the
// last sample, that final partial frame is zero-padded. Throws InputError when
// the signal is shorter than one frame.
Frames frame_signal(const AudioSignal& signal, double frame_ms = 25.0, double hop_ms = 10.0);

// Triangular filters on the HTK mel scale from 0 Hz to Nyquist, evaluated at
// the nfft/2+1 bin frequencies. Row j peaks (weight 1) at mel_center_hz(j).
Matrix mel_filterbank(int n_mels, std::size_t nfft, int rate_hz);
double mel_center_hz(int j, int n_mels, int rate_hz);
double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct MfccResult {
  Matrix log_mel;  // frames x n_mels, natural log with floor 1e-10
  Matrix coeffs;   // frames x n_coeffs
  Matrix delta;
  Matrix delta2;
};

MfccResult mfcc(const Frames& frames, int rate_hz, int n_mels = 26, int n_coeffs = 13);

// +-2 frame regression with edge replication.
Matrix deltas(const Matrix& track);

struct Moments {
  double mean = 0;
  double variance = 0;
  std::optional<double> skewness;  // undefined when variance < 1e-12
  std::optional<double> excess_kurtosis;
};
// Population moments by two-pass summation.
Moments moments(std::span<const double> xs);

// mfcc{k}_{mean,var,skew,kurt}, mfcc{k}_d_*, mfcc{k}_dd_*; all missing below 4 frames.
NamedValues mfcc_stats(const MfccResult& m);

struct Segment {
  double start_s = 0;
  double end_s = 0;
  bool voiced = false;
  double duration() const { return end_s - start_s; }
  bool operator==(const Segment&) const = default;
};

struct VadSegmentation {
  std::vector<Segment> segments;
  double duration_s = 0;
};

// Frame RMS over non-overlapping win_ms windows. The voicing threshold sits
// `energy_percentile` percent of the way from the quiet floor (1st percentile
// of frame RMS) to the loud level (99th percentile); a signal whose loud level
// is within 6 dB of its floor is homogeneous and entirely voiced unless it is
// below -80 dBFS. Unvoiced gaps shorter than hang_ms between voiced runs are
// merged into the surrounding speech.
VadSegmentation vad(const AudioSignal& signal, double win_ms = 30.0,
                    double energy_percentile = 30.0, double hang_ms = 60.0);

struct PauseFeatures {
  double phonation_rate = 0;
  std::optional<double> mean_pause_duration;
  std::optional<double> pause_word_ratio;
  std::optional<double> short_pause_count_norm;   // pauses in [0, 1) s
  std::optional<double> medium_pause_count_norm;  // pauses in [1, 2) s
};
PauseFeatures pause_features(const VadSegmentation& seg, std::size_t n_tokens);

// Excess kurtosis of per-frame zero-crossing rate over frames inside voiced
// segments (VAD frame grid of win_ms).
std::optional<double> zcr_kurtosis(const AudioSignal& signal, const VadSegmentation& seg,
                                   double win_ms = 30.0);
std::vector<double> zero_crossing_rates(std::span<const double> samples,
                                        std::size_t frame_len);

NamedValues extract_acoustic(const std::optional<AudioSignal>& signal, std::size_t n_tokens,
                             const AcousticConfig& cfg = {});
std::vector<std::string> acoustic_feature_names(const AcousticConfig& cfg = {});

}  // namespace adspeech
