#include "adspeech/acoustic_features.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "adspeech/common.h"
#include "adspeech/dsp.h"
#include "adspeech/kernels.h"

namespace adspeech {
namespace {

constexpr double kLogFloor = 1e-10;
constexpr double kVarianceFloor = 1e-12;
constexpr double kSilenceRms = 1e-4;  // -80 dBFS

std::size_t samples_for(double ms, int rate_hz) {
  return static_cast<std::size_t>(std::lround(ms * rate_hz / 1000.0));
}

double percentile(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  const double pos = p / 100.0 * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

std::vector<double> column(const Matrix& m, std::size_t c) {
  std::vector<double> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = m(r, c);
  return out;
}

const char* const kMomentNames[] = {"mean", "var", "skew", "kurt"};

}  // namespace

Frames frame_signal(const AudioSignal& signal, double frame_ms, double hop_ms) {
  if (!(hop_ms > 0.0) || frame_ms < hop_ms) {
    throw InputError("framing requires frame_ms >= hop_ms > 0");
  }
  Frames f;
  f.frame_len = samples_for(frame_ms, signal.rate_hz);
  f.hop = std::max<std::size_t>(1, samples_for(hop_ms, signal.rate_hz));
  const std::size_t n = signal.samples.size();
  if (n < f.frame_len || f.frame_len == 0) {
    throw InputError("signal shorter than one frame (" + std::to_string(n) + " < " +
                     std::to_string(f.frame_len) + " samples)");
  }
  const std::size_t span = n - f.frame_len;
  f.n_full = span / f.hop + 1;
  const std::size_t total = f.n_full + (span % f.hop != 0 ? 1 : 0);

  std::vector<double> emph(n);
  emph[0] = signal.samples[0];
  for (std::size_t i = 1; i < n; ++i) emph[i] = signal.samples[i] - 0.97 * signal.samples[i - 1];

  std::vector<double> window(f.frame_len);
  const double denom = f.frame_len > 1 ? static_cast<double>(f.frame_len - 1) : 1.0;
  for (std::size_t i = 0; i < f.frame_len; ++i) {
    window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom);
  }

  f.data = Matrix(total, f.frame_len);
  for (std::size_t t = 0; t < total; ++t) {
    const std::size_t start = t * f.hop;
    auto row = f.data.row(t);
    for (std::size_t i = 0; i < f.frame_len && start + i < n; ++i) {
      row[i] = emph[start + i] * window[i];
    }
  }
  return f;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

double mel_center_hz(int j, int n_mels, int rate_hz) {
  const double top = hz_to_mel(rate_hz / 2.0);
  return mel_to_hz(top * (j + 1) / (n_mels + 1));
}

Matrix mel_filterbank(int n_mels, std::size_t nfft, int rate_hz) {
  const double top = hz_to_mel(rate_hz / 2.0);
  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / (n_mels + 1));
  }
  const std::size_t n_bins = nfft / 2 + 1;
  Matrix fb(static_cast<std::size_t>(n_mels), n_bins);
  for (std::size_t j = 0; j < static_cast<std::size_t>(n_mels); ++j) {
    const double left = edges[j];
    const double center = edges[j + 1];
    const double right = edges[j + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * rate_hz / static_cast<double>(nfft);
      const double rise = (f - left) / (center - left);
      const double fall = (right - f) / (right - center);
      fb(j, k) = std::max(0.0, std::min(rise, fall));
    }
  }
  return fb;
}

Matrix deltas(const Matrix& track) {
  const std::size_t t_count = track.rows();
  Matrix out(t_count, track.cols());
  if (t_count == 0) return out;
  const auto at = [&](std::ptrdiff_t t, std::size_t c) {
    const auto clamped =
        std::clamp<std::ptrdiff_t>(t, 0, static_cast<std::ptrdiff_t>(t_count) - 1);
    return track(static_cast<std::size_t>(clamped), c);
  };
  constexpr double kDenom = 2.0 * (1.0 + 4.0);
  for (std::size_t t = 0; t < t_count; ++t) {
    const auto ti = static_cast<std::ptrdiff_t>(t);
    for (std::size_t c = 0; c < track.cols(); ++c) {
      out(t, c) = (1.0 * (at(ti + 1, c) - at(ti - 1, c)) + 2.0 * (at(ti + 2, c) - at(ti - 2, c))) /
                  kDenom;
    }
  }
  return out;
}

MfccResult mfcc(const Frames& frames, int rate_hz, int n_mels, int n_coeffs) {
  if (n_coeffs > n_mels) throw InputError("n_coeffs must not exceed n_mels");
  const std::size_t nfft = dsp::next_pow2(frames.frame_len);
  const Matrix spectra = kernels::omp::magnitude_spectra(frames.data, nfft);
  const Matrix fb = mel_filterbank(n_mels, nfft, rate_hz);
  const std::size_t t_count = frames.data.rows();
  const auto nm = static_cast<std::size_t>(n_mels);
  const auto nc = static_cast<std::size_t>(n_coeffs);

  MfccResult r;
  r.log_mel = Matrix(t_count, nm);
  for (std::size_t t = 0; t < t_count; ++t) {
    const auto mag = spectra.row(t);
    for (std::size_t j = 0; j < nm; ++j) {
      double e = 0.0;
      const auto w = fb.row(j);
      for (std::size_t k = 0; k < w.size(); ++k) e += w[k] * mag[k];
      r.log_mel(t, j) = std::log(std::max(e, kLogFloor));
    }
  }

  // Orthonormal DCT-II.
  Matrix basis(nc, nm);
  for (std::size_t k = 0; k < nc; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / nm) : std::sqrt(2.0 / nm);
    for (std::size_t n = 0; n < nm; ++n) {
      basis(k, n) = scale * std::cos(std::numbers::pi * static_cast<double>(k) *
                                     (static_cast<double>(n) + 0.5) / static_cast<double>(nm));
    }
  }
  r.coeffs = Matrix(t_count, nc);
  for (std::size_t t = 0; t < t_count; ++t) {
    for (std::size_t k = 0; k < nc; ++k) {
      double s = 0.0;
      for (std::size_t n = 0; n < nm; ++n) s += basis(k, n) * r.log_mel(t, n);
      r.coeffs(t, k) = s;
    }
  }
  r.delta = deltas(r.coeffs);
  r.delta2 = deltas(r.delta);
  return r;
}

Moments moments(std::span<const double> xs) {
  Moments m;
  if (xs.empty()) return m;
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.variance = m2;
  if (m2 >= kVarianceFloor) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

NamedValues mfcc_stats(const MfccResult& m) {
  NamedValues out;
  const std::size_t nc = m.coeffs.cols();
  const bool enough = m.coeffs.rows() >= 4;
  const Matrix* tracks[] = {&m.coeffs, &m.delta, &m.delta2};
  const char* const suffix[] = {"", "_d", "_dd"};
  for (std::size_t k = 0; k < nc; ++k) {
    for (int t = 0; t < 3; ++t) {
      const std::string prefix = "mfcc" + std::to_string(k) + suffix[t] + "_";
      if (!enough) {
        for (const char* name : kMomentNames) out.set(prefix + name, kMissing);
        continue;
      }
      const auto col = column(*tracks[t], k);
      const Moments mo = moments(col);
      out.set(prefix + "mean", mo.mean);
      out.set(prefix + "var", mo.variance);
      out.set(prefix + "skew", mo.skewness);
      out.set(prefix + "kurt", mo.excess_kurtosis);
    }
  }
  return out;
}

VadSegmentation vad(const AudioSignal& signal, double win_ms, double energy_percentile,
                    double hang_ms) {
  const std::size_t n = signal.samples.size();
  const std::size_t win = std::max<std::size_t>(1, samples_for(win_ms, signal.rate_hz));
  if (n < win) throw InputError("signal shorter than one VAD window");
  const std::size_t n_frames = (n + win - 1) / win;
  std::vector<double> rms(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * win;
    const std::size_t end = std::min(n, start + win);
    double s = 0.0;
    for (std::size_t i = start; i < end; ++i) s += signal.samples[i] * signal.samples[i];
    rms[f] = std::sqrt(s / static_cast<double>(end - start));
  }

  const double floor_level = percentile(rms, 1.0);
  const double loud_level = percentile(rms, 99.0);
  std::vector<bool> voiced(n_frames, false);
  if (loud_level > kSilenceRms) {
    if (loud_level <= 2.0 * floor_level) {
      std::fill(voiced.begin(), voiced.end(), true);
    } else {
      const double thr = floor_level + energy_percentile / 100.0 * (loud_level - floor_level);
      for (std::size_t f = 0; f < n_frames; ++f) voiced[f] = rms[f] > thr && rms[f] > kSilenceRms;
    }
  }

  // Hangover: bridge short interior gaps.
  const double frame_s = static_cast<double>(win) / signal.rate_hz;
  std::size_t f = 0;
  while (f < n_frames) {
    if (voiced[f]) {
      ++f;
      continue;
    }
    std::size_t g = f;
    while (g < n_frames && !voiced[g]) ++g;
    const bool interior = f > 0 && g < n_frames;
    if (interior && static_cast<double>(g - f) * frame_s * 1000.0 < hang_ms) {
      std::fill(voiced.begin() + static_cast<std::ptrdiff_t>(f),
                voiced.begin() + static_cast<std::ptrdiff_t>(g), true);
    }
    f = g;
  }

  VadSegmentation seg;
  seg.duration_s = signal.duration_s();
  std::size_t start = 0;
  for (std::size_t i = 1; i <= n_frames; ++i) {
    if (i == n_frames || voiced[i] != voiced[start]) {
      Segment s;
      s.start_s = static_cast<double>(start * win) / signal.rate_hz;
      s.end_s = static_cast<double>(std::min(n, i * win)) / signal.rate_hz;
      s.voiced = voiced[start];
      seg.segments.push_back(s);
      start = i;
    }
  }
  return seg;
}

PauseFeatures pause_features(const VadSegmentation& seg, std::size_t n_tokens) {
  if (!(seg.duration_s > 0.0)) throw InputError("segmentation must tile a positive duration");
  PauseFeatures p;
  double voiced_time = 0.0;
  double pause_time = 0.0;
  std::size_t n_voiced = 0, n_pauses = 0, n_short = 0, n_medium = 0;
  for (const auto& s : seg.segments) {
    const double d = s.duration();
    if (s.voiced) {
      voiced_time += d;
      ++n_voiced;
    } else {
      pause_time += d;
      ++n_pauses;
      if (d < 1.0) {
        ++n_short;
      } else if (d < 2.0) {
        ++n_medium;
      }
    }
  }
  p.phonation_rate = voiced_time / seg.duration_s;
  if (n_pauses > 0) p.mean_pause_duration = pause_time / static_cast<double>(n_pauses);
  if (n_voiced > 0) {
    p.pause_word_ratio = static_cast<double>(n_pauses) / static_cast<double>(n_voiced);
  }
  if (n_tokens > 0) {
    p.short_pause_count_norm = static_cast<double>(n_short) / static_cast<double>(n_tokens);
    p.medium_pause_count_norm = static_cast<double>(n_medium) / static_cast<double>(n_tokens);
  }
  return p;
}

std::vector<double> zero_crossing_rates(std::span<const double> samples, std::size_t frame_len) {
  std::vector<double> out;
  if (frame_len < 2) return out;
  for (std::size_t start = 0; start + frame_len <= samples.size(); start += frame_len) {
    std::size_t crossings = 0;
    for (std::size_t i = start + 1; i < start + frame_len; ++i) {
      if ((samples[i - 1] >= 0.0) != (samples[i] >= 0.0)) ++crossings;
    }
    out.push_back(static_cast<double>(crossings) / static_cast<double>(frame_len - 1));
  }
  return out;
}

std::optional<double> zcr_kurtosis(const AudioSignal& signal, const VadSegmentation& seg,
                                   double win_ms) {
  const std::size_t win = std::max<std::size_t>(1, samples_for(win_ms, signal.rate_hz));
  std::vector<double> rates;
  for (const auto& s : seg.segments) {
    if (!s.voiced) continue;
    const auto begin = static_cast<std::size_t>(std::lround(s.start_s * signal.rate_hz));
    const auto end = std::min(signal.samples.size(),
                              static_cast<std::size_t>(std::lround(s.end_s * signal.rate_hz)));
    if (end <= begin) continue;
    const auto part = zero_crossing_rates(
        std::span<const double>(signal.samples).subspan(begin, end - begin), win);
    rates.insert(rates.end(), part.begin(), part.end());
  }
  if (rates.size() < 4) return std::nullopt;
  return moments(rates).excess_kurtosis;
}

std::vector<std::string> acoustic_feature_names(const AcousticConfig& cfg) {
  std::vector<std::string> names;
  const NamedValues probe = extract_acoustic(std::nullopt, 0, cfg);
  for (const auto& [n, _] : probe.items()) names.push_back(n);
  return names;
}

NamedValues extract_acoustic(const std::optional<AudioSignal>& signal, std::size_t n_tokens,
                             const AcousticConfig& cfg) {
  static const char* const kPauseNames[] = {"phonation_rate", "mean_pause_duration",
                                            "pause_word_ratio", "short_pause_count_norm",
                                            "medium_pause_count_norm", "zcr_kurtosis"};
  const auto all_missing = [&] {
    NamedValues out;
    const char* const suffix[] = {"", "_d", "_dd"};
    for (int k = 0; k < cfg.n_coeffs; ++k) {
      for (const char* s : suffix) {
        for (const char* m : kMomentNames) {
          out.set("mfcc" + std::to_string(k) + s + "_" + m, kMissing);
        }
      }
    }
    for (const char* n : kPauseNames) out.set(n, kMissing);
    return out;
  };
  if (!signal) return all_missing();

  Frames frames;
  VadSegmentation seg;
  try {
    frames = frame_signal(*signal, cfg.frame_ms, cfg.hop_ms);
    seg = vad(*signal, cfg.vad_win_ms, cfg.vad_percentile, cfg.vad_hang_ms);
  } catch (const InputError&) {
    return all_missing();
  }
  NamedValues out = mfcc_stats(mfcc(frames, signal->rate_hz, cfg.n_mels, cfg.n_coeffs));
  const PauseFeatures p = pause_features(seg, n_tokens);
  out.set(kPauseNames[0], p.phonation_rate);
  out.set(kPauseNames[1], p.mean_pause_duration);
  out.set(kPauseNames[2], p.pause_word_ratio);
  out.set(kPauseNames[3], p.short_pause_count_norm);
  out.set(kPauseNames[4], p.medium_pause_count_norm);
  out.set(kPauseNames[5], zcr_kurtosis(*signal, seg, cfg.vad_win_ms));
  return out;
}

}  // namespace adspeech
