// src/mfcc.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "tsasr/mfcc.h"

#include <cmath>

#include "tsasr/errors.h"

namespace tsasr {

namespace detail {

void fft_radix2(std::vector<std::complex<double>> &x) {
  const size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw ConfigError("fft size must be a power of two");

  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * M_PI / static_cast<double>(len);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = x[i + k];
        std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace detail

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular mel filterbank over FFT bins, one row per filter.
std::vector<std::vector<double>> build_filterbank(const MfccConfig &cfg) {
  const int n_bins = cfg.fft_size / 2 + 1;
  const double high =
      cfg.high_freq > 0.0 ? cfg.high_freq : cfg.sample_rate / 2.0;
  if (cfg.low_freq < 0.0 || high <= cfg.low_freq)
    throw ConfigError("invalid mel filterbank frequency range");
  if (cfg.num_filters < 1) throw ConfigError("num_filters must be >= 1");

  const double mel_low = hz_to_mel(cfg.low_freq);
  const double mel_high = hz_to_mel(high);
  std::vector<int> bins(cfg.num_filters + 2);
  for (int i = 0; i < cfg.num_filters + 2; ++i) {
    double mel = mel_low + (mel_high - mel_low) * i / (cfg.num_filters + 1);
    double hz = mel_to_hz(mel);
    bins[i] = static_cast<int>(
        std::floor((cfg.fft_size + 1) * hz / cfg.sample_rate));
  }

  std::vector<std::vector<double>> fb(
      cfg.num_filters, std::vector<double>(n_bins, 0.0));
  for (int m = 1; m <= cfg.num_filters; ++m) {
    int b0 = bins[m - 1], b1 = bins[m], b2 = bins[m + 1];
    if (b1 <= b0 || b2 <= b1)
      throw ConfigError("mel filter collapsed; too many filters for fft size");
    for (int k = b0; k < b1; ++k)
      fb[m - 1][k] = static_cast<double>(k - b0) / (b1 - b0);
    for (int k = b1; k < b2; ++k)
      fb[m - 1][k] = static_cast<double>(b2 - k) / (b2 - b1);
  }
  return fb;
}

}  // namespace

int mfcc_num_frames(size_t num_samples, const MfccConfig &cfg) {
  const int frame_len = cfg.frame_length_samples();
  const int hop = cfg.frame_shift_samples();
  if (num_samples < static_cast<size_t>(frame_len)) return 0;
  return static_cast<int>((num_samples - frame_len) / hop) + 1;
}

FeatureMatrix compute_mfcc(const Waveform &w, const MfccConfig &cfg) {
  if (w.empty()) throw DataError("compute_mfcc: empty waveform");
  if (w.sample_rate != cfg.sample_rate)
    throw ConfigError("compute_mfcc: waveform rate " +
                      std::to_string(w.sample_rate) + " != config rate " +
                      std::to_string(cfg.sample_rate));
  const int frame_len = cfg.frame_length_samples();
  const int hop = cfg.frame_shift_samples();
  if (frame_len > cfg.fft_size)
    throw ConfigError("frame length exceeds fft size");
  if (cfg.num_ceps < 1 || cfg.num_ceps > cfg.num_filters)
    throw ConfigError("num_ceps must be in [1, num_filters]");
  const int num_frames = mfcc_num_frames(w.size(), cfg);
  if (num_frames < 1)
    throw DataError("compute_mfcc: waveform shorter than one frame (" +
                    std::to_string(w.size()) + " < " +
                    std::to_string(frame_len) + " samples)");

  // Signal-level pre-emphasis: y[0] = x[0], y[n] = x[n] - a*x[n-1].
  std::vector<double> signal(w.size());
  signal[0] = w.samples[0];
  for (size_t n = 1; n < w.size(); ++n)
    signal[n] = static_cast<double>(w.samples[n]) -
                cfg.preemphasis * static_cast<double>(w.samples[n - 1]);

  std::vector<double> window(frame_len);
  for (int i = 0; i < frame_len; ++i)
    window[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (frame_len - 1));

  const auto fb = build_filterbank(cfg);
  const int n_bins = cfg.fft_size / 2 + 1;
  constexpr double kLogFloor = 1e-10;

  FeatureMatrix feats(num_frames, cfg.num_ceps);
  feats.frame_length_ms = static_cast<float>(cfg.frame_length_ms);
  feats.frame_shift_ms = static_cast<float>(cfg.frame_shift_ms);

  std::vector<std::complex<double>> buf(cfg.fft_size);
  std::vector<double> power(n_bins);
  std::vector<double> log_mel(cfg.num_filters);

  for (int t = 0; t < num_frames; ++t) {
    const double *frame = signal.data() + static_cast<size_t>(t) * hop;
    for (int i = 0; i < frame_len; ++i) buf[i] = frame[i] * window[i];
    for (int i = frame_len; i < cfg.fft_size; ++i) buf[i] = 0.0;
    detail::fft_radix2(buf);

    for (int k = 0; k < n_bins; ++k)
      power[k] = std::norm(buf[k]) / cfg.fft_size;

    for (int m = 0; m < cfg.num_filters; ++m) {
      double e = 0.0;
      for (int k = 0; k < n_bins; ++k) e += fb[m][k] * power[k];
      log_mel[m] = std::log(std::max(e, kLogFloor));
    }

    // Orthonormal DCT-II.
    for (int c = 0; c < cfg.num_ceps; ++c) {
      double acc = 0.0;
      for (int m = 0; m < cfg.num_filters; ++m)
        acc += log_mel[m] *
               std::cos(M_PI * c * (2.0 * m + 1.0) / (2.0 * cfg.num_filters));
      double norm = (c == 0) ? std::sqrt(1.0 / cfg.num_filters)
                             : std::sqrt(2.0 / cfg.num_filters);
      feats.at(t, c) = static_cast<float>(acc * norm);
    }
  }

  if (cfg.apply_cmn) apply_cmn(feats);
  return feats;
}

}  // namespace tsasr
