// include/tsasr/mfcc.h

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

#ifndef TSASR_MFCC_H_
#define TSASR_MFCC_H_

#include <complex>
#include <vector>

#include "tsasr/features.h"
#include "tsasr/wav.h"

namespace tsasr {

struct MfccConfig {
  int sample_rate = 16000;
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  int num_ceps = 13;       // c0 included, no liftering
  int num_filters = 23;
  int fft_size = 512;      // power of two
  double preemphasis = 0.97;
  double low_freq = 20.0;
  double high_freq = 0.0;  // 0 means Nyquist
  bool apply_cmn = true;   // per-utterance mean subtraction

  int frame_length_samples() const {
    return static_cast<int>(sample_rate * frame_length_ms / 1000.0 + 0.5);
  }
  int frame_shift_samples() const {
    return static_cast<int>(sample_rate * frame_shift_ms / 1000.0 + 0.5);
  }
};

// Pipeline: pre-emphasis, Hamming window, power spectrum, triangular mel
// filterbank (HTK mel scale), log, DCT-II orthonormal.  All math in double,
// output stored as float32.
FeatureMatrix compute_mfcc(const Waveform &w, const MfccConfig &cfg);

// T = floor((N - frame_len) / hop) + 1; partial trailing frames are dropped.
int mfcc_num_frames(size_t num_samples, const MfccConfig &cfg);

namespace detail {
// In-place iterative radix-2 FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>> &x);
}  // namespace detail

}  // namespace tsasr

#endif  // TSASR_MFCC_H_
