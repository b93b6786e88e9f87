// include/tsasr/wav.h

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

#ifndef TSASR_WAV_H_
#define TSASR_WAV_H_

#include <string>
#include <vector>

namespace tsasr {

struct Waveform {
  std::vector<float> samples;  // nominal range [-1, 1]
  int sample_rate = 16000;

  bool empty() const { return samples.empty(); }
  size_t size() const { return samples.size(); }
};

// Reads a mono RIFF/WAVE file.  PCM16 samples are scaled by 1/32768; IEEE
// float32 data (the encoding mixture WAVs are written in) is passed through.
// Throws FormatError on a malformed container, UnsupportedFormatError on
// multi-channel audio or any other sample encoding.
Waveform load_wav(const std::string &path);

// int16 PCM, values clamped to [-1, 1] before quantization.
void save_wav_pcm16(const std::string &path, const Waveform &w);

// IEEE float32, no clamping, so mixtures keep values beyond full scale.
void save_wav_float32(const std::string &path, const Waveform &w);

}  // namespace tsasr

#endif  // TSASR_WAV_H_
