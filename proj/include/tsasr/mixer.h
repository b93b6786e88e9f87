// include/tsasr/mixer.h

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

#ifndef TSASR_MIXER_H_
#define TSASR_MIXER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tsasr/manifest.h"
#include "tsasr/wav.h"

namespace tsasr {

// Mean-square power, accumulated in double.
double signal_power(const Waveform &w);

// Interferer tiled cyclically or truncated to the target length, so the
// overlap covers the whole target.
Waveform match_length(const Waveform &w, size_t target_len);

struct MixResult {
  Waveform mixture;  // target + gain * interferer, no re-normalization
  double gain = 0.0;
};

// Scales the (length-matched) interferer so that
// 10*log10(P_target / P_scaled_interferer) == sir_db, then adds.
// Throws DataError on a silent interferer, ConfigError on rate mismatch.
MixResult mix_at_sir(const Waveform &target, const Waveform &interferer,
                     double sir_db);

// For each manifest utterance and each SIR, draws one interferer uniformly
// from utterances of other speakers and writes the float32 mixture WAV into
// outdir.  Deterministic in (manifest order, sirs, seed).
std::vector<MixEntry> build_overlap_corpus(const std::vector<UttEntry> &manifest,
                                           const std::vector<double> &sirs,
                                           uint64_t seed,
                                           const std::string &outdir);

}  // namespace tsasr

#endif  // TSASR_MIXER_H_
