// src/mixer.cc

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

#include "tsasr/mixer.h"

#include <cmath>
#include <cstdio>
#include <set>

#include "tsasr/errors.h"
#include "tsasr/rng.h"

namespace tsasr {

double signal_power(const Waveform &w) {
  if (w.empty()) throw DataError("signal_power: empty waveform");
  double acc = 0.0;
  for (float s : w.samples) acc += static_cast<double>(s) * s;
  return acc / static_cast<double>(w.size());
}

Waveform match_length(const Waveform &w, size_t target_len) {
  if (w.empty()) throw DataError("match_length: empty waveform");
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(target_len);
  for (size_t i = 0; i < target_len; ++i)
    out.samples[i] = w.samples[i % w.size()];
  return out;
}

MixResult mix_at_sir(const Waveform &target, const Waveform &interferer,
                     double sir_db) {
  if (target.sample_rate != interferer.sample_rate)
    throw ConfigError("mix_at_sir: sample rate mismatch (" +
                      std::to_string(target.sample_rate) + " vs " +
                      std::to_string(interferer.sample_rate) + ")");
  if (!std::isfinite(sir_db)) throw ConfigError("mix_at_sir: non-finite SIR");

  Waveform matched = match_length(interferer, target.size());
  double p_target = signal_power(target);
  double p_interferer = signal_power(matched);
  if (p_interferer <= 0.0)
    throw DataError("mix_at_sir: silent interferer");

  double gain =
      std::sqrt(p_target / (p_interferer * std::pow(10.0, sir_db / 10.0)));

  MixResult result;
  result.gain = gain;
  result.mixture.sample_rate = target.sample_rate;
  result.mixture.samples.resize(target.size());
  for (size_t i = 0; i < target.size(); ++i)
    result.mixture.samples[i] = static_cast<float>(
        static_cast<double>(target.samples[i]) +
        gain * static_cast<double>(matched.samples[i]));
  return result;
}

std::vector<MixEntry> build_overlap_corpus(const std::vector<UttEntry> &manifest,
                                           const std::vector<double> &sirs,
                                           uint64_t seed,
                                           const std::string &outdir) {
  if (sirs.empty()) throw ConfigError("build_overlap_corpus: empty SIR list");
  std::set<std::string> speakers;
  for (const auto &e : manifest) speakers.insert(e.speaker_id);
  if (speakers.size() < 2)
    throw DataError("build_overlap_corpus: manifest has fewer than 2 speakers");

  std::mt19937_64 rng(derive_seed(seed, "overlap-corpus"));
  std::vector<MixEntry> entries;
  entries.reserve(manifest.size() * sirs.size());

  for (size_t ti = 0; ti < manifest.size(); ++ti) {
    const auto &target_entry = manifest[ti];
    std::vector<size_t> eligible;
    for (size_t j = 0; j < manifest.size(); ++j)
      if (manifest[j].speaker_id != target_entry.speaker_id) eligible.push_back(j);

    Waveform target = load_wav(target_entry.path);
    for (double sir : sirs) {
      size_t pick = eligible[bounded_rand(rng, eligible.size())];
      const auto &intf_entry = manifest[pick];
      Waveform interferer = load_wav(intf_entry.path);
      MixResult mixed = mix_at_sir(target, interferer, sir);

      char sir_buf[32];
      std::snprintf(sir_buf, sizeof(sir_buf), "%g", sir);
      MixEntry e;
      e.mix_id = target_entry.utt_id + "__" + intf_entry.utt_id + "__sir" + sir_buf;
      e.target_utt = target_entry.utt_id;
      e.interferer_utt = intf_entry.utt_id;
      e.sir_db = sir;
      e.gain = mixed.gain;
      e.wav_path = outdir + "/" + e.mix_id + ".wav";
      save_wav_float32(e.wav_path, mixed.mixture);
      entries.push_back(std::move(e));
    }
  }
  return entries;
}

}  // namespace tsasr
