// include/tsasr/manifest.h

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

#ifndef TSASR_MANIFEST_H_
#define TSASR_MANIFEST_H_

#include <string>
#include <vector>

namespace tsasr {

// One utterance per line: utt_id<TAB>speaker_id<TAB>path.  The same layout
// serves WAV manifests and feature manifests.
struct UttEntry {
  std::string utt_id;
  std::string speaker_id;
  std::string path;
};

// mix_id<TAB>target_utt<TAB>interferer_utt<TAB>sir_db<TAB>gain<TAB>wav_path
struct MixEntry {
  std::string mix_id;
  std::string target_utt;
  std::string interferer_utt;
  double sir_db = 0.0;
  double gain = 0.0;
  std::string wav_path;
};

// speaker_id<TAB>path
struct EmbeddingEntry {
  std::string speaker_id;
  std::string path;
};

std::vector<UttEntry> read_manifest(const std::string &path);
void write_manifest(const std::string &path, const std::vector<UttEntry> &entries);

std::vector<MixEntry> read_mixture_manifest(const std::string &path);
void write_mixture_manifest(const std::string &path,
                            const std::vector<MixEntry> &entries);

std::vector<EmbeddingEntry> read_embedding_manifest(const std::string &path);
void write_embedding_manifest(const std::string &path,
                              const std::vector<EmbeddingEntry> &entries);

}  // namespace tsasr

#endif  // TSASR_MANIFEST_H_
