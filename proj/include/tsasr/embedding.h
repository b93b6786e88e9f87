// include/tsasr/embedding.h

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

#ifndef TSASR_EMBEDDING_H_
#define TSASR_EMBEDDING_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tsasr/features.h"

namespace tsasr {

// Fixed-length target-speaker vector.  Externally computed vectors (e.g.
// x-vectors) are ingested from ATEM files; stats_embedding is the
// self-contained fallback when none are available.
struct SpeakerEmbedding {
  std::string speaker_id;
  std::vector<float> vector;

  int dim() const { return static_cast<int>(vector.size()); }
};

// ATEM file: magic "ATEM", u32 E, E float32, little-endian.
// expected_dim > 0 enforces the model dimension (ConfigError on mismatch).
SpeakerEmbedding load_embedding(const std::string &path, int expected_dim = 0);
void save_embedding(const std::string &path, const SpeakerEmbedding &e);

// Unit Euclidean norm.  Throws DataError on the zero vector.
SpeakerEmbedding normalize_embedding(const SpeakerEmbedding &e);

// Concatenates per-dimension mean and standard deviation over all enrollment
// frames (length 2D), then maps to `dim` via a seeded Gaussian random
// projection.  Needs at least 2 frames in total.
SpeakerEmbedding stats_embedding(const std::vector<FeatureMatrix> &enrollment,
                                 int dim, uint64_t seed);

}  // namespace tsasr

#endif  // TSASR_EMBEDDING_H_
