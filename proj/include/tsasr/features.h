// include/tsasr/features.h

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

#ifndef TSASR_FEATURES_H_
#define TSASR_FEATURES_H_

#include <string>
#include <vector>

namespace tsasr {

// T x D matrix of per-frame acoustic features, row-major.
struct FeatureMatrix {
  int num_frames = 0;
  int dim = 0;
  std::vector<float> data;
  float frame_length_ms = 25.0f;
  float frame_shift_ms = 10.0f;

  FeatureMatrix() = default;
  FeatureMatrix(int t, int d)
      : num_frames(t), dim(d), data(static_cast<size_t>(t) * d, 0.0f) {}

  float &at(int t, int d) { return data[static_cast<size_t>(t) * dim + d]; }
  float at(int t, int d) const { return data[static_cast<size_t>(t) * dim + d]; }
  const float *row(int t) const { return data.data() + static_cast<size_t>(t) * dim; }
  float *row(int t) { return data.data() + static_cast<size_t>(t) * dim; }
};

// B windows of width 2c+1, one per input frame, edges replicated.
struct ContextBatch {
  int num_windows = 0;
  int width = 0;  // 2c + 1
  int dim = 0;
  std::vector<float> data;  // B x width x dim
  std::vector<int> center_indices;

  const float *window(int b) const {
    return data.data() + static_cast<size_t>(b) * width * dim;
  }
};

// One window per frame; frame t sits at the center of window t.
ContextBatch expand_context(const FeatureMatrix &f, int context);

// Per-utterance cepstral mean subtraction, in place.
void apply_cmn(FeatureMatrix &f);

// ATFM feature file: magic "ATFM", u32 T, u32 D, T*D float32 row-major,
// little-endian.  Round-trips are bit-exact.
void write_features(const std::string &path, const FeatureMatrix &f);
FeatureMatrix read_features(const std::string &path);

}  // namespace tsasr

#endif  // TSASR_FEATURES_H_
