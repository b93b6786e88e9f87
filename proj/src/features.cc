// src/features.cc

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

#include "tsasr/features.h"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "tsasr/errors.h"

namespace tsasr {

ContextBatch expand_context(const FeatureMatrix &f, int context) {
  if (f.num_frames < 1 || f.dim < 1)
    throw ShapeError("expand_context: empty feature matrix");
  if (context < 0) throw ConfigError("expand_context: negative context");

  ContextBatch batch;
  batch.num_windows = f.num_frames;
  batch.width = 2 * context + 1;
  batch.dim = f.dim;
  batch.data.resize(static_cast<size_t>(batch.num_windows) * batch.width * f.dim);
  batch.center_indices.resize(f.num_frames);

  for (int t = 0; t < f.num_frames; ++t) {
    batch.center_indices[t] = t;
    float *dst = batch.data.data() +
                 static_cast<size_t>(t) * batch.width * f.dim;
    for (int k = -context; k <= context; ++k) {
      int src = std::clamp(t + k, 0, f.num_frames - 1);
      std::memcpy(dst, f.row(src), sizeof(float) * f.dim);
      dst += f.dim;
    }
  }
  return batch;
}

void apply_cmn(FeatureMatrix &f) {
  if (f.num_frames < 1) return;
  std::vector<double> mean(f.dim, 0.0);
  for (int t = 0; t < f.num_frames; ++t)
    for (int d = 0; d < f.dim; ++d) mean[d] += f.at(t, d);
  for (int d = 0; d < f.dim; ++d) mean[d] /= f.num_frames;
  for (int t = 0; t < f.num_frames; ++t)
    for (int d = 0; d < f.dim; ++d)
      f.at(t, d) = static_cast<float>(f.at(t, d) - mean[d]);
}

namespace {
constexpr char kMagic[4] = {'A', 'T', 'F', 'M'};
}

void write_features(const std::string &path, const FeatureMatrix &f) {
  if (f.num_frames < 1 || f.dim < 1)
    throw ShapeError("write_features: empty feature matrix");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write feature file: " + path);
  out.write(kMagic, 4);
  uint32_t t = static_cast<uint32_t>(f.num_frames);
  uint32_t d = static_cast<uint32_t>(f.dim);
  out.write(reinterpret_cast<const char *>(&t), 4);
  out.write(reinterpret_cast<const char *>(&d), 4);
  out.write(reinterpret_cast<const char *>(f.data.data()),
            static_cast<std::streamsize>(f.data.size() * sizeof(float)));
  if (!out) throw DataError("short write: " + path);
}

FeatureMatrix read_features(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("bad ATFM magic: " + path);
  uint32_t t = 0, d = 0;
  in.read(reinterpret_cast<char *>(&t), 4);
  in.read(reinterpret_cast<char *>(&d), 4);
  if (!in) throw FormatError("truncated ATFM header: " + path);
  if (t == 0 || d == 0) throw FormatError("empty ATFM matrix: " + path);

  FeatureMatrix f(static_cast<int>(t), static_cast<int>(d));
  in.read(reinterpret_cast<char *>(f.data.data()),
          static_cast<std::streamsize>(f.data.size() * sizeof(float)));
  if (in.gcount() !=
      static_cast<std::streamsize>(f.data.size() * sizeof(float)))
    throw FormatError("truncated ATFM payload: " + path);
  return f;
}

}  // namespace tsasr
