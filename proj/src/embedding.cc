// src/embedding.cc

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

#include "tsasr/embedding.h"

#include <cmath>
#include <cstring>
#include <fstream>

#include "tsasr/errors.h"
#include "tsasr/rng.h"

namespace tsasr {

namespace {
constexpr char kMagic[4] = {'A', 'T', 'E', 'M'};
}

SpeakerEmbedding load_embedding(const std::string &path, int expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("bad ATEM magic: " + path);
  uint32_t dim = 0;
  in.read(reinterpret_cast<char *>(&dim), 4);
  if (!in || dim == 0) throw FormatError("bad ATEM dimension: " + path);
  if (expected_dim > 0 && static_cast<int>(dim) != expected_dim)
    throw ConfigError("embedding dimension " + std::to_string(dim) +
                      " does not match configured dimension " +
                      std::to_string(expected_dim) + ": " + path);

  SpeakerEmbedding e;
  e.vector.resize(dim);
  in.read(reinterpret_cast<char *>(e.vector.data()),
          static_cast<std::streamsize>(dim * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(dim * sizeof(float)))
    throw FormatError("truncated ATEM payload: " + path);
  return e;
}

void save_embedding(const std::string &path, const SpeakerEmbedding &e) {
  if (e.vector.empty()) throw ShapeError("save_embedding: empty vector");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write embedding file: " + path);
  out.write(kMagic, 4);
  uint32_t dim = static_cast<uint32_t>(e.vector.size());
  out.write(reinterpret_cast<const char *>(&dim), 4);
  out.write(reinterpret_cast<const char *>(e.vector.data()),
            static_cast<std::streamsize>(e.vector.size() * sizeof(float)));
  if (!out) throw DataError("short write: " + path);
}

SpeakerEmbedding normalize_embedding(const SpeakerEmbedding &e) {
  double norm_sq = 0.0;
  for (float v : e.vector) norm_sq += static_cast<double>(v) * v;
  if (norm_sq <= 0.0)
    throw DataError("normalize_embedding: zero vector for speaker '" +
                    e.speaker_id + "'");
  double inv = 1.0 / std::sqrt(norm_sq);
  SpeakerEmbedding out = e;
  for (float &v : out.vector) v = static_cast<float>(v * inv);
  return out;
}

SpeakerEmbedding stats_embedding(const std::vector<FeatureMatrix> &enrollment,
                                 int dim, uint64_t seed) {
  if (enrollment.empty())
    throw DataError("stats_embedding: no enrollment features");
  if (dim < 1) throw ConfigError("stats_embedding: dimension must be >= 1");

  const int feat_dim = enrollment.front().dim;
  int64_t total_frames = 0;
  for (const auto &f : enrollment) {
    if (f.dim != feat_dim)
      throw ShapeError("stats_embedding: inconsistent feature dimensions");
    total_frames += f.num_frames;
  }
  if (total_frames < 2)
    throw DataError("stats_embedding: need at least 2 frames, got " +
                    std::to_string(total_frames));

  // Population mean/std over the union of frames.
  std::vector<double> sum(feat_dim, 0.0), sum_sq(feat_dim, 0.0);
  for (const auto &f : enrollment)
    for (int t = 0; t < f.num_frames; ++t)
      for (int d = 0; d < feat_dim; ++d) {
        double v = f.at(t, d);
        sum[d] += v;
        sum_sq[d] += v * v;
      }

  std::vector<double> stats(2 * feat_dim);
  for (int d = 0; d < feat_dim; ++d) {
    double mean = sum[d] / static_cast<double>(total_frames);
    double var = sum_sq[d] / static_cast<double>(total_frames) - mean * mean;
    stats[d] = mean;
    stats[feat_dim + d] = std::sqrt(std::max(var, 0.0));
  }

  // Fixed seeded Gaussian projection, rows drawn in dimension order.
  Gaussian gauss(derive_seed(seed, "stats-embedding-projection"));
  double scale = 1.0 / std::sqrt(static_cast<double>(2 * feat_dim));
  SpeakerEmbedding e;
  e.vector.resize(dim);
  for (int i = 0; i < dim; ++i) {
    double acc = 0.0;
    for (int j = 0; j < 2 * feat_dim; ++j) acc += gauss.sample() * scale * stats[j];
    e.vector[i] = static_cast<float>(acc);
  }
  return e;
}

}  // namespace tsasr
