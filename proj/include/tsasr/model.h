// include/tsasr/model.h

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

#ifndef TSASR_MODEL_H_
#define TSASR_MODEL_H_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsasr/layers.h"
#include "tsasr/tensor.h"

namespace tsasr {

struct ModelConfig {
  std::array<int, 4> stage_channels{64, 128, 256, 512};
  int blocks_per_stage = 2;
  int num_classes = 3400;
  int input_height = 21;  // time (context window)
  int input_width = 13;   // cepstra
  int embedding_dim = 512;

  void validate() const;
};

enum class FusionMode { kNone, kAffine, kInputBias, kMiddleFusion };
enum class ScaleMode { kFree, kFrozenOne, kSigmoid, kTanh };
enum class BiasMode { kFree, kFrozenZero };

const char *to_string(FusionMode m);
const char *to_string(ScaleMode m);
const char *to_string(BiasMode m);
FusionMode fusion_from_string(const std::string &s);
ScaleMode scale_mode_from_string(const std::string &s);
BiasMode bias_mode_from_string(const std::string &s);

struct ConditioningConfig {
  FusionMode fusion = FusionMode::kNone;
  std::vector<int> at_blocks;  // subset of {1,2,3,4}, ascending
  ScaleMode scale_mode = ScaleMode::kFree;
  BiasMode bias_mode = BiasMode::kFree;
  int generator_hidden = 512;

  void validate() const;
};

// Per-sample, per-channel modulation coefficients for each conditioned
// stage, parallel to ConditioningConfig::at_blocks.
struct FilmParams {
  std::vector<nn::Matrix> alpha;  // each B x C_b
  std::vector<nn::Matrix> beta;
};

// out[i,c,h,w] = alpha[i,c] * f[i,c,h,w] + beta[i,c]
nn::Tensor4 apply_at(const nn::Tensor4 &f, const nn::Matrix &alpha,
                     const nn::Matrix &beta);

// Two-layer fully connected network h mapping the speaker embedding to the
// concatenated (alpha, beta) vector: E -> hidden -> 2 * sum(C_b).  The final
// layer starts at zero weights with offsets arranged so modulation begins at
// the identity (alpha=1, beta=0) in free mode.  Frozen modes pin alpha or
// beta to their identity constants and pass no gradient back.
class FilmGenerator {
 public:
  FilmGenerator(int embedding_dim, int hidden_dim, std::vector<int> at_blocks,
                std::vector<int> block_channels, ScaleMode scale_mode,
                BiasMode bias_mode, uint64_t seed);

  FilmParams forward(const nn::Matrix &z);
  // dalpha/dbeta are parallel to at_blocks; writes gradients of h.
  void backward(const std::vector<nn::Matrix> &dalpha,
                const std::vector<nn::Matrix> &dbeta);

  int output_dim() const { return output_dim_; }
  const std::vector<int> &at_blocks() const { return at_blocks_; }
  std::vector<nn::Param *> parameters();

  nn::Linear fc1;
  nn::Linear fc2;

 private:
  std::vector<int> at_blocks_;
  std::vector<int> channels_;  // per conditioned stage
  ScaleMode scale_mode_;
  BiasMode bias_mode_;
  int output_dim_;
  nn::Matrix cached_hidden_pre_;  // fc1 output before the ReLU
  nn::Matrix cached_raw_;         // fc2 output before the scale activations
};

// Standard basic residual block: two 3x3 conv + BN with an identity or
// 1x1-projection shortcut, ReLU after the addition.
class BasicBlock {
 public:
  BasicBlock(const std::string &name, int in_ch, int out_ch, int stride,
             uint64_t seed);

  nn::Tensor4 forward(const nn::Tensor4 &x, nn::Mode mode);
  nn::Tensor4 backward(const nn::Tensor4 &dy);
  std::vector<nn::Param *> parameters();

 private:
  nn::Conv2d conv1_, conv2_;
  nn::BatchNorm2d bn1_, bn2_;
  std::unique_ptr<nn::Conv2d> proj_;
  std::unique_ptr<nn::BatchNorm2d> proj_bn_;
  nn::Relu relu1_, relu2_;
  bool identity_shortcut_;
};

// ResNet acoustic model over single-channel context windows, with optional
// speaker conditioning:
//  - kAffine: an AT layer on each conditioned stage's output feature map,
//    driven by the FiLM generator;
//  - kInputBias: a learned projection of z added per-channel to the first
//    hidden layer's feature map (stem output);
//  - kMiddleFusion: the same injection after stage 2;
//  - kNone: the unconditioned baseline.
class AcousticModel {
 public:
  AcousticModel(const ModelConfig &mc, const ConditioningConfig &cc,
                uint64_t seed);

  // z: B x E speaker embeddings; required iff fusion != none (nullable).
  nn::Matrix forward(const nn::Tensor4 &x, const nn::Matrix *z, nn::Mode mode);
  void backward(const nn::Matrix &dlogits);

  std::vector<nn::Param *> parameters();
  const ModelConfig &config() const { return model_config_; }
  const ConditioningConfig &conditioning() const { return cond_config_; }
  int generator_output_dim() const;
  FilmGenerator *generator() { return generator_.get(); }
  const FilmParams &last_film_params() const { return film_; }
  // Pre-AT stage outputs cached by the last forward, parallel to at_blocks.
  const std::vector<nn::Tensor4> &last_at_inputs() const { return at_inputs_; }

 private:
  ModelConfig model_config_;
  ConditioningConfig cond_config_;

  nn::Conv2d stem_conv_;
  nn::BatchNorm2d stem_bn_;
  nn::Relu stem_relu_;
  std::vector<std::vector<BasicBlock>> stages_;
  nn::GlobalAvgPool pool_;
  nn::Linear classifier_;

  std::unique_ptr<FilmGenerator> generator_;
  std::unique_ptr<nn::Linear> fusion_proj_;  // input-bias / middle-fusion map

  // Forward caches for the conditioning paths.
  FilmParams film_;
  std::vector<nn::Tensor4> at_inputs_;  // pre-AT stage outputs, per at_block
  int fusion_h_ = 0, fusion_w_ = 0;     // spatial dims at the injection point
  bool forward_done_ = false;
};

}  // namespace tsasr

#endif  // TSASR_MODEL_H_
