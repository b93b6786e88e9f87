// include/tsasr/layers.h

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

#ifndef TSASR_LAYERS_H_
#define TSASR_LAYERS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tsasr/tensor.h"

namespace tsasr {
namespace nn {

enum class Mode { kTrain, kEval };

// Layers cache whatever their backward pass needs during forward; calling
// backward without a preceding forward is a StateError.  Gradients are
// written (not accumulated) on every backward call.
//
// Parameter initialization is derived from (seed, layer name), so a layer
// with the same name and shape gets identical weights in any model that
// contains it.

// Cross-correlation with zero padding.  Weight shape [out_ch, in_ch, k, k];
// He-normal init, zero bias.
class Conv2d {
 public:
  Conv2d(std::string name, int in_ch, int out_ch, int ksize, int stride,
         int pad, bool with_bias, uint64_t seed);

  Tensor4 forward(const Tensor4 &x);
  Tensor4 backward(const Tensor4 &dy);

  int out_height(int in_h) const { return (in_h + 2 * pad_ - ksize_) / stride_ + 1; }
  int out_width(int in_w) const { return (in_w + 2 * pad_ - ksize_) / stride_ + 1; }

  std::vector<Param *> parameters();

  Param weight;
  Param bias;  // empty when constructed without bias

 private:
  std::string name_;
  int in_ch_, out_ch_, ksize_, stride_, pad_;
  bool with_bias_;
  Tensor4 cached_input_;
};

// Per-channel batch normalization, epsilon 1e-5, running-stat momentum 0.1.
// Train mode needs B*H*W >= 2 per channel; eval mode before any train-mode
// forward is a StateError.
class BatchNorm2d {
 public:
  BatchNorm2d(std::string name, int channels);

  Tensor4 forward(const Tensor4 &x, Mode mode);
  Tensor4 backward(const Tensor4 &dy);

  std::vector<Param *> parameters();

  Param gain;   // learned scale, init 1
  Param shift;  // learned shift, init 0
  const std::vector<double> &running_mean() const { return running_mean_; }
  const std::vector<double> &running_var() const { return running_var_; }
  void set_running_stats(std::vector<double> mean, std::vector<double> var);
  bool has_stats() const { return stats_initialized_; }

  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.1;

 private:
  std::string name_;
  int channels_;
  std::vector<double> running_mean_, running_var_;
  bool stats_initialized_ = false;

  Mode cached_mode_ = Mode::kTrain;
  Tensor4 cached_xhat_;
  std::vector<double> cached_mean_, cached_inv_std_;
};

class Relu {
 public:
  Tensor4 forward(const Tensor4 &x);
  Tensor4 backward(const Tensor4 &dy);

 private:
  Tensor4 cached_input_;
};

// B x C x H x W -> B x C mean over the spatial dims.
class GlobalAvgPool {
 public:
  Matrix forward(const Tensor4 &x);
  Tensor4 backward(const Matrix &dy);

 private:
  int cached_b_ = 0, cached_c_ = 0, cached_h_ = 0, cached_w_ = 0;
};

// y = x W^T + b on row-major batches.  Weight shape [out, in].
class Linear {
 public:
  Linear(std::string name, int in_dim, int out_dim, uint64_t seed);

  Matrix forward(const Matrix &x);
  Matrix backward(const Matrix &dy);

  std::vector<Param *> parameters();
  void init_zero_weights();  // used by the identity-start FiLM generator

  Param weight;
  Param bias;

 private:
  std::string name_;
  int in_dim_, out_dim_;
  Matrix cached_input_;
};

struct XentResult {
  double loss = 0.0;  // mean over the batch of -log softmax(logits)[label]
  Matrix grad;        // d loss / d logits, rows sum to zero
};

// Throws DataError when a label is outside [0, K).
XentResult softmax_cross_entropy(const Matrix &logits,
                                 const std::vector<int> &labels);

// Row-wise softmax probabilities (eval-time scoring).
Matrix softmax(const Matrix &logits);

}  // namespace nn
}  // namespace tsasr

#endif  // TSASR_LAYERS_H_
