// src/model.cc

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

#include "tsasr/model.h"

#include <algorithm>
#include <cmath>

#include "tsasr/errors.h"

namespace tsasr {

using nn::Matrix;
using nn::Mode;
using nn::Param;
using nn::Tensor4;

// ---------------------------------------------------------------------------
// Configs

void ModelConfig::validate() const {
  for (int c : stage_channels)
    if (c < 1) throw ConfigError("ModelConfig: stage channels must be >= 1");
  if (blocks_per_stage < 1)
    throw ConfigError("ModelConfig: blocks_per_stage must be >= 1");
  if (num_classes < 2) throw ConfigError("ModelConfig: num_classes must be >= 2");
  if (input_height < 1 || input_width < 1)
    throw ConfigError("ModelConfig: invalid input shape");
  if (embedding_dim < 1)
    throw ConfigError("ModelConfig: embedding_dim must be >= 1");
}

void ConditioningConfig::validate() const {
  if (generator_hidden < 1)
    throw ConfigError("ConditioningConfig: generator_hidden must be >= 1");
  std::vector<int> sorted = at_blocks;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] < 1 || sorted[i] > 4)
      throw ConfigError("ConditioningConfig: at_blocks entries must be in 1..4");
    if (i > 0 && sorted[i] == sorted[i - 1])
      throw ConfigError("ConditioningConfig: duplicate at_blocks entry");
  }
  if (fusion == FusionMode::kNone && !at_blocks.empty())
    throw ConfigError("ConditioningConfig: fusion=none requires empty at_blocks");
  if (fusion == FusionMode::kAffine && at_blocks.empty())
    throw ConfigError("ConditioningConfig: fusion=affine requires at_blocks");
}

const char *to_string(FusionMode m) {
  switch (m) {
    case FusionMode::kNone: return "none";
    case FusionMode::kAffine: return "affine";
    case FusionMode::kInputBias: return "input_bias";
    case FusionMode::kMiddleFusion: return "middle_fusion";
  }
  return "?";
}

const char *to_string(ScaleMode m) {
  switch (m) {
    case ScaleMode::kFree: return "free";
    case ScaleMode::kFrozenOne: return "frozen_one";
    case ScaleMode::kSigmoid: return "sigmoid";
    case ScaleMode::kTanh: return "tanh";
  }
  return "?";
}

const char *to_string(BiasMode m) {
  return m == BiasMode::kFree ? "free" : "frozen_zero";
}

FusionMode fusion_from_string(const std::string &s) {
  if (s == "none") return FusionMode::kNone;
  if (s == "affine") return FusionMode::kAffine;
  if (s == "input_bias") return FusionMode::kInputBias;
  if (s == "middle_fusion") return FusionMode::kMiddleFusion;
  throw ConfigError("unknown fusion mode: '" + s + "'");
}

ScaleMode scale_mode_from_string(const std::string &s) {
  if (s == "free") return ScaleMode::kFree;
  if (s == "frozen_one") return ScaleMode::kFrozenOne;
  if (s == "sigmoid") return ScaleMode::kSigmoid;
  if (s == "tanh") return ScaleMode::kTanh;
  throw ConfigError("unknown scale mode: '" + s + "'");
}

BiasMode bias_mode_from_string(const std::string &s) {
  if (s == "free") return BiasMode::kFree;
  if (s == "frozen_zero") return BiasMode::kFrozenZero;
  throw ConfigError("unknown bias mode: '" + s + "'");
}

// ---------------------------------------------------------------------------
// AT layer

Tensor4 apply_at(const Tensor4 &f, const Matrix &alpha, const Matrix &beta) {
  if (alpha.rows != f.b || alpha.cols != f.c || !alpha.same_shape(beta))
    throw ShapeError("apply_at: modulation shape " + alpha.shape_str() +
                     " does not match feature map " + f.shape_str());
  Tensor4 out(f.b, f.c, f.h, f.w);
  const int plane = f.h * f.w;
  for (int i = 0; i < f.b; ++i)
    for (int c = 0; c < f.c; ++c) {
      const double a = alpha.at(i, c), b = beta.at(i, c);
      const double *src = f.data.data() + f.index(i, c, 0, 0);
      double *dst = out.data.data() + out.index(i, c, 0, 0);
      for (int j = 0; j < plane; ++j) dst[j] = a * src[j] + b;
    }
  return out;
}

// ---------------------------------------------------------------------------
// FiLM generator

FilmGenerator::FilmGenerator(int embedding_dim, int hidden_dim,
                             std::vector<int> at_blocks,
                             std::vector<int> block_channels,
                             ScaleMode scale_mode, BiasMode bias_mode,
                             uint64_t seed)
    : fc1("generator.fc1", embedding_dim, hidden_dim, seed),
      fc2("generator.fc2", hidden_dim, [&] {
            int total = 0;
            for (int c : block_channels) total += 2 * c;
            return total;
          }(),
          seed),
      at_blocks_(std::move(at_blocks)),
      channels_(std::move(block_channels)),
      scale_mode_(scale_mode),
      bias_mode_(bias_mode) {
  if (at_blocks_.size() != channels_.size() || at_blocks_.empty())
    throw ConfigError("FilmGenerator: at_blocks/channels mismatch");
  output_dim_ = 0;
  for (int c : channels_) output_dim_ += 2 * c;

  // Identity start: zero final weights; in free mode the alpha offsets sit in
  // the bias so modulation begins as a no-op.
  fc2.init_zero_weights();
  if (scale_mode_ == ScaleMode::kFree) {
    int offset = 0;
    for (int c : channels_) {
      for (int j = 0; j < c; ++j) fc2.bias.value[offset + j] = 1.0;
      offset += 2 * c;
    }
  }
}

std::vector<Param *> FilmGenerator::parameters() {
  std::vector<Param *> out;
  for (Param *p : fc1.parameters()) out.push_back(p);
  for (Param *p : fc2.parameters()) out.push_back(p);
  return out;
}

FilmParams FilmGenerator::forward(const Matrix &z) {
  cached_hidden_pre_ = fc1.forward(z);
  Matrix hidden(cached_hidden_pre_.rows, cached_hidden_pre_.cols);
  for (size_t i = 0; i < hidden.size(); ++i)
    hidden.data[i] = std::max(cached_hidden_pre_.data[i], 0.0);
  cached_raw_ = fc2.forward(hidden);

  FilmParams film;
  const int batch = z.rows;
  int offset = 0;
  for (int c : channels_) {
    Matrix alpha(batch, c), beta(batch, c);
    for (int i = 0; i < batch; ++i) {
      const double *raw = cached_raw_.row(i) + offset;
      for (int j = 0; j < c; ++j) {
        switch (scale_mode_) {
          case ScaleMode::kFree: alpha.at(i, j) = raw[j]; break;
          case ScaleMode::kFrozenOne: alpha.at(i, j) = 1.0; break;
          case ScaleMode::kSigmoid:
            alpha.at(i, j) = 1.0 / (1.0 + std::exp(-raw[j]));
            break;
          case ScaleMode::kTanh: alpha.at(i, j) = std::tanh(raw[j]); break;
        }
        beta.at(i, j) =
            bias_mode_ == BiasMode::kFrozenZero ? 0.0 : raw[c + j];
      }
    }
    film.alpha.push_back(std::move(alpha));
    film.beta.push_back(std::move(beta));
    offset += 2 * c;
  }
  return film;
}

void FilmGenerator::backward(const std::vector<Matrix> &dalpha,
                             const std::vector<Matrix> &dbeta) {
  if (cached_raw_.empty())
    throw StateError("FilmGenerator: backward before forward");
  if (dalpha.size() != channels_.size() || dbeta.size() != channels_.size())
    throw ShapeError("FilmGenerator: per-stage gradient count mismatch");

  const int batch = cached_raw_.rows;
  Matrix draw(batch, output_dim_);
  int offset = 0;
  for (size_t s = 0; s < channels_.size(); ++s) {
    const int c = channels_[s];
    for (int i = 0; i < batch; ++i) {
      const double *raw = cached_raw_.row(i) + offset;
      double *out = draw.row(i) + offset;
      for (int j = 0; j < c; ++j) {
        switch (scale_mode_) {
          case ScaleMode::kFree: out[j] = dalpha[s].at(i, j); break;
          case ScaleMode::kFrozenOne: out[j] = 0.0; break;
          case ScaleMode::kSigmoid: {
            const double sig = 1.0 / (1.0 + std::exp(-raw[j]));
            out[j] = dalpha[s].at(i, j) * sig * (1.0 - sig);
            break;
          }
          case ScaleMode::kTanh: {
            const double th = std::tanh(raw[j]);
            out[j] = dalpha[s].at(i, j) * (1.0 - th * th);
            break;
          }
        }
        out[c + j] =
            bias_mode_ == BiasMode::kFrozenZero ? 0.0 : dbeta[s].at(i, j);
      }
    }
    offset += 2 * c;
  }

  Matrix dhidden = fc2.backward(draw);
  for (size_t i = 0; i < dhidden.size(); ++i)
    if (cached_hidden_pre_.data[i] <= 0.0) dhidden.data[i] = 0.0;
  fc1.backward(dhidden);  // gradient w.r.t. z is discarded
}

// ---------------------------------------------------------------------------
// BasicBlock

BasicBlock::BasicBlock(const std::string &name, int in_ch, int out_ch,
                       int stride, uint64_t seed)
    : conv1_(name + ".conv1", in_ch, out_ch, 3, stride, 1, false, seed),
      conv2_(name + ".conv2", out_ch, out_ch, 3, 1, 1, false, seed),
      bn1_(name + ".bn1", out_ch),
      bn2_(name + ".bn2", out_ch),
      identity_shortcut_(stride == 1 && in_ch == out_ch) {
  if (!identity_shortcut_) {
    proj_ = std::make_unique<nn::Conv2d>(name + ".proj", in_ch, out_ch, 1,
                                         stride, 0, false, seed);
    proj_bn_ = std::make_unique<nn::BatchNorm2d>(name + ".proj_bn", out_ch);
  }
}

std::vector<Param *> BasicBlock::parameters() {
  std::vector<Param *> out;
  auto add = [&out](std::vector<Param *> ps) {
    out.insert(out.end(), ps.begin(), ps.end());
  };
  add(conv1_.parameters());
  add(bn1_.parameters());
  add(conv2_.parameters());
  add(bn2_.parameters());
  if (proj_) {
    add(proj_->parameters());
    add(proj_bn_->parameters());
  }
  return out;
}

Tensor4 BasicBlock::forward(const Tensor4 &x, Mode mode) {
  Tensor4 t = relu1_.forward(bn1_.forward(conv1_.forward(x), mode));
  t = bn2_.forward(conv2_.forward(t), mode);
  Tensor4 shortcut =
      identity_shortcut_ ? x : proj_bn_->forward(proj_->forward(x), mode);
  if (!t.same_shape(shortcut))
    throw ShapeError("BasicBlock: branch shape mismatch " + t.shape_str() +
                     " vs " + shortcut.shape_str());
  for (size_t i = 0; i < t.size(); ++i) t.data[i] += shortcut.data[i];
  return relu2_.forward(t);
}

Tensor4 BasicBlock::backward(const Tensor4 &dy) {
  Tensor4 dsum = relu2_.backward(dy);
  Tensor4 dmain = conv1_.backward(
      bn1_.backward(relu1_.backward(conv2_.backward(bn2_.backward(dsum)))));
  Tensor4 dshort = identity_shortcut_
                       ? dsum
                       : proj_->backward(proj_bn_->backward(dsum));
  for (size_t i = 0; i < dmain.size(); ++i) dmain.data[i] += dshort.data[i];
  return dmain;
}

// ---------------------------------------------------------------------------
// AcousticModel

AcousticModel::AcousticModel(const ModelConfig &mc, const ConditioningConfig &cc,
                             uint64_t seed)
    : model_config_(mc),
      cond_config_(cc),
      stem_conv_("stem.conv", 1, mc.stage_channels[0], 3, 1, 1, false, seed),
      stem_bn_("stem.bn", mc.stage_channels[0]),
      classifier_("classifier", mc.stage_channels[3], mc.num_classes, seed) {
  mc.validate();
  cc.validate();

  for (int s = 0; s < 4; ++s) {
    const int in_ch = s == 0 ? mc.stage_channels[0] : mc.stage_channels[s - 1];
    const int out_ch = mc.stage_channels[s];
    const int entry_stride = s == 0 ? 1 : 2;
    std::vector<BasicBlock> blocks;
    for (int b = 0; b < mc.blocks_per_stage; ++b) {
      const std::string name = "stage" + std::to_string(s + 1) + ".block" +
                               std::to_string(b + 1);
      blocks.emplace_back(name, b == 0 ? in_ch : out_ch, out_ch,
                          b == 0 ? entry_stride : 1, seed);
    }
    stages_.push_back(std::move(blocks));
  }

  if (cc.fusion == FusionMode::kAffine) {
    std::vector<int> at_sorted = cc.at_blocks;
    std::sort(at_sorted.begin(), at_sorted.end());
    std::vector<int> at_channels;
    for (int b : at_sorted) at_channels.push_back(mc.stage_channels[b - 1]);
    generator_ = std::make_unique<FilmGenerator>(
        mc.embedding_dim, cc.generator_hidden, at_sorted, at_channels,
        cc.scale_mode, cc.bias_mode, seed);
  } else if (cc.fusion == FusionMode::kInputBias) {
    fusion_proj_ = std::make_unique<nn::Linear>(
        "fusion.input_bias", mc.embedding_dim, mc.stage_channels[0], seed);
  } else if (cc.fusion == FusionMode::kMiddleFusion) {
    fusion_proj_ = std::make_unique<nn::Linear>(
        "fusion.middle", mc.embedding_dim, mc.stage_channels[1], seed);
  }
}

std::vector<Param *> AcousticModel::parameters() {
  std::vector<Param *> out;
  auto add = [&out](std::vector<Param *> ps) {
    out.insert(out.end(), ps.begin(), ps.end());
  };
  add(stem_conv_.parameters());
  add(stem_bn_.parameters());
  for (auto &stage : stages_)
    for (auto &block : stage) add(block.parameters());
  add(classifier_.parameters());
  if (generator_) add(generator_->parameters());
  if (fusion_proj_) add(fusion_proj_->parameters());
  return out;
}

int AcousticModel::generator_output_dim() const {
  return generator_ ? generator_->output_dim() : 0;
}

Matrix AcousticModel::forward(const Tensor4 &x, const Matrix *z, Mode mode) {
  if (x.c != 1 || x.h != model_config_.input_height ||
      x.w != model_config_.input_width)
    throw ShapeError("AcousticModel: input shape " + x.shape_str() +
                     " does not match configured 1x" +
                     std::to_string(model_config_.input_height) + "x" +
                     std::to_string(model_config_.input_width));
  const bool needs_z = cond_config_.fusion != FusionMode::kNone;
  if (needs_z) {
    if (z == nullptr)
      throw ConfigError("AcousticModel: fusion mode '" +
                        std::string(to_string(cond_config_.fusion)) +
                        "' requires speaker embeddings");
    if (z->rows != x.b || z->cols != model_config_.embedding_dim)
      throw ShapeError("AcousticModel: embedding batch shape " +
                       z->shape_str() + " mismatch");
  }

  if (generator_) film_ = generator_->forward(*z);
  at_inputs_.clear();

  Tensor4 t = stem_relu_.forward(stem_bn_.forward(stem_conv_.forward(x), mode));
  if (cond_config_.fusion == FusionMode::kInputBias) {
    Matrix bias = fusion_proj_->forward(*z);
    fusion_h_ = t.h;
    fusion_w_ = t.w;
    for (int i = 0; i < t.b; ++i)
      for (int c = 0; c < t.c; ++c) {
        double *row = t.data.data() + t.index(i, c, 0, 0);
        const double v = bias.at(i, c);
        for (int j = 0; j < t.h * t.w; ++j) row[j] += v;
      }
  }

  static const std::vector<int> kNoBlocks;
  const std::vector<int> &at_blocks =
      generator_ ? generator_->at_blocks() : kNoBlocks;
  for (int s = 0; s < 4; ++s) {
    for (auto &block : stages_[s]) t = block.forward(t, mode);
    if (generator_) {
      auto it = std::find(at_blocks.begin(), at_blocks.end(), s + 1);
      if (it != at_blocks.end()) {
        const size_t idx = static_cast<size_t>(it - at_blocks.begin());
        at_inputs_.push_back(t);
        t = apply_at(t, film_.alpha[idx], film_.beta[idx]);
      }
    }
    if (cond_config_.fusion == FusionMode::kMiddleFusion && s == 1) {
      Matrix bias = fusion_proj_->forward(*z);
      fusion_h_ = t.h;
      fusion_w_ = t.w;
      for (int i = 0; i < t.b; ++i)
        for (int c = 0; c < t.c; ++c) {
          double *row = t.data.data() + t.index(i, c, 0, 0);
          const double v = bias.at(i, c);
          for (int j = 0; j < t.h * t.w; ++j) row[j] += v;
        }
    }
  }

  Matrix logits = classifier_.forward(pool_.forward(t));
  nn::check_finite(logits, "AcousticModel logits");
  forward_done_ = true;
  return logits;
}

namespace {
// Per-(sample, channel) spatial sum of a gradient tensor.
Matrix spatial_sums(const Tensor4 &t) {
  Matrix out(t.b, t.c);
  const int plane = t.h * t.w;
  for (int i = 0; i < t.b; ++i)
    for (int c = 0; c < t.c; ++c) {
      const double *row = t.data.data() + t.index(i, c, 0, 0);
      double acc = 0.0;
      for (int j = 0; j < plane; ++j) acc += row[j];
      out.at(i, c) = acc;
    }
  return out;
}
}  // namespace

void AcousticModel::backward(const Matrix &dlogits) {
  if (!forward_done_)
    throw StateError("AcousticModel: backward before forward");
  forward_done_ = false;

  Tensor4 dt = pool_.backward(classifier_.backward(dlogits));

  static const std::vector<int> kNoBlocks;
  const std::vector<int> &at_blocks =
      generator_ ? generator_->at_blocks() : kNoBlocks;
  std::vector<Matrix> dalpha(at_blocks.size()), dbeta(at_blocks.size());

  for (int s = 3; s >= 0; --s) {
    if (cond_config_.fusion == FusionMode::kMiddleFusion && s == 1)
      fusion_proj_->backward(spatial_sums(dt));  // additive bias: dt unchanged
    if (generator_) {
      auto it = std::find(at_blocks.begin(), at_blocks.end(), s + 1);
      if (it != at_blocks.end()) {
        const size_t idx = static_cast<size_t>(it - at_blocks.begin());
        const Tensor4 &f = at_inputs_[idx];
        const Matrix &alpha = film_.alpha[idx];
        dalpha[idx] = Matrix(dt.b, dt.c);
        dbeta[idx] = Matrix(dt.b, dt.c);
        const int plane = dt.h * dt.w;
        for (int i = 0; i < dt.b; ++i)
          for (int c = 0; c < dt.c; ++c) {
            const double *grow = dt.data.data() + dt.index(i, c, 0, 0);
            const double *frow = f.data.data() + f.index(i, c, 0, 0);
            double da = 0.0, db = 0.0;
            for (int j = 0; j < plane; ++j) {
              da += grow[j] * frow[j];
              db += grow[j];
            }
            dalpha[idx].at(i, c) = da;
            dbeta[idx].at(i, c) = db;
            double *mrow = dt.data.data() + dt.index(i, c, 0, 0);
            const double a = alpha.at(i, c);
            for (int j = 0; j < plane; ++j) mrow[j] = a * mrow[j];
          }
      }
    }
    for (int b = static_cast<int>(stages_[s].size()) - 1; b >= 0; --b)
      dt = stages_[s][b].backward(dt);
  }

  if (cond_config_.fusion == FusionMode::kInputBias)
    fusion_proj_->backward(spatial_sums(dt));
  stem_conv_.backward(stem_bn_.backward(stem_relu_.backward(dt)));

  if (generator_) generator_->backward(dalpha, dbeta);
}

}  // namespace tsasr
