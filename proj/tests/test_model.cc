// tests/test_model.cc

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

#include <cmath>

#include <gtest/gtest.h>

#include "tsasr/errors.h"
#include "tsasr/gradcheck.h"
#include "tsasr/rng.h"

namespace tsasr {
namespace {

using nn::Matrix;
using nn::Mode;
using nn::Tensor4;

ModelConfig small_model(int num_classes = 5, int embedding_dim = 16) {
  ModelConfig mc;
  mc.stage_channels = {4, 4, 8, 8};
  mc.num_classes = num_classes;
  mc.input_height = 9;
  mc.input_width = 13;
  mc.embedding_dim = embedding_dim;
  return mc;
}

ConditioningConfig affine_all(int hidden = 8) {
  ConditioningConfig cc;
  cc.fusion = FusionMode::kAffine;
  cc.at_blocks = {1, 2, 3, 4};
  cc.generator_hidden = hidden;
  return cc;
}

Tensor4 random_input(const ModelConfig &mc, int batch, uint64_t seed) {
  Tensor4 x(batch, 1, mc.input_height, mc.input_width);
  Gaussian gauss(seed);
  for (auto &v : x.data) v = gauss.sample();
  return x;
}

Matrix random_embeddings(int batch, int dim, uint64_t seed) {
  Matrix z(batch, dim);
  Gaussian gauss(seed);
  for (auto &v : z.data) v = gauss.sample();
  // unit rows
  for (int i = 0; i < batch; ++i) {
    double norm = 0.0;
    for (int j = 0; j < dim; ++j) norm += z.at(i, j) * z.at(i, j);
    norm = std::sqrt(norm);
    for (int j = 0; j < dim; ++j) z.at(i, j) /= norm;
  }
  return z;
}

void randomize_generator(AcousticModel &model, uint64_t seed, double scale = 0.3) {
  ASSERT_NE(model.generator(), nullptr);
  Gaussian gauss(seed);
  for (auto &v : model.generator()->fc2.weight.value)
    v = gauss.sample(0.0, scale);
}

double max_abs_diff(const Matrix &a, const Matrix &b) {
  double mx = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    mx = std::max(mx, std::fabs(a.data[i] - b.data[i]));
  return mx;
}

// ---------------------------------------------------------------------------
// Generator geometry and activations

TEST(GeneratorTest, PaperWidthsEmit1920) {
  ModelConfig mc;  // defaults: 64,128,256,512, E=512
  ConditioningConfig cc = affine_all(512);
  AcousticModel model(mc, cc, 0);
  EXPECT_EQ(model.generator_output_dim(), 1920);
}

TEST(GeneratorTest, DeskWidthsEmit240) {
  ModelConfig mc;
  mc.stage_channels = {8, 16, 32, 64};
  mc.embedding_dim = 32;
  ConditioningConfig cc = affine_all(64);
  AcousticModel model(mc, cc, 0);
  EXPECT_EQ(model.generator_output_dim(), 240);
}

TEST(GeneratorTest, Block1OnlyEmits128) {
  ModelConfig mc;  // default widths
  ConditioningConfig cc;
  cc.fusion = FusionMode::kAffine;
  cc.at_blocks = {1};
  AcousticModel model(mc, cc, 0);
  EXPECT_EQ(model.generator_output_dim(), 128);
}

TEST(GeneratorTest, IdentityStart) {
  // Zero-initialized final layer with free-mode offsets: alpha=1, beta=0 for
  // every embedding.
  FilmGenerator gen(16, 8, {1, 2, 3, 4}, {4, 4, 8, 8}, ScaleMode::kFree,
                    BiasMode::kFree, 3);
  Matrix z = random_embeddings(5, 16, 10);
  FilmParams film = gen.forward(z);
  for (size_t s = 0; s < film.alpha.size(); ++s)
    for (size_t i = 0; i < film.alpha[s].size(); ++i) {
      EXPECT_EQ(film.alpha[s].data[i], 1.0);
      EXPECT_EQ(film.beta[s].data[i], 0.0);
    }
}

TEST(GeneratorTest, SigmoidScaleRange) {
  FilmGenerator gen(16, 8, {1, 2}, {4, 8}, ScaleMode::kSigmoid, BiasMode::kFree, 4);
  Gaussian gauss(11);
  for (auto &v : gen.fc2.weight.value) v = gauss.sample();
  Matrix z = random_embeddings(64, 16, 12);
  FilmParams film = gen.forward(z);
  for (const auto &alpha : film.alpha)
    for (double a : alpha.data) {
      EXPECT_GT(a, 0.0);
      EXPECT_LT(a, 1.0);
    }
}

TEST(GeneratorTest, TanhScaleRange) {
  FilmGenerator gen(16, 8, {1, 2}, {4, 8}, ScaleMode::kTanh, BiasMode::kFree, 5);
  Gaussian gauss(13);
  for (auto &v : gen.fc2.weight.value) v = gauss.sample(0.0, 3.0);
  Matrix z = random_embeddings(64, 16, 14);
  FilmParams film = gen.forward(z);
  for (const auto &alpha : film.alpha)
    for (double a : alpha.data) {
      EXPECT_GT(a, -1.0);
      EXPECT_LT(a, 1.0);
    }
}

// ---------------------------------------------------------------------------
// AT layer semantics

TEST(ApplyAtTest, IdentityModulation) {
  Tensor4 f = random_input(small_model(), 3, 20);
  Matrix alpha(3, 1), beta(3, 1);
  for (auto &v : alpha.data) v = 1.0;
  Tensor4 out = apply_at(f, alpha, beta);
  for (size_t i = 0; i < f.size(); ++i) EXPECT_EQ(out.data[i], f.data[i]);
}

TEST(ApplyAtTest, DefinitionArithmetic) {
  Tensor4 f(1, 2, 1, 2);
  f.at(0, 0, 0, 0) = 1.0;
  f.at(0, 0, 0, 1) = 2.0;
  f.at(0, 1, 0, 0) = 3.0;
  f.at(0, 1, 0, 1) = 4.0;
  Matrix alpha(1, 2), beta(1, 2);
  alpha.at(0, 0) = 2.0;
  alpha.at(0, 1) = 0.5;
  beta.at(0, 0) = 1.0;
  beta.at(0, 1) = 0.0;
  Tensor4 out = apply_at(f, alpha, beta);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 0, 0), 3.0);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 0, 1), 5.0);
  EXPECT_DOUBLE_EQ(out.at(0, 1, 0, 0), 1.5);
  EXPECT_DOUBLE_EQ(out.at(0, 1, 0, 1), 2.0);
}

TEST(ApplyAtTest, ChannelPermutationEquivariance) {
  const int C = 5;
  Tensor4 f = [&] {
    Tensor4 t(2, C, 3, 3);
    Gaussian gauss(21);
    for (auto &v : t.data) v = gauss.sample();
    return t;
  }();
  Matrix alpha(2, C), beta(2, C);
  Gaussian gauss(22);
  for (auto &v : alpha.data) v = gauss.sample();
  for (auto &v : beta.data) v = gauss.sample();
  Tensor4 base = apply_at(f, alpha, beta);

  std::vector<int> perm{3, 0, 4, 1, 2};
  Tensor4 fp(2, C, 3, 3);
  Matrix ap(2, C), bp(2, C);
  for (int i = 0; i < 2; ++i)
    for (int c = 0; c < C; ++c) {
      ap.at(i, c) = alpha.at(i, perm[c]);
      bp.at(i, c) = beta.at(i, perm[c]);
      for (int j = 0; j < 9; ++j)
        fp.data[fp.index(i, c, 0, 0) + j] = f.data[f.index(i, perm[c], 0, 0) + j];
    }
  Tensor4 permuted = apply_at(fp, ap, bp);
  for (int i = 0; i < 2; ++i)
    for (int c = 0; c < C; ++c)
      for (int j = 0; j < 9; ++j)
        EXPECT_EQ(permuted.data[permuted.index(i, c, 0, 0) + j],
                  base.data[base.index(i, perm[c], 0, 0) + j]);
}

TEST(ApplyAtTest, ShapeMismatchIsError) {
  Tensor4 f(2, 3, 2, 2);
  Matrix alpha(2, 4), beta(2, 4);
  EXPECT_THROW(apply_at(f, alpha, beta), ShapeError);
}

// ---------------------------------------------------------------------------
// Conditioning configurations

TEST(ConditioningConfigTest, Validation) {
  ConditioningConfig cc;
  cc.fusion = FusionMode::kNone;
  cc.at_blocks = {1};
  EXPECT_THROW(cc.validate(), ConfigError);
  cc.fusion = FusionMode::kAffine;
  cc.at_blocks = {};
  EXPECT_THROW(cc.validate(), ConfigError);
  cc.at_blocks = {1, 1};
  EXPECT_THROW(cc.validate(), ConfigError);
  cc.at_blocks = {0};
  EXPECT_THROW(cc.validate(), ConfigError);
  cc.at_blocks = {2, 4};
  EXPECT_NO_THROW(cc.validate());
}

TEST(ModelTest, MissingEmbeddingsIsError) {
  ModelConfig mc = small_model();
  AcousticModel model(mc, affine_all(), 1);
  Tensor4 x = random_input(mc, 2, 30);
  EXPECT_THROW(model.forward(x, nullptr, Mode::kTrain), ConfigError);
}

TEST(ModelTest, BackwardBeforeForwardIsError) {
  ModelConfig mc = small_model();
  ConditioningConfig cc;  // baseline
  AcousticModel model(mc, cc, 1);
  Matrix dlogits(2, mc.num_classes);
  EXPECT_THROW(model.backward(dlogits), StateError);
}

TEST(ModelTest, IdentityConditioningEqualsBaseline) {
  ModelConfig mc = small_model();
  ConditioningConfig baseline_cc;  // none
  ConditioningConfig frozen_cc = affine_all();
  frozen_cc.scale_mode = ScaleMode::kFrozenOne;
  frozen_cc.bias_mode = BiasMode::kFrozenZero;

  // Same seed: name-keyed init gives both models identical backbone weights.
  AcousticModel baseline(mc, baseline_cc, 7);
  AcousticModel frozen(mc, frozen_cc, 7);

  for (int trial = 0; trial < 5; ++trial) {
    Tensor4 x = random_input(mc, 4, 100 + trial);
    Matrix z = random_embeddings(4, mc.embedding_dim, 200 + trial);
    Matrix a = baseline.forward(x, nullptr, Mode::kTrain);
    Matrix b = frozen.forward(x, &z, Mode::kTrain);
    EXPECT_LT(max_abs_diff(a, b), 1e-6);
  }
}

TEST(ModelTest, FrozenConditioningHasZeroGeneratorGradient) {
  ModelConfig mc = small_model();
  ConditioningConfig cc = affine_all();
  cc.scale_mode = ScaleMode::kFrozenOne;
  cc.bias_mode = BiasMode::kFrozenZero;
  AcousticModel model(mc, cc, 3);
  randomize_generator(model, 17);  // non-zero weights still get zero gradient

  Tensor4 x = random_input(mc, 3, 40);
  Matrix z = random_embeddings(3, mc.embedding_dim, 41);
  Matrix logits = model.forward(x, &z, Mode::kTrain);
  Matrix dlogits(logits.rows, logits.cols);
  Gaussian gauss(42);
  for (auto &v : dlogits.data) v = gauss.sample();
  model.backward(dlogits);

  for (nn::Param *p : model.generator()->parameters())
    for (double g : p->grad) EXPECT_EQ(g, 0.0) << p->name;
}

TEST(ModelTest, EmbeddingSensitivity) {
  ModelConfig mc = small_model();

  // Affine with non-degenerate generator weights: z changes logits.
  AcousticModel at_model(mc, affine_all(), 5);
  randomize_generator(at_model, 55);
  Tensor4 x = random_input(mc, 2, 50);
  Matrix z1 = random_embeddings(2, mc.embedding_dim, 51);
  Matrix z2 = random_embeddings(2, mc.embedding_dim, 52);
  Matrix a = at_model.forward(x, &z1, Mode::kTrain);
  Matrix b = at_model.forward(x, &z2, Mode::kTrain);
  EXPECT_GT(max_abs_diff(a, b), 1e-8);

  // Baseline never reads z.
  ConditioningConfig none_cc;
  AcousticModel baseline(mc, none_cc, 5);
  Matrix c = baseline.forward(x, &z1, Mode::kTrain);
  Matrix d = baseline.forward(x, &z2, Mode::kTrain);
  EXPECT_EQ(max_abs_diff(c, d), 0.0);
}

TEST(ModelTest, FusionVariantsUseEmbedding) {
  ModelConfig mc = small_model();
  for (FusionMode fm : {FusionMode::kInputBias, FusionMode::kMiddleFusion}) {
    ConditioningConfig cc;
    cc.fusion = fm;
    AcousticModel model(mc, cc, 6);
    Tensor4 x = random_input(mc, 2, 60);
    Matrix z1 = random_embeddings(2, mc.embedding_dim, 61);
    Matrix z2 = random_embeddings(2, mc.embedding_dim, 62);
    Matrix a = model.forward(x, &z1, Mode::kTrain);
    Matrix b = model.forward(x, &z2, Mode::kTrain);
    EXPECT_GT(max_abs_diff(a, b), 1e-8) << to_string(fm);
  }
}

// ---------------------------------------------------------------------------
// Gradients

void check_full_model_gradients(const ConditioningConfig &cc, uint64_t seed,
                                bool randomize_gen) {
  ModelConfig mc = small_model(4, 12);
  AcousticModel model(mc, cc, seed);
  if (randomize_gen && model.generator()) randomize_generator(model, seed + 1);

  const bool needs_z = cc.fusion != FusionMode::kNone;
  Tensor4 x = random_input(mc, 2, seed + 2);
  Matrix z = random_embeddings(2, mc.embedding_dim, seed + 3);
  std::vector<int> labels{1, 3};

  auto loss_fn = [&]() {
    Matrix logits = model.forward(x, needs_z ? &z : nullptr, Mode::kTrain);
    return nn::softmax_cross_entropy(logits, labels).loss;
  };
  Matrix logits = model.forward(x, needs_z ? &z : nullptr, Mode::kTrain);
  auto xent = nn::softmax_cross_entropy(logits, labels);
  model.backward(xent.grad);

  auto report =
      nn::finite_diff_check(model.parameters(), loss_fn, 6, 1e-5, seed + 4);
  EXPECT_LT(report.max_rel_err, 1e-4) << report.worst_param;
}

TEST(ModelGradTest, AffineFullModel) {
  check_full_model_gradients(affine_all(), 70, true);
}

TEST(ModelGradTest, AffineSigmoidScale) {
  ConditioningConfig cc = affine_all();
  cc.scale_mode = ScaleMode::kSigmoid;
  check_full_model_gradients(cc, 71, true);
}

TEST(ModelGradTest, AffineTanhScale) {
  ConditioningConfig cc = affine_all();
  cc.scale_mode = ScaleMode::kTanh;
  check_full_model_gradients(cc, 72, true);
}

TEST(ModelGradTest, AffineScaleOnly) {
  ConditioningConfig cc = affine_all();
  cc.bias_mode = BiasMode::kFrozenZero;
  check_full_model_gradients(cc, 73, true);
}

TEST(ModelGradTest, AffineBiasOnly) {
  ConditioningConfig cc = affine_all();
  cc.scale_mode = ScaleMode::kFrozenOne;
  check_full_model_gradients(cc, 74, true);
}

TEST(ModelGradTest, Baseline) {
  ConditioningConfig cc;
  check_full_model_gradients(cc, 75, false);
}

TEST(ModelGradTest, InputBias) {
  ConditioningConfig cc;
  cc.fusion = FusionMode::kInputBias;
  check_full_model_gradients(cc, 76, false);
}

TEST(ModelGradTest, MiddleFusion) {
  ConditioningConfig cc;
  cc.fusion = FusionMode::kMiddleFusion;
  check_full_model_gradients(cc, 77, false);
}

TEST(ModelGradTest, AlphaGradientIsSpatialSumOfUpstreamTimesFeature) {
  // AT only on block 4, batch of 1: the generator's fc2 alpha-slot bias
  // gradient equals dalpha, which must equal sum_{h,w} F * upstream where
  // upstream comes from the classifier through the average pool.
  ModelConfig mc = small_model(4, 12);
  ConditioningConfig cc;
  cc.fusion = FusionMode::kAffine;
  cc.at_blocks = {4};
  cc.generator_hidden = 8;
  AcousticModel model(mc, cc, 80);
  randomize_generator(model, 81);

  Tensor4 x = random_input(mc, 1, 82);
  Matrix z = random_embeddings(1, mc.embedding_dim, 83);
  Matrix logits = model.forward(x, &z, Mode::kTrain);
  Matrix dlogits(1, mc.num_classes);
  Gaussian gauss(84);
  for (auto &v : dlogits.data) v = gauss.sample();

  const Tensor4 f = model.last_at_inputs().at(0);
  model.backward(dlogits);

  // Upstream of the AT output: classifier weight combination spread evenly
  // by the average pool.
  const nn::Param *w = nullptr;
  for (nn::Param *p : model.parameters())
    if (p->name == "classifier.weight") w = p;
  ASSERT_NE(w, nullptr);
  const int C = mc.stage_channels[3];
  const int plane = f.h * f.w;
  const nn::Param *fc2_bias = &model.generator()->fc2.bias;
  for (int c = 0; c < C; ++c) {
    double upstream = 0.0;
    for (int k = 0; k < mc.num_classes; ++k)
      upstream += dlogits.at(0, k) * w->value[static_cast<size_t>(k) * C + c];
    upstream /= plane;
    double brute = 0.0;
    for (int j = 0; j < plane; ++j)
      brute += f.data[f.index(0, c, 0, 0) + j] * upstream;
    // Free scale mode: d raw(alpha slot) == dalpha; with batch 1 the fc2
    // bias gradient is exactly dalpha.
    EXPECT_NEAR(fc2_bias->grad[c], brute, 1e-9 * std::max(1.0, std::fabs(brute)));
  }
}

// ---------------------------------------------------------------------------
// Parameter surgery: restricted variants are special cases of the affine path

void copy_fc1(AcousticModel &from, AcousticModel &to) {
  to.generator()->fc1.weight.value = from.generator()->fc1.weight.value;
  to.generator()->fc1.bias.value = from.generator()->fc1.bias.value;
}

// Slot layout per conditioned stage: C alphas then C betas.
void surgery_alpha_identity(FilmGenerator &gen, const std::vector<int> &channels) {
  int offset = 0;
  const int in_dim = gen.fc1.bias.size() ? static_cast<int>(gen.fc1.bias.size()) : 0;
  for (int c : channels) {
    for (int j = 0; j < c; ++j) {
      for (int h = 0; h < in_dim; ++h)
        gen.fc2.weight.value[static_cast<size_t>(offset + j) * in_dim + h] = 0.0;
      gen.fc2.bias.value[offset + j] = 1.0;
    }
    offset += 2 * c;
  }
}

void copy_slots(FilmGenerator &from, FilmGenerator &to,
                const std::vector<int> &channels, bool beta_slots) {
  const int in_dim = static_cast<int>(from.fc1.bias.size());
  int offset = 0;
  for (int c : channels) {
    const int start = beta_slots ? offset + c : offset;
    for (int j = start; j < start + c; ++j) {
      for (int h = 0; h < in_dim; ++h)
        to.fc2.weight.value[static_cast<size_t>(j) * in_dim + h] =
            from.fc2.weight.value[static_cast<size_t>(j) * in_dim + h];
      to.fc2.bias.value[j] = from.fc2.bias.value[j];
    }
    offset += 2 * c;
  }
}

void zero_slots(FilmGenerator &gen, const std::vector<int> &channels,
                bool beta_slots) {
  const int in_dim = static_cast<int>(gen.fc1.bias.size());
  int offset = 0;
  for (int c : channels) {
    const int start = beta_slots ? offset + c : offset;
    for (int j = start; j < start + c; ++j) {
      for (int h = 0; h < in_dim; ++h)
        gen.fc2.weight.value[static_cast<size_t>(j) * in_dim + h] = 0.0;
      gen.fc2.bias.value[j] = 0.0;
    }
    offset += 2 * c;
  }
}

TEST(ModelSurgeryTest, BiasOnlyIsSpecialCaseOfAffine) {
  ModelConfig mc = small_model();
  const std::vector<int> channels{4, 4, 8, 8};

  ConditioningConfig bias_cc = affine_all();
  bias_cc.scale_mode = ScaleMode::kFrozenOne;  // Table 2 "AT (scale=1)"
  AcousticModel bias_model(mc, bias_cc, 9);
  randomize_generator(bias_model, 90);  // beta path active

  AcousticModel general(mc, affine_all(), 9);
  copy_fc1(bias_model, general);
  copy_slots(*bias_model.generator(), *general.generator(), channels,
             /*beta_slots=*/true);
  surgery_alpha_identity(*general.generator(), channels);

  for (int trial = 0; trial < 3; ++trial) {
    Tensor4 x = random_input(mc, 3, 300 + trial);
    Matrix z = random_embeddings(3, mc.embedding_dim, 400 + trial);
    Matrix a = bias_model.forward(x, &z, Mode::kTrain);
    Matrix b = general.forward(x, &z, Mode::kTrain);
    EXPECT_LT(max_abs_diff(a, b), 1e-12);
  }
}

TEST(ModelSurgeryTest, ScaleOnlyIsSpecialCaseOfAffine) {
  ModelConfig mc = small_model();
  const std::vector<int> channels{4, 4, 8, 8};

  ConditioningConfig scale_cc = affine_all();
  scale_cc.bias_mode = BiasMode::kFrozenZero;  // Table 2 "AT (bias=0)"
  AcousticModel scale_model(mc, scale_cc, 11);
  randomize_generator(scale_model, 91);

  AcousticModel general(mc, affine_all(), 11);
  copy_fc1(scale_model, general);
  copy_slots(*scale_model.generator(), *general.generator(), channels,
             /*beta_slots=*/false);
  zero_slots(*general.generator(), channels, /*beta_slots=*/true);

  for (int trial = 0; trial < 3; ++trial) {
    Tensor4 x = random_input(mc, 3, 500 + trial);
    Matrix z = random_embeddings(3, mc.embedding_dim, 600 + trial);
    Matrix a = scale_model.forward(x, &z, Mode::kTrain);
    Matrix b = general.forward(x, &z, Mode::kTrain);
    EXPECT_LT(max_abs_diff(a, b), 1e-12);
  }
}

}  // namespace
}  // namespace tsasr
