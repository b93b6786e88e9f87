// tests/test_nn_layers.cc

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

#include <cmath>

#include <gtest/gtest.h>

#include "tsasr/errors.h"
#include "tsasr/gradcheck.h"
#include "tsasr/layers.h"
#include "tsasr/optimizer.h"
#include "tsasr/rng.h"

namespace tsasr {
namespace nn {
namespace {

Tensor4 random_tensor(int b, int c, int h, int w, uint64_t seed) {
  Tensor4 t(b, c, h, w);
  Gaussian gauss(seed);
  for (auto &v : t.data) v = gauss.sample();
  return t;
}

Matrix random_matrix(int r, int c, uint64_t seed) {
  Matrix m(r, c);
  Gaussian gauss(seed);
  for (auto &v : m.data) v = gauss.sample();
  return m;
}

// Scalar loss over a tensor with fixed random weights, to drive layer-level
// finite-difference checks.
double weighted_sum(const Tensor4 &t, uint64_t seed) {
  Gaussian gauss(seed);
  double acc = 0.0;
  for (double v : t.data) acc += v * gauss.sample();
  return acc;
}

Tensor4 weighted_sum_grad(int b, int c, int h, int w, uint64_t seed) {
  Tensor4 g(b, c, h, w);
  Gaussian gauss(seed);
  for (auto &v : g.data) v = gauss.sample();
  return g;
}

// ---------------------------------------------------------------------------
// Conv2d

TEST(ConvTest, OneByOneKernelScales) {
  Conv2d conv("c", 1, 1, 1, 1, 0, false, 0);
  conv.weight.value[0] = 2.0;
  Tensor4 x = random_tensor(2, 1, 3, 4, 1);
  Tensor4 y = conv.forward(x);
  ASSERT_TRUE(y.same_shape(x));
  for (size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(y.data[i], 2.0 * x.data[i]);
}

TEST(ConvTest, AllOnesKernelCounts) {
  Conv2d conv("c", 1, 1, 3, 1, 0, false, 0);
  std::fill(conv.weight.value.begin(), conv.weight.value.end(), 1.0);
  Tensor4 x(1, 1, 3, 3);
  std::fill(x.data.begin(), x.data.end(), 1.0);
  Tensor4 y = conv.forward(x);
  ASSERT_EQ(y.h, 1);
  ASSERT_EQ(y.w, 1);
  EXPECT_DOUBLE_EQ(y.data[0], 9.0);
}

TEST(ConvTest, GradientsMatchFiniteDifferences) {
  Conv2d conv("c", 3, 4, 3, 1, 1, true, 5);
  Tensor4 x = random_tensor(2, 3, 5, 5, 6);
  const uint64_t loss_seed = 77;

  Tensor4 y = conv.forward(x);
  Tensor4 dy = weighted_sum_grad(y.b, y.c, y.h, y.w, loss_seed);
  conv.backward(dy);

  auto loss_fn = [&]() { return weighted_sum(conv.forward(x), loss_seed); };
  auto report = finite_diff_check(conv.parameters(), loss_fn, 24, 1e-5, 1);
  EXPECT_LT(report.max_rel_err, 1e-4) << report.worst_param;
}

TEST(ConvTest, StridedGradientsMatchFiniteDifferences) {
  Conv2d conv("c", 2, 3, 3, 2, 1, false, 8);
  Tensor4 x = random_tensor(2, 2, 7, 5, 9);
  const uint64_t loss_seed = 78;
  Tensor4 y = conv.forward(x);
  conv.backward(weighted_sum_grad(y.b, y.c, y.h, y.w, loss_seed));
  auto loss_fn = [&]() { return weighted_sum(conv.forward(x), loss_seed); };
  auto report = finite_diff_check(conv.parameters(), loss_fn, 24, 1e-5, 2);
  EXPECT_LT(report.max_rel_err, 1e-4) << report.worst_param;
}

TEST(ConvTest, InputGradientMatchesFiniteDifferences) {
  Conv2d conv("c", 2, 2, 3, 1, 1, true, 10);
  Tensor4 x = random_tensor(1, 2, 4, 4, 11);
  const uint64_t loss_seed = 79;
  Tensor4 y = conv.forward(x);
  Tensor4 dx = conv.backward(weighted_sum_grad(y.b, y.c, y.h, y.w, loss_seed));

  const double eps = 1e-5;
  for (size_t i = 0; i < x.size(); i += 7) {
    const double saved = x.data[i];
    x.data[i] = saved + eps;
    const double lp = weighted_sum(conv.forward(x), loss_seed);
    x.data[i] = saved - eps;
    const double lm = weighted_sum(conv.forward(x), loss_seed);
    x.data[i] = saved;
    const double numeric = (lp - lm) / (2 * eps);
    EXPECT_NEAR(dx.data[i], numeric,
                1e-4 * std::max({std::fabs(numeric), std::fabs(dx.data[i]), 1e-6}));
  }
}

TEST(ConvTest, ShapeMismatchIsError) {
  Conv2d conv("c", 3, 4, 3, 1, 1, true, 0);
  Tensor4 x = random_tensor(1, 2, 5, 5, 1);  // wrong channel count
  EXPECT_THROW(conv.forward(x), ShapeError);
}

TEST(ConvTest, BackwardBeforeForwardIsStateError) {
  Conv2d conv("c", 1, 1, 3, 1, 1, true, 0);
  Tensor4 dy(1, 1, 3, 3);
  EXPECT_THROW(conv.backward(dy), StateError);
}

// ---------------------------------------------------------------------------
// BatchNorm2d

TEST(BatchNormTest, NormalizesPerChannel) {
  BatchNorm2d bn("bn", 3);
  Tensor4 x = random_tensor(4, 3, 5, 5, 12);
  // Shift channels so the raw means differ.
  for (int i = 0; i < x.b; ++i)
    for (int ch = 0; ch < 3; ++ch)
      for (int j = 0; j < 25; ++j) x.data[x.index(i, ch, 0, 0) + j] += ch * 2.0;

  Tensor4 y = bn.forward(x, Mode::kTrain);
  const int n = x.b * x.h * x.w;
  for (int ch = 0; ch < 3; ++ch) {
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < x.b; ++i)
      for (int j = 0; j < 25; ++j) mean += y.data[y.index(i, ch, 0, 0) + j];
    mean /= n;
    for (int i = 0; i < x.b; ++i)
      for (int j = 0; j < 25; ++j) {
        double d = y.data[y.index(i, ch, 0, 0) + j] - mean;
        var += d * d;
      }
    var /= n;
    EXPECT_NEAR(mean, 0.0, 1e-5);
    EXPECT_NEAR(var, 1.0, 1e-4);
  }
}

TEST(BatchNormTest, GainShiftApply) {
  BatchNorm2d bn("bn", 2);
  bn.gain.value = {2.0, 2.0};
  bn.shift.value = {3.0, 3.0};
  Tensor4 x = random_tensor(8, 2, 4, 4, 13);
  Tensor4 y = bn.forward(x, Mode::kTrain);
  const int n = x.b * x.h * x.w;
  for (int ch = 0; ch < 2; ++ch) {
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < x.b; ++i)
      for (int j = 0; j < 16; ++j) mean += y.data[y.index(i, ch, 0, 0) + j];
    mean /= n;
    for (int i = 0; i < x.b; ++i)
      for (int j = 0; j < 16; ++j) {
        double d = y.data[y.index(i, ch, 0, 0) + j] - mean;
        var += d * d;
      }
    var /= n;
    EXPECT_NEAR(mean, 3.0, 1e-5);
    EXPECT_NEAR(std::sqrt(var), 2.0, 1e-4);
  }
}

TEST(BatchNormTest, EvalBeforeTrainIsStateError) {
  BatchNorm2d bn("bn", 2);
  Tensor4 x = random_tensor(2, 2, 3, 3, 14);
  EXPECT_THROW(bn.forward(x, Mode::kEval), StateError);
}

TEST(BatchNormTest, EvalUsesRunningStats) {
  BatchNorm2d bn("bn", 1);
  Tensor4 x = random_tensor(8, 1, 4, 4, 15);
  bn.forward(x, Mode::kTrain);
  Tensor4 single = random_tensor(1, 1, 4, 4, 16);
  Tensor4 y = bn.forward(single, Mode::kEval);
  const double mean = bn.running_mean()[0];
  const double inv_std = 1.0 / std::sqrt(bn.running_var()[0] + BatchNorm2d::kEpsilon);
  for (size_t i = 0; i < single.size(); ++i)
    EXPECT_NEAR(y.data[i], (single.data[i] - mean) * inv_std, 1e-12);
}

TEST(BatchNormTest, GradientsMatchFiniteDifferences) {
  BatchNorm2d bn("bn", 3);
  bn.gain.value = {1.2, 0.8, 1.5};
  bn.shift.value = {0.1, -0.2, 0.3};
  Tensor4 x = random_tensor(3, 3, 4, 4, 17);
  const uint64_t loss_seed = 80;
  Tensor4 y = bn.forward(x, Mode::kTrain);
  Tensor4 dx = bn.backward(weighted_sum_grad(y.b, y.c, y.h, y.w, loss_seed));

  auto loss_fn = [&]() {
    return weighted_sum(bn.forward(x, Mode::kTrain), loss_seed);
  };
  auto report = finite_diff_check(bn.parameters(), loss_fn, 0, 1e-5, 3);
  EXPECT_LT(report.max_rel_err, 1e-4) << report.worst_param;

  // Input gradient, including the batch-statistics terms.
  const double eps = 1e-5;
  for (size_t i = 0; i < x.size(); i += 11) {
    const double saved = x.data[i];
    x.data[i] = saved + eps;
    const double lp = loss_fn();
    x.data[i] = saved - eps;
    const double lm = loss_fn();
    x.data[i] = saved;
    const double numeric = (lp - lm) / (2 * eps);
    EXPECT_NEAR(dx.data[i], numeric,
                1e-4 * std::max({std::fabs(numeric), std::fabs(dx.data[i]), 1e-6}));
  }
}

// ---------------------------------------------------------------------------
// Relu / pool / linear

TEST(ReluTest, Definition) {
  Relu relu;
  Tensor4 x(1, 1, 1, 3);
  x.data = {-1.0, 0.0, 2.0};
  Tensor4 y = relu.forward(x);
  EXPECT_DOUBLE_EQ(y.data[0], 0.0);
  EXPECT_DOUBLE_EQ(y.data[1], 0.0);
  EXPECT_DOUBLE_EQ(y.data[2], 2.0);
  Tensor4 dy(1, 1, 1, 3);
  dy.data = {5.0, 5.0, 5.0};
  Tensor4 dx = relu.backward(dy);
  EXPECT_DOUBLE_EQ(dx.data[0], 0.0);
  EXPECT_DOUBLE_EQ(dx.data[1], 0.0);
  EXPECT_DOUBLE_EQ(dx.data[2], 5.0);
}

TEST(PoolTest, ConstantMapPoolsToValue) {
  GlobalAvgPool pool;
  Tensor4 x(2, 3, 4, 5);
  for (int i = 0; i < 2; ++i)
    for (int ch = 0; ch < 3; ++ch)
      for (int j = 0; j < 20; ++j)
        x.data[x.index(i, ch, 0, 0) + j] = 1.5 * (ch + 1);
  Matrix y = pool.forward(x);
  for (int i = 0; i < 2; ++i)
    for (int ch = 0; ch < 3; ++ch)
      EXPECT_DOUBLE_EQ(y.at(i, ch), 1.5 * (ch + 1));
}

TEST(PoolTest, BackwardSpreadsEvenly) {
  GlobalAvgPool pool;
  Tensor4 x = random_tensor(1, 2, 2, 3, 18);
  pool.forward(x);
  Matrix dy(1, 2);
  dy.at(0, 0) = 6.0;
  dy.at(0, 1) = -12.0;
  Tensor4 dx = pool.backward(dy);
  for (int j = 0; j < 6; ++j) {
    EXPECT_DOUBLE_EQ(dx.data[dx.index(0, 0, 0, 0) + j], 1.0);
    EXPECT_DOUBLE_EQ(dx.data[dx.index(0, 1, 0, 0) + j], -2.0);
  }
}

TEST(LinearTest, Arithmetic) {
  Linear lin("l", 2, 2, 0);
  lin.weight.value = {1.0, 2.0, 3.0, 4.0};
  lin.bias.value = {0.5, -0.5};
  Matrix x(1, 2);
  x.data = {1.0, 1.0};
  Matrix y = lin.forward(x);
  EXPECT_DOUBLE_EQ(y.at(0, 0), 3.5);
  EXPECT_DOUBLE_EQ(y.at(0, 1), 6.5);
}

TEST(LinearTest, GradientsMatchFiniteDifferences) {
  Linear lin("l", 5, 3, 19);
  Matrix x = random_matrix(4, 5, 20);
  Gaussian gauss(81);
  Matrix dy(4, 3);
  for (auto &v : dy.data) v = gauss.sample();

  lin.forward(x);
  lin.backward(dy);
  auto loss_fn = [&]() {
    Matrix y = lin.forward(x);
    Gaussian g2(81);
    double acc = 0.0;
    for (double v : y.data) acc += v * g2.sample();
    return acc;
  };
  auto report = finite_diff_check(lin.parameters(), loss_fn, 0, 1e-5, 4);
  // An analytic layer in double precision is near machine accuracy.
  EXPECT_LT(report.max_rel_err, 1e-6) << report.worst_param;
}

// ---------------------------------------------------------------------------
// Softmax cross-entropy

TEST(XentTest, UniformLogits) {
  Matrix logits(3, 4);  // all zeros -> uniform
  auto res = softmax_cross_entropy(logits, {0, 1, 3});
  EXPECT_NEAR(res.loss, std::log(4.0), 1e-12);
}

TEST(XentTest, LossVanishesWithMargin) {
  double prev = 1e9;
  for (double margin : {2.0, 5.0, 10.0, 20.0}) {
    Matrix logits(1, 3);
    logits.at(0, 1) = margin;  // correct class
    auto res = softmax_cross_entropy(logits, {1});
    EXPECT_LT(res.loss, prev);
    prev = res.loss;
  }
  EXPECT_LT(prev, 1e-8);
}

TEST(XentTest, GradRowsSumToZero) {
  Matrix logits = random_matrix(6, 9, 21);
  auto res = softmax_cross_entropy(logits, {0, 1, 2, 3, 4, 5});
  for (int i = 0; i < 6; ++i) {
    double s = 0.0;
    for (int k = 0; k < 9; ++k) s += res.grad.at(i, k);
    EXPECT_NEAR(s, 0.0, 1e-10);
  }
}

TEST(XentTest, GradMatchesFiniteDifferences) {
  Matrix logits = random_matrix(3, 5, 22);
  std::vector<int> labels{1, 4, 0};
  auto res = softmax_cross_entropy(logits, labels);
  const double eps = 1e-6;
  for (size_t i = 0; i < logits.size(); ++i) {
    const double saved = logits.data[i];
    logits.data[i] = saved + eps;
    const double lp = softmax_cross_entropy(logits, labels).loss;
    logits.data[i] = saved - eps;
    const double lm = softmax_cross_entropy(logits, labels).loss;
    logits.data[i] = saved;
    const double numeric = (lp - lm) / (2 * eps);
    EXPECT_NEAR(res.grad.data[i], numeric, 1e-4 * std::max(1e-6, std::fabs(numeric)));
  }
}

TEST(XentTest, OutOfRangeLabelIsError) {
  Matrix logits(2, 3);
  EXPECT_THROW(softmax_cross_entropy(logits, {0, 3}), DataError);
  EXPECT_THROW(softmax_cross_entropy(logits, {-1, 0}), DataError);
}

// ---------------------------------------------------------------------------
// SGD with momentum

TEST(SgdTest, HandComputedRecurrence) {
  Param p("p", {1});
  p.value = {0.0};
  SgdMomentum opt(0.01, 0.9);
  opt.attach({&p});

  p.grad = {1.0};
  opt.step();
  EXPECT_NEAR(p.value[0], -0.01, 1e-15);  // v=1
  p.grad = {1.0};
  opt.step();
  // v = 0.9*1 + 1 = 1.9; theta = -0.01 - 0.019 = -0.029
  EXPECT_NEAR(p.value[0], -0.029, 1e-15);
}

TEST(SgdTest, ZeroGradZeroVelocityIsFixedPoint) {
  Param p("p", {3});
  p.value = {1.0, -2.0, 3.0};
  SgdMomentum opt(0.1, 0.9);
  opt.attach({&p});
  p.grad = {0.0, 0.0, 0.0};
  opt.step();
  EXPECT_DOUBLE_EQ(p.value[0], 1.0);
  EXPECT_DOUBLE_EQ(p.value[1], -2.0);
  EXPECT_DOUBLE_EQ(p.value[2], 3.0);
}

TEST(SgdTest, ZeroMomentumIsPlainSgd) {
  Param p("p", {1});
  p.value = {1.0};
  SgdMomentum opt(0.5, 0.0);
  opt.attach({&p});
  p.grad = {2.0};
  opt.step();
  EXPECT_DOUBLE_EQ(p.value[0], 0.0);  // 1 - 0.5*2
  p.grad = {-4.0};
  opt.step();
  EXPECT_DOUBLE_EQ(p.value[0], 2.0);
}

TEST(SgdTest, InvalidHyperparametersRejected) {
  EXPECT_THROW(SgdMomentum(0.0, 0.9), ConfigError);
  EXPECT_THROW(SgdMomentum(0.1, 1.0), ConfigError);
}

// ---------------------------------------------------------------------------
// Gradient checker negative control

TEST(GradCheckTest, CorruptedBackwardFails) {
  Linear lin("l", 4, 2, 23);
  Matrix x = random_matrix(3, 4, 24);
  Gaussian gauss(82);
  Matrix dy(3, 2);
  for (auto &v : dy.data) v = gauss.sample();
  lin.forward(x);
  lin.backward(dy);
  // Sign-flip the analytic gradients: relative error lands at about 2.
  for (auto &g : lin.weight.grad) g = -g;
  for (auto &g : lin.bias.grad) g = -g;

  auto loss_fn = [&]() {
    Matrix y = lin.forward(x);
    Gaussian g2(82);
    double acc = 0.0;
    for (double v : y.data) acc += v * g2.sample();
    return acc;
  };
  auto report = finite_diff_check(lin.parameters(), loss_fn, 0, 1e-5, 5);
  EXPECT_FALSE(report.ok());
  EXPECT_NEAR(report.max_rel_err, 2.0, 0.2);
}

}  // namespace
}  // namespace nn
}  // namespace tsasr
