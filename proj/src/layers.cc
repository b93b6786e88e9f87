// src/layers.cc

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

// Parallel loops are partitioned so that every output element is written by
// exactly one thread with a fixed inner summation order; results are bitwise
// identical for any thread count.

#include "tsasr/layers.h"

#include <algorithm>
#include <cmath>

#include "tsasr/errors.h"
#include "tsasr/rng.h"

namespace tsasr {
namespace nn {

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(std::string name, int in_ch, int out_ch, int ksize, int stride,
               int pad, bool with_bias, uint64_t seed)
    : weight(name + ".weight", {out_ch, in_ch, ksize, ksize}),
      name_(std::move(name)),
      in_ch_(in_ch),
      out_ch_(out_ch),
      ksize_(ksize),
      stride_(stride),
      pad_(pad),
      with_bias_(with_bias) {
  if (in_ch < 1 || out_ch < 1 || ksize < 1 || stride < 1 || pad < 0)
    throw ConfigError("Conv2d '" + name_ + "': invalid geometry");
  if (with_bias_) bias = Param(name_ + ".bias", {out_ch});

  // He-normal: N(0, sqrt(2 / fan_in)).
  Gaussian gauss(derive_seed(seed, "init:" + name_));
  double stddev = std::sqrt(2.0 / (static_cast<double>(in_ch) * ksize * ksize));
  for (double &v : weight.value) v = gauss.sample(0.0, stddev);
}

std::vector<Param *> Conv2d::parameters() {
  std::vector<Param *> p{&weight};
  if (with_bias_) p.push_back(&bias);
  return p;
}

Tensor4 Conv2d::forward(const Tensor4 &x) {
  if (x.c != in_ch_)
    throw ShapeError("Conv2d '" + name_ + "': input channels " +
                     std::to_string(x.c) + " != " + std::to_string(in_ch_));
  const int oh = out_height(x.h), ow = out_width(x.w);
  if (oh < 1 || ow < 1)
    throw ShapeError("Conv2d '" + name_ + "': kernel does not fit input " +
                     x.shape_str());
  cached_input_ = x;
  Tensor4 y(x.b, out_ch_, oh, ow);

  const int k = ksize_, stride = stride_, pad = pad_;
  const double *wv = weight.value.data();
#pragma omp parallel for collapse(2) schedule(static)
  for (int i = 0; i < x.b; ++i) {
    for (int oc = 0; oc < out_ch_; ++oc) {
      const double b0 = with_bias_ ? bias.value[oc] : 0.0;
      for (int y0 = 0; y0 < oh; ++y0) {
        for (int x0 = 0; x0 < ow; ++x0) {
          double acc = b0;
          for (int ic = 0; ic < in_ch_; ++ic) {
            const double *wrow =
                wv + ((static_cast<size_t>(oc) * in_ch_ + ic) * k) * k;
            for (int kh = 0; kh < k; ++kh) {
              const int ih = y0 * stride - pad + kh;
              if (ih < 0 || ih >= x.h) continue;
              const double *xrow = x.data.data() + x.index(i, ic, ih, 0);
              for (int kw = 0; kw < k; ++kw) {
                const int iw = x0 * stride - pad + kw;
                if (iw < 0 || iw >= x.w) continue;
                acc += wrow[kh * k + kw] * xrow[iw];
              }
            }
          }
          y.at(i, oc, y0, x0) = acc;
        }
      }
    }
  }
  return y;
}

Tensor4 Conv2d::backward(const Tensor4 &dy) {
  if (cached_input_.empty())
    throw StateError("Conv2d '" + name_ + "': backward before forward");
  const Tensor4 &x = cached_input_;
  const int oh = out_height(x.h), ow = out_width(x.w);
  if (dy.b != x.b || dy.c != out_ch_ || dy.h != oh || dy.w != ow)
    throw ShapeError("Conv2d '" + name_ + "': upstream gradient shape " +
                     dy.shape_str() + " mismatch");

  const int k = ksize_, stride = stride_, pad = pad_;

  // Weight and bias gradients, partitioned by output channel.
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < out_ch_; ++oc) {
    if (with_bias_) {
      double acc = 0.0;
      for (int i = 0; i < x.b; ++i) {
        const double *dyrow = dy.data.data() + dy.index(i, oc, 0, 0);
        for (int j = 0; j < oh * ow; ++j) acc += dyrow[j];
      }
      bias.grad[oc] = acc;
    }
    for (int ic = 0; ic < in_ch_; ++ic) {
      for (int kh = 0; kh < k; ++kh) {
        for (int kw = 0; kw < k; ++kw) {
          double acc = 0.0;
          for (int i = 0; i < x.b; ++i) {
            for (int y0 = 0; y0 < oh; ++y0) {
              const int ih = y0 * stride - pad + kh;
              if (ih < 0 || ih >= x.h) continue;
              const double *dyrow = dy.data.data() + dy.index(i, oc, y0, 0);
              const double *xrow = x.data.data() + x.index(i, ic, ih, 0);
              for (int x0 = 0; x0 < ow; ++x0) {
                const int iw = x0 * stride - pad + kw;
                if (iw < 0 || iw >= x.w) continue;
                acc += dyrow[x0] * xrow[iw];
              }
            }
          }
          weight.grad[((static_cast<size_t>(oc) * in_ch_ + ic) * k + kh) * k +
                      kw] = acc;
        }
      }
    }
  }

  // Input gradient, partitioned by batch element.
  Tensor4 dx(x.b, x.c, x.h, x.w);
  const double *wv = weight.value.data();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < x.b; ++i) {
    for (int oc = 0; oc < out_ch_; ++oc) {
      for (int y0 = 0; y0 < oh; ++y0) {
        for (int x0 = 0; x0 < ow; ++x0) {
          const double g = dy.at(i, oc, y0, x0);
          if (g == 0.0) continue;
          for (int ic = 0; ic < in_ch_; ++ic) {
            const double *wrow =
                wv + ((static_cast<size_t>(oc) * in_ch_ + ic) * k) * k;
            for (int kh = 0; kh < k; ++kh) {
              const int ih = y0 * stride - pad + kh;
              if (ih < 0 || ih >= x.h) continue;
              double *dxrow = dx.data.data() + dx.index(i, ic, ih, 0);
              for (int kw = 0; kw < k; ++kw) {
                const int iw = x0 * stride - pad + kw;
                if (iw < 0 || iw >= x.w) continue;
                dxrow[iw] += g * wrow[kh * k + kw];
              }
            }
          }
        }
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// BatchNorm2d

BatchNorm2d::BatchNorm2d(std::string name, int channels)
    : gain(name + ".gain", {channels}),
      shift(name + ".shift", {channels}),
      name_(std::move(name)),
      channels_(channels),
      running_mean_(channels, 0.0),
      running_var_(channels, 1.0) {
  std::fill(gain.value.begin(), gain.value.end(), 1.0);
}

std::vector<Param *> BatchNorm2d::parameters() { return {&gain, &shift}; }

void BatchNorm2d::set_running_stats(std::vector<double> mean,
                                    std::vector<double> var) {
  if (static_cast<int>(mean.size()) != channels_ ||
      static_cast<int>(var.size()) != channels_)
    throw ShapeError("BatchNorm2d '" + name_ + "': running stat size mismatch");
  for (double v : var)
    if (v < 0.0) throw ConfigError("BatchNorm2d '" + name_ + "': negative variance");
  running_mean_ = std::move(mean);
  running_var_ = std::move(var);
  stats_initialized_ = true;
}

Tensor4 BatchNorm2d::forward(const Tensor4 &x, Mode mode) {
  if (x.c != channels_)
    throw ShapeError("BatchNorm2d '" + name_ + "': channel mismatch");
  const int n = x.b * x.h * x.w;
  if (mode == Mode::kTrain && n < 2)
    throw ShapeError("BatchNorm2d '" + name_ +
                     "': train mode needs at least 2 values per channel");
  if (mode == Mode::kEval && !stats_initialized_)
    throw StateError("BatchNorm2d '" + name_ +
                     "': eval mode before any train-mode forward");

  cached_mode_ = mode;
  cached_mean_.assign(channels_, 0.0);
  cached_inv_std_.assign(channels_, 0.0);
  cached_xhat_ = Tensor4(x.b, x.c, x.h, x.w);
  Tensor4 y(x.b, x.c, x.h, x.w);

  const int plane = x.h * x.w;
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < channels_; ++ch) {
    double mean, var;
    if (mode == Mode::kTrain) {
      double sum = 0.0;
      for (int i = 0; i < x.b; ++i) {
        const double *row = x.data.data() + x.index(i, ch, 0, 0);
        for (int j = 0; j < plane; ++j) sum += row[j];
      }
      mean = sum / n;
      double sq = 0.0;
      for (int i = 0; i < x.b; ++i) {
        const double *row = x.data.data() + x.index(i, ch, 0, 0);
        for (int j = 0; j < plane; ++j) {
          double d = row[j] - mean;
          sq += d * d;
        }
      }
      var = sq / n;  // biased
      running_mean_[ch] = (1.0 - kMomentum) * running_mean_[ch] + kMomentum * mean;
      running_var_[ch] = (1.0 - kMomentum) * running_var_[ch] + kMomentum * var;
    } else {
      mean = running_mean_[ch];
      var = running_var_[ch];
    }
    const double inv_std = 1.0 / std::sqrt(var + kEpsilon);
    cached_mean_[ch] = mean;
    cached_inv_std_[ch] = inv_std;
    const double g = gain.value[ch], s = shift.value[ch];
    for (int i = 0; i < x.b; ++i) {
      const double *row = x.data.data() + x.index(i, ch, 0, 0);
      double *hrow = cached_xhat_.data.data() + cached_xhat_.index(i, ch, 0, 0);
      double *yrow = y.data.data() + y.index(i, ch, 0, 0);
      for (int j = 0; j < plane; ++j) {
        double xh = (row[j] - mean) * inv_std;
        hrow[j] = xh;
        yrow[j] = g * xh + s;
      }
    }
  }
  if (mode == Mode::kTrain) stats_initialized_ = true;
  return y;
}

Tensor4 BatchNorm2d::backward(const Tensor4 &dy) {
  if (cached_xhat_.empty())
    throw StateError("BatchNorm2d '" + name_ + "': backward before forward");
  if (!dy.same_shape(cached_xhat_))
    throw ShapeError("BatchNorm2d '" + name_ + "': upstream gradient shape " +
                     dy.shape_str() + " mismatch");

  const int n = dy.b * dy.h * dy.w;
  const int plane = dy.h * dy.w;
  Tensor4 dx(dy.b, dy.c, dy.h, dy.w);

#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < channels_; ++ch) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int i = 0; i < dy.b; ++i) {
      const double *dyrow = dy.data.data() + dy.index(i, ch, 0, 0);
      const double *hrow =
          cached_xhat_.data.data() + cached_xhat_.index(i, ch, 0, 0);
      for (int j = 0; j < plane; ++j) {
        sum_dy += dyrow[j];
        sum_dy_xhat += dyrow[j] * hrow[j];
      }
    }
    gain.grad[ch] = sum_dy_xhat;
    shift.grad[ch] = sum_dy;

    const double g = gain.value[ch];
    const double inv_std = cached_inv_std_[ch];
    if (cached_mode_ == Mode::kTrain) {
      const double scale = g * inv_std / n;
      for (int i = 0; i < dy.b; ++i) {
        const double *dyrow = dy.data.data() + dy.index(i, ch, 0, 0);
        const double *hrow =
            cached_xhat_.data.data() + cached_xhat_.index(i, ch, 0, 0);
        double *dxrow = dx.data.data() + dx.index(i, ch, 0, 0);
        for (int j = 0; j < plane; ++j)
          dxrow[j] = scale * (n * dyrow[j] - sum_dy - hrow[j] * sum_dy_xhat);
      }
    } else {
      // Running statistics are constants in eval mode.
      const double scale = g * inv_std;
      for (int i = 0; i < dy.b; ++i) {
        const double *dyrow = dy.data.data() + dy.index(i, ch, 0, 0);
        double *dxrow = dx.data.data() + dx.index(i, ch, 0, 0);
        for (int j = 0; j < plane; ++j) dxrow[j] = scale * dyrow[j];
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Relu

Tensor4 Relu::forward(const Tensor4 &x) {
  cached_input_ = x;
  Tensor4 y(x.b, x.c, x.h, x.w);
  for (size_t i = 0; i < x.size(); ++i)
    y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
  return y;
}

Tensor4 Relu::backward(const Tensor4 &dy) {
  if (cached_input_.empty()) throw StateError("Relu: backward before forward");
  if (!dy.same_shape(cached_input_))
    throw ShapeError("Relu: upstream gradient shape mismatch");
  Tensor4 dx(dy.b, dy.c, dy.h, dy.w);
  for (size_t i = 0; i < dy.size(); ++i)
    dx.data[i] = cached_input_.data[i] > 0.0 ? dy.data[i] : 0.0;
  return dx;
}

// ---------------------------------------------------------------------------
// GlobalAvgPool

Matrix GlobalAvgPool::forward(const Tensor4 &x) {
  cached_b_ = x.b;
  cached_c_ = x.c;
  cached_h_ = x.h;
  cached_w_ = x.w;
  Matrix y(x.b, x.c);
  const int plane = x.h * x.w;
  for (int i = 0; i < x.b; ++i)
    for (int ch = 0; ch < x.c; ++ch) {
      const double *row = x.data.data() + x.index(i, ch, 0, 0);
      double acc = 0.0;
      for (int j = 0; j < plane; ++j) acc += row[j];
      y.at(i, ch) = acc / plane;
    }
  return y;
}

Tensor4 GlobalAvgPool::backward(const Matrix &dy) {
  if (cached_b_ == 0) throw StateError("GlobalAvgPool: backward before forward");
  if (dy.rows != cached_b_ || dy.cols != cached_c_)
    throw ShapeError("GlobalAvgPool: upstream gradient shape mismatch");
  Tensor4 dx(cached_b_, cached_c_, cached_h_, cached_w_);
  const int plane = cached_h_ * cached_w_;
  for (int i = 0; i < cached_b_; ++i)
    for (int ch = 0; ch < cached_c_; ++ch) {
      const double g = dy.at(i, ch) / plane;
      double *row = dx.data.data() + dx.index(i, ch, 0, 0);
      for (int j = 0; j < plane; ++j) row[j] = g;
    }
  return dx;
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(std::string name, int in_dim, int out_dim, uint64_t seed)
    : weight(name + ".weight", {out_dim, in_dim}),
      bias(name + ".bias", {out_dim}),
      name_(std::move(name)),
      in_dim_(in_dim),
      out_dim_(out_dim) {
  if (in_dim < 1 || out_dim < 1)
    throw ConfigError("Linear '" + name_ + "': invalid dimensions");
  Gaussian gauss(derive_seed(seed, "init:" + name_));
  double stddev = std::sqrt(2.0 / static_cast<double>(in_dim));
  for (double &v : weight.value) v = gauss.sample(0.0, stddev);
}

void Linear::init_zero_weights() {
  std::fill(weight.value.begin(), weight.value.end(), 0.0);
}

std::vector<Param *> Linear::parameters() { return {&weight, &bias}; }

Matrix Linear::forward(const Matrix &x) {
  if (x.cols != in_dim_)
    throw ShapeError("Linear '" + name_ + "': input dim " +
                     std::to_string(x.cols) + " != " + std::to_string(in_dim_));
  cached_input_ = x;
  Matrix y(x.rows, out_dim_);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < x.rows; ++i) {
    const double *xrow = x.row(i);
    double *yrow = y.row(i);
    for (int o = 0; o < out_dim_; ++o) {
      const double *wrow = weight.value.data() + static_cast<size_t>(o) * in_dim_;
      double acc = bias.value[o];
      for (int j = 0; j < in_dim_; ++j) acc += wrow[j] * xrow[j];
      yrow[o] = acc;
    }
  }
  return y;
}

Matrix Linear::backward(const Matrix &dy) {
  if (cached_input_.empty())
    throw StateError("Linear '" + name_ + "': backward before forward");
  const Matrix &x = cached_input_;
  if (dy.rows != x.rows || dy.cols != out_dim_)
    throw ShapeError("Linear '" + name_ + "': upstream gradient shape " +
                     dy.shape_str() + " mismatch");

#pragma omp parallel for schedule(static)
  for (int o = 0; o < out_dim_; ++o) {
    double bacc = 0.0;
    double *wrow = weight.grad.data() + static_cast<size_t>(o) * in_dim_;
    std::fill(wrow, wrow + in_dim_, 0.0);
    for (int i = 0; i < x.rows; ++i) {
      const double g = dy.at(i, o);
      bacc += g;
      const double *xrow = x.row(i);
      for (int j = 0; j < in_dim_; ++j) wrow[j] += g * xrow[j];
    }
    bias.grad[o] = bacc;
  }

  Matrix dx(x.rows, in_dim_);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < x.rows; ++i) {
    double *dxrow = dx.row(i);
    const double *dyrow = dy.row(i);
    for (int o = 0; o < out_dim_; ++o) {
      const double g = dyrow[o];
      if (g == 0.0) continue;
      const double *wrow = weight.value.data() + static_cast<size_t>(o) * in_dim_;
      for (int j = 0; j < in_dim_; ++j) dxrow[j] += g * wrow[j];
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Softmax cross-entropy

Matrix softmax(const Matrix &logits) {
  Matrix p(logits.rows, logits.cols);
  for (int i = 0; i < logits.rows; ++i) {
    const double *row = logits.row(i);
    double mx = row[0];
    for (int k = 1; k < logits.cols; ++k) mx = std::max(mx, row[k]);
    double z = 0.0;
    for (int k = 0; k < logits.cols; ++k) z += std::exp(row[k] - mx);
    double *prow = p.row(i);
    for (int k = 0; k < logits.cols; ++k) prow[k] = std::exp(row[k] - mx) / z;
  }
  return p;
}

XentResult softmax_cross_entropy(const Matrix &logits,
                                 const std::vector<int> &labels) {
  if (static_cast<int>(labels.size()) != logits.rows)
    throw ShapeError("softmax_cross_entropy: batch size mismatch");
  for (int y : labels)
    if (y < 0 || y >= logits.cols)
      throw DataError("softmax_cross_entropy: label " + std::to_string(y) +
                      " outside [0, " + std::to_string(logits.cols) + ")");

  XentResult res;
  res.grad = Matrix(logits.rows, logits.cols);
  const double inv_b = 1.0 / logits.rows;
  double loss = 0.0;
  for (int i = 0; i < logits.rows; ++i) {
    const double *row = logits.row(i);
    double mx = row[0];
    for (int k = 1; k < logits.cols; ++k) mx = std::max(mx, row[k]);
    double z = 0.0;
    for (int k = 0; k < logits.cols; ++k) z += std::exp(row[k] - mx);
    const double log_z = std::log(z) + mx;
    loss += log_z - row[labels[i]];
    double *grow = res.grad.row(i);
    for (int k = 0; k < logits.cols; ++k)
      grow[k] = std::exp(row[k] - log_z) * inv_b;
    grow[labels[i]] -= inv_b;
  }
  res.loss = loss * inv_b;
  check_finite(res.loss, "softmax_cross_entropy loss");
  return res;
}

}  // namespace nn
}  // namespace tsasr
