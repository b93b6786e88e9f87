// include/tsasr/tensor.h

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

#ifndef TSASR_TENSOR_H_
#define TSASR_TENSOR_H_

#include <string>
#include <vector>

namespace tsasr {
namespace nn {

// Training math runs in double so the central finite-difference checks are
// meaningful; file formats that store float32 convert at the boundary.

// B x C x H x W, row-major with W fastest.
struct Tensor4 {
  int b = 0, c = 0, h = 0, w = 0;
  std::vector<double> data;

  Tensor4() = default;
  Tensor4(int b_, int c_, int h_, int w_)
      : b(b_), c(c_), h(h_), w(w_),
        data(static_cast<size_t>(b_) * c_ * h_ * w_, 0.0) {}

  size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  size_t index(int i, int ch, int y, int x) const {
    return ((static_cast<size_t>(i) * c + ch) * h + y) * w + x;
  }
  double &at(int i, int ch, int y, int x) { return data[index(i, ch, y, x)]; }
  double at(int i, int ch, int y, int x) const { return data[index(i, ch, y, x)]; }

  bool same_shape(const Tensor4 &o) const {
    return b == o.b && c == o.c && h == o.h && w == o.w;
  }
  std::string shape_str() const;
};

// rows x cols, row-major.
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  double &at(int r, int c_) { return data[static_cast<size_t>(r) * cols + c_]; }
  double at(int r, int c_) const { return data[static_cast<size_t>(r) * cols + c_]; }
  const double *row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
  double *row(int r) { return data.data() + static_cast<size_t>(r) * cols; }

  bool same_shape(const Matrix &o) const { return rows == o.rows && cols == o.cols; }
  std::string shape_str() const;
};

// Named trainable tensor; grad is overwritten by each backward pass.
struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;

  Param() = default;
  Param(std::string name_, std::vector<int> shape_);

  size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

// Throws NumericError if any entry is NaN/Inf.
void check_finite(const Tensor4 &t, const std::string &context);
void check_finite(const Matrix &m, const std::string &context);
void check_finite(double v, const std::string &context);

}  // namespace nn
}  // namespace tsasr

#endif  // TSASR_TENSOR_H_
