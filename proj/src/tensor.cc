// src/tensor.cc

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

#include "tsasr/tensor.h"

#include <cmath>

#include "tsasr/errors.h"

namespace tsasr {
namespace nn {

std::string Tensor4::shape_str() const {
  return "[" + std::to_string(b) + "x" + std::to_string(c) + "x" +
         std::to_string(h) + "x" + std::to_string(w) + "]";
}

std::string Matrix::shape_str() const {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

Param::Param(std::string name_, std::vector<int> shape_)
    : name(std::move(name_)), shape(std::move(shape_)) {
  size_t n = 1;
  for (int d : shape) n *= static_cast<size_t>(d);
  value.assign(n, 0.0);
  grad.assign(n, 0.0);
}

namespace {
void check_span(const double *p, size_t n, const std::string &context) {
  for (size_t i = 0; i < n; ++i)
    if (!std::isfinite(p[i]))
      throw NumericError("non-finite value in " + context);
}
}  // namespace

void check_finite(const Tensor4 &t, const std::string &context) {
  check_span(t.data.data(), t.size(), context);
}

void check_finite(const Matrix &m, const std::string &context) {
  check_span(m.data.data(), m.size(), context);
}

void check_finite(double v, const std::string &context) {
  if (!std::isfinite(v)) throw NumericError("non-finite value in " + context);
}

}  // namespace nn
}  // namespace tsasr
