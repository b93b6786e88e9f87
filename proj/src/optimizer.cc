// src/optimizer.cc

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

#include "tsasr/optimizer.h"

#include "tsasr/errors.h"

namespace tsasr {
namespace nn {

SgdMomentum::SgdMomentum(double learning_rate, double momentum)
    : lr_(learning_rate), momentum_(momentum) {
  if (learning_rate <= 0.0)
    throw ConfigError("SgdMomentum: learning rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0)
    throw ConfigError("SgdMomentum: momentum must be in [0, 1)");
}

void SgdMomentum::attach(std::vector<Param *> params) {
  params_ = std::move(params);
  buffers_.clear();
  buffers_.reserve(params_.size());
  for (const Param *p : params_) buffers_.emplace_back(p->size(), 0.0);
}

void SgdMomentum::set_learning_rate(double lr) {
  if (lr <= 0.0) throw ConfigError("SgdMomentum: learning rate must be positive");
  lr_ = lr;
}

void SgdMomentum::step() {
  if (params_.empty()) throw StateError("SgdMomentum: step before attach");
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    Param &p = *params_[pi];
    std::vector<double> &v = buffers_[pi];
    if (v.size() != p.size() || p.grad.size() != p.value.size())
      throw ShapeError("SgdMomentum: buffer/parameter shape mismatch for '" +
                       p.name + "'");
    for (size_t i = 0; i < v.size(); ++i) {
      v[i] = momentum_ * v[i] + p.grad[i];
      p.value[i] -= lr_ * v[i];
    }
  }
}

}  // namespace nn
}  // namespace tsasr
