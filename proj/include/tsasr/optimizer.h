// include/tsasr/optimizer.h

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

#ifndef TSASR_OPTIMIZER_H_
#define TSASR_OPTIMIZER_H_

#include <vector>

#include "tsasr/tensor.h"

namespace tsasr {
namespace nn {

// Classical momentum: v <- mu * v + g; theta <- theta - lr * v.
class SgdMomentum {
 public:
  SgdMomentum(double learning_rate, double momentum);

  // Creates one zero momentum buffer per parameter, same shape.
  void attach(std::vector<Param *> params);

  // Consumes the gradients currently stored in the attached parameters.
  void step();

  void set_learning_rate(double lr);
  double learning_rate() const { return lr_; }
  double momentum() const { return momentum_; }
  const std::vector<std::vector<double>> &buffers() const { return buffers_; }

 private:
  double lr_;
  double momentum_;
  std::vector<Param *> params_;
  std::vector<std::vector<double>> buffers_;
};

}  // namespace nn
}  // namespace tsasr

#endif  // TSASR_OPTIMIZER_H_
