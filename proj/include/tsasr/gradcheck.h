// include/tsasr/gradcheck.h

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

#ifndef TSASR_GRADCHECK_H_
#define TSASR_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tsasr/tensor.h"

namespace tsasr {
namespace nn {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int scalars_checked = 0;

  bool ok(double tolerance = 1e-4) const { return max_rel_err < tolerance; }
};

// Central finite differences against the analytic gradients already stored
// in each parameter's grad field.  loss_fn must evaluate the loss at the
// current parameter values without touching the grads.  For each parameter
// tensor, up to samples_per_param scalars are probed (all of them when the
// tensor is smaller); the subsample is drawn deterministically from seed.
//
// rel_err = |analytic - numeric| / max(|analytic|, |numeric|, 1e-6)
GradCheckReport finite_diff_check(const std::vector<Param *> &params,
                                  const std::function<double()> &loss_fn,
                                  int samples_per_param = 16,
                                  double epsilon = 1e-5, uint64_t seed = 0);

}  // namespace nn
}  // namespace tsasr

#endif  // TSASR_GRADCHECK_H_
