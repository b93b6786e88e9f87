// src/gradcheck.cc

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

#include "tsasr/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "tsasr/errors.h"
#include "tsasr/rng.h"

namespace tsasr {
namespace nn {

GradCheckReport finite_diff_check(const std::vector<Param *> &params,
                                  const std::function<double()> &loss_fn,
                                  int samples_per_param, double epsilon,
                                  uint64_t seed) {
  if (epsilon <= 0.0) throw ConfigError("finite_diff_check: epsilon must be > 0");

  GradCheckReport report;
  std::mt19937_64 rng(derive_seed(seed, "gradcheck-subsample"));

  for (Param *p : params) {
    const size_t n = p->size();
    std::vector<size_t> indices;
    if (samples_per_param <= 0 || n <= static_cast<size_t>(samples_per_param)) {
      indices.resize(n);
      for (size_t i = 0; i < n; ++i) indices[i] = i;
    } else {
      // Sample without replacement via partial Fisher-Yates.
      std::vector<size_t> pool(n);
      for (size_t i = 0; i < n; ++i) pool[i] = i;
      for (int i = 0; i < samples_per_param; ++i) {
        size_t j = i + bounded_rand(rng, n - i);
        std::swap(pool[i], pool[j]);
        indices.push_back(pool[i]);
      }
    }

    for (size_t idx : indices) {
      const double saved = p->value[idx];
      p->value[idx] = saved + epsilon;
      const double loss_plus = loss_fn();
      p->value[idx] = saved - epsilon;
      const double loss_minus = loss_fn();
      p->value[idx] = saved;

      const double numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
      const double analytic = p->grad[idx];
      if (!std::isfinite(numeric) || !std::isfinite(analytic))
        throw NumericError("finite_diff_check: non-finite gradient for '" +
                           p->name + "'");
      const double denom =
          std::max({std::fabs(analytic), std::fabs(numeric), 1e-6});
      const double rel = std::fabs(analytic - numeric) / denom;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = p->name + "[" + std::to_string(idx) + "]";
      }
      ++report.scalars_checked;
    }
  }
  return report;
}

}  // namespace nn
}  // namespace tsasr
