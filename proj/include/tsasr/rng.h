// include/tsasr/rng.h

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

#ifndef TSASR_RNG_H_
#define TSASR_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace tsasr {

// All randomness in the project flows through mt19937_64 plus the helpers
// below.  std::*_distribution is avoided because its output is
// implementation-defined; these samplers pin the exact bit stream.

uint64_t splitmix64(uint64_t x);

// Sub-seed for a named role, so every component draws from an independent
// stream derived from the single experiment seed.
uint64_t derive_seed(uint64_t base, std::string_view role);
uint64_t derive_seed(uint64_t base, std::string_view role, uint64_t index);

// Uniform double in [0, 1).
double uniform_unit(std::mt19937_64 &rng);

// Unbiased uniform integer in [0, n), n >= 1.
uint64_t bounded_rand(std::mt19937_64 &rng, uint64_t n);

// Box-Muller standard normal sampler.
class Gaussian {
 public:
  explicit Gaussian(uint64_t seed) : rng_(seed) {}
  explicit Gaussian(std::mt19937_64 rng) : rng_(rng) {}

  double sample();
  double sample(double mean, double stddev) { return mean + stddev * sample(); }

 private:
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Fisher-Yates with bounded_rand, deterministic across platforms.
template <typename T>
void deterministic_shuffle(std::vector<T> &v, std::mt19937_64 &rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(bounded_rand(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace tsasr

#endif  // TSASR_RNG_H_
