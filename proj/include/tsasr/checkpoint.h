// include/tsasr/checkpoint.h

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

#ifndef TSASR_CHECKPOINT_H_
#define TSASR_CHECKPOINT_H_

#include <string>
#include <vector>

#include "tsasr/tensor.h"

namespace tsasr {
namespace nn {

// ATCK checkpoint, little-endian:
//   magic "ATCK", u32 version (=1), u32 parameter count, then per parameter:
//   u32 name length, name bytes, u32 rank, u32 dims[rank], float64 values.
// Values are stored in binary64 (the training precision), so round-trips are
// bit-exact.
void save_checkpoint(const std::string &path,
                     const std::vector<Param *> &params);

// Loads by name into the given parameters.  Missing, extra, or
// shape-mismatched entries are a ConfigError.
void load_checkpoint(const std::string &path,
                     const std::vector<Param *> &params);

}  // namespace nn
}  // namespace tsasr

#endif  // TSASR_CHECKPOINT_H_
