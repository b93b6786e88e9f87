// include/tsasr/errors.h

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

#ifndef TSASR_ERRORS_H_
#define TSASR_ERRORS_H_

#include <stdexcept>
#include <string>

namespace tsasr {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Malformed file contents (bad magic, truncated payload, unparsable line).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string &msg) : Error(msg) {}
};

// Well-formed container but an encoding this tool does not handle.
class UnsupportedFormatError : public FormatError {
 public:
  explicit UnsupportedFormatError(const std::string &msg) : FormatError(msg) {}
};

// Invalid or mutually inconsistent configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string &msg) : Error(msg) {}
};

// Missing, insufficient, or out-of-range data.
class DataError : public Error {
 public:
  explicit DataError(const std::string &msg) : Error(msg) {}
};

// Tensor or parameter shape mismatch.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string &msg) : Error(msg) {}
};

// Operation invoked in a state that does not allow it.
class StateError : public Error {
 public:
  explicit StateError(const std::string &msg) : Error(msg) {}
};

// NaN/Inf encountered or a numerical check failed.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string &msg) : Error(msg) {}
};

}  // namespace tsasr

#endif  // TSASR_ERRORS_H_
