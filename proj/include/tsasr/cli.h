// include/tsasr/cli.h

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

#ifndef TSASR_CLI_H_
#define TSASR_CLI_H_

#include <string>
#include <vector>

namespace tsasr {

// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
// check failure.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int cli_main(int argc, const char *const *argv);
int cli_main(const std::vector<std::string> &args);  // args without argv[0]

}  // namespace tsasr

#endif  // TSASR_CLI_H_
