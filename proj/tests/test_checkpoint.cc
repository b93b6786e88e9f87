// tests/test_checkpoint.cc

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

#include "tsasr/checkpoint.h"

#include <gtest/gtest.h>

#include "test_util.h"
#include "tsasr/errors.h"
#include "tsasr/rng.h"

namespace tsasr {
namespace nn {
namespace {

std::vector<Param> make_params(uint64_t seed) {
  std::vector<Param> params;
  params.emplace_back("layer1.weight", std::vector<int>{4, 3, 3, 3});
  params.emplace_back("layer1.bias", std::vector<int>{4});
  params.emplace_back("classifier.weight", std::vector<int>{10, 4});
  Gaussian gauss(seed);
  for (auto &p : params)
    for (auto &v : p.value) v = gauss.sample();
  return params;
}

std::vector<Param *> pointers(std::vector<Param> &params) {
  std::vector<Param *> out;
  for (auto &p : params) out.push_back(&p);
  return out;
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  test::TempDir tmp("atck_rt");
  auto saved = make_params(1);
  save_checkpoint(tmp.file("m.atck"), pointers(saved));

  auto loaded = make_params(2);  // different values, same names/shapes
  load_checkpoint(tmp.file("m.atck"), pointers(loaded));
  for (size_t i = 0; i < saved.size(); ++i) {
    ASSERT_EQ(loaded[i].value.size(), saved[i].value.size());
    EXPECT_EQ(0, std::memcmp(loaded[i].value.data(), saved[i].value.data(),
                             saved[i].value.size() * sizeof(double)));
  }
}

TEST(CheckpointTest, BadMagicIsFormatError) {
  test::TempDir tmp("atck_magic");
  test::write_bytes(tmp.file("x.atck"), {'X', 'X', 'X', 'X', 1, 0, 0, 0});
  auto params = make_params(3);
  EXPECT_THROW(load_checkpoint(tmp.file("x.atck"), pointers(params)), FormatError);
}

TEST(CheckpointTest, MissingParameterIsConfigError) {
  test::TempDir tmp("atck_missing");
  auto saved = make_params(4);
  save_checkpoint(tmp.file("m.atck"), pointers(saved));
  std::vector<Param> other;
  other.emplace_back("layer1.weight", std::vector<int>{4, 3, 3, 3});
  other.emplace_back("layer1.bias", std::vector<int>{4});
  other.emplace_back("unknown.weight", std::vector<int>{10, 4});
  EXPECT_THROW(load_checkpoint(tmp.file("m.atck"), pointers(other)), ConfigError);
}

TEST(CheckpointTest, ShapeMismatchIsConfigError) {
  test::TempDir tmp("atck_shape");
  auto saved = make_params(5);
  save_checkpoint(tmp.file("m.atck"), pointers(saved));
  std::vector<Param> other;
  other.emplace_back("layer1.weight", std::vector<int>{4, 3, 3, 3});
  other.emplace_back("layer1.bias", std::vector<int>{5});  // wrong
  other.emplace_back("classifier.weight", std::vector<int>{10, 4});
  EXPECT_THROW(load_checkpoint(tmp.file("m.atck"), pointers(other)), ConfigError);
}

TEST(CheckpointTest, TruncatedPayloadIsFormatError) {
  test::TempDir tmp("atck_trunc");
  auto saved = make_params(6);
  save_checkpoint(tmp.file("m.atck"), pointers(saved));
  std::string bytes = test::slurp(tmp.file("m.atck"));
  bytes.resize(bytes.size() - 16);
  test::write_bytes(tmp.file("m.atck"),
                    std::vector<char>(bytes.begin(), bytes.end()));
  auto params = make_params(7);
  EXPECT_THROW(load_checkpoint(tmp.file("m.atck"), pointers(params)), FormatError);
}

}  // namespace
}  // namespace nn
}  // namespace tsasr
