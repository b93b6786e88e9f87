// src/checkpoint.cc

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

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "tsasr/errors.h"

namespace tsasr {
namespace nn {

namespace {
constexpr char kMagic[4] = {'A', 'T', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream &out, uint32_t v) {
  out.write(reinterpret_cast<const char *>(&v), 4);
}

uint32_t read_u32(std::istream &in, const std::string &path) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char *>(&v), 4);
  if (!in) throw FormatError("truncated ATCK file: " + path);
  return v;
}
}  // namespace

void save_checkpoint(const std::string &path,
                     const std::vector<Param *> &params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<uint32_t>(params.size()));
  for (const Param *p : params) {
    write_u32(out, static_cast<uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_u32(out, static_cast<uint32_t>(p->shape.size()));
    for (int d : p->shape) write_u32(out, static_cast<uint32_t>(d));
    out.write(reinterpret_cast<const char *>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) throw DataError("short write: " + path);
}

void load_checkpoint(const std::string &path,
                     const std::vector<Param *> &params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("bad ATCK magic: " + path);
  uint32_t version = read_u32(in, path);
  if (version != kVersion)
    throw FormatError("unsupported ATCK version " + std::to_string(version) +
                      ": " + path);
  uint32_t count = read_u32(in, path);

  std::map<std::string, Param *> by_name;
  for (Param *p : params) by_name[p->name] = p;
  if (count != params.size())
    throw ConfigError("checkpoint has " + std::to_string(count) +
                      " parameters, model has " +
                      std::to_string(params.size()) + ": " + path);

  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = read_u32(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw FormatError("truncated ATCK file: " + path);
    uint32_t rank = read_u32(in, path);
    std::vector<int> shape(rank);
    size_t n = 1;
    for (uint32_t r = 0; r < rank; ++r) {
      shape[r] = static_cast<int>(read_u32(in, path));
      n *= static_cast<size_t>(shape[r]);
    }

    auto it = by_name.find(name);
    if (it == by_name.end())
      throw ConfigError("checkpoint parameter '" + name +
                        "' not present in model: " + path);
    Param *p = it->second;
    if (p->shape != shape)
      throw ConfigError("checkpoint parameter '" + name +
                        "' has mismatched shape: " + path);
    in.read(reinterpret_cast<char *>(p->value.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(n * sizeof(double)))
      throw FormatError("truncated ATCK payload: " + path);
  }
}

}  // namespace nn
}  // namespace tsasr
