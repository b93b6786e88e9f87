// src/wav.cc

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

#include "tsasr/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "tsasr/errors.h"

namespace tsasr {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatIeeeFloat = 3;

template <typename T>
T read_le(std::istream &in, const std::string &path) {
  T v{};
  in.read(reinterpret_cast<char *>(&v), sizeof(T));
  if (!in) throw FormatError("truncated WAV file: " + path);
  return v;
}

template <typename T>
void write_le(std::ostream &out, T v) {
  out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

struct FmtChunk {
  uint16_t audio_format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits_per_sample = 0;
};

void write_header(std::ostream &out, uint16_t format, uint16_t bits,
                  uint32_t sample_rate, uint32_t data_bytes) {
  uint16_t block_align = static_cast<uint16_t>(bits / 8);
  out.write("RIFF", 4);
  write_le<uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_le<uint32_t>(out, 16);
  write_le<uint16_t>(out, format);
  write_le<uint16_t>(out, 1);  // mono
  write_le<uint32_t>(out, sample_rate);
  write_le<uint32_t>(out, sample_rate * block_align);
  write_le<uint16_t>(out, block_align);
  write_le<uint16_t>(out, bits);
  out.write("data", 4);
  write_le<uint32_t>(out, data_bytes);
}

}  // namespace

Waveform load_wav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path);

  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0)
    throw FormatError("not a RIFF file: " + path);
  read_le<uint32_t>(in, path);  // riff size, unused
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0)
    throw FormatError("not a WAVE file: " + path);

  FmtChunk fmt;
  bool have_fmt = false;
  std::vector<char> data;
  bool have_data = false;

  while (in.read(tag, 4)) {
    uint32_t chunk_size = read_le<uint32_t>(in, path);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw FormatError("fmt chunk too small: " + path);
      fmt.audio_format = read_le<uint16_t>(in, path);
      fmt.channels = read_le<uint16_t>(in, path);
      fmt.sample_rate = read_le<uint32_t>(in, path);
      read_le<uint32_t>(in, path);  // byte rate
      read_le<uint16_t>(in, path);  // block align
      fmt.bits_per_sample = read_le<uint16_t>(in, path);
      in.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data.resize(chunk_size);
      in.read(data.data(), chunk_size);
      if (!in) throw FormatError("truncated data chunk: " + path);
      have_data = true;
    } else {
      in.seekg(chunk_size, std::ios::cur);
    }
    if (chunk_size % 2 == 1) in.seekg(1, std::ios::cur);  // chunks are word-aligned
  }

  if (!have_fmt) throw FormatError("missing fmt chunk: " + path);
  if (!have_data) throw FormatError("missing data chunk: " + path);
  if (fmt.sample_rate == 0) throw FormatError("zero sample rate: " + path);
  if (fmt.channels != 1)
    throw UnsupportedFormatError("only mono WAV is supported (" +
                                 std::to_string(fmt.channels) +
                                 " channels): " + path);

  Waveform w;
  w.sample_rate = static_cast<int>(fmt.sample_rate);
  if (fmt.audio_format == kFormatPcm && fmt.bits_per_sample == 16) {
    size_t n = data.size() / 2;
    w.samples.resize(n);
    const int16_t *src = reinterpret_cast<const int16_t *>(data.data());
    for (size_t i = 0; i < n; ++i)
      w.samples[i] = static_cast<float>(src[i]) / 32768.0f;
  } else if (fmt.audio_format == kFormatIeeeFloat && fmt.bits_per_sample == 32) {
    size_t n = data.size() / 4;
    w.samples.resize(n);
    std::memcpy(w.samples.data(), data.data(), n * 4);
  } else {
    throw UnsupportedFormatError(
        "unsupported WAV encoding (format=" + std::to_string(fmt.audio_format) +
        ", bits=" + std::to_string(fmt.bits_per_sample) + "): " + path);
  }
  return w;
}

void save_wav_pcm16(const std::string &path, const Waveform &w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write WAV file: " + path);
  write_header(out, kFormatPcm, 16, static_cast<uint32_t>(w.sample_rate),
               static_cast<uint32_t>(w.samples.size() * 2));
  for (float s : w.samples) {
    double v = std::clamp(static_cast<double>(s), -1.0, 1.0) * 32768.0;
    int32_t q = static_cast<int32_t>(std::lrint(v));
    q = std::clamp(q, -32768, 32767);
    write_le<int16_t>(out, static_cast<int16_t>(q));
  }
  if (!out) throw DataError("short write: " + path);
}

void save_wav_float32(const std::string &path, const Waveform &w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write WAV file: " + path);
  write_header(out, kFormatIeeeFloat, 32, static_cast<uint32_t>(w.sample_rate),
               static_cast<uint32_t>(w.samples.size() * 4));
  out.write(reinterpret_cast<const char *>(w.samples.data()),
            static_cast<std::streamsize>(w.samples.size() * 4));
  if (!out) throw DataError("short write: " + path);
}

}  // namespace tsasr
