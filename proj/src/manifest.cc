// src/manifest.cc

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

#include "tsasr/manifest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tsasr/errors.h"

namespace tsasr {

namespace {

std::vector<std::string> split_tabs(const std::string &line) {
  std::vector<std::string> fields;
  size_t start = 0;
  for (;;) {
    size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::vector<std::string>> read_tsv(const std::string &path,
                                               size_t num_fields,
                                               const char *what) {
  std::ifstream in(path);
  if (!in)
    throw DataError(std::string("cannot open ") + what + ": " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != num_fields)
      throw FormatError(std::string(what) + " line " + std::to_string(lineno) +
                        ": expected " + std::to_string(num_fields) +
                        " tab-separated fields, got " +
                        std::to_string(fields.size()) + " (" + path + ")");
    rows.push_back(std::move(fields));
  }
  return rows;
}

double parse_double(const std::string &s, const char *what) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw FormatError(std::string("bad numeric field in ") + what + ": '" + s + "'");
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<UttEntry> read_manifest(const std::string &path) {
  std::vector<UttEntry> entries;
  for (auto &row : read_tsv(path, 3, "manifest"))
    entries.push_back({row[0], row[1], row[2]});
  return entries;
}

void write_manifest(const std::string &path, const std::vector<UttEntry> &entries) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest: " + path);
  for (const auto &e : entries)
    out << e.utt_id << '\t' << e.speaker_id << '\t' << e.path << '\n';
}

std::vector<MixEntry> read_mixture_manifest(const std::string &path) {
  std::vector<MixEntry> entries;
  for (auto &row : read_tsv(path, 6, "mixture manifest")) {
    MixEntry e;
    e.mix_id = row[0];
    e.target_utt = row[1];
    e.interferer_utt = row[2];
    e.sir_db = parse_double(row[3], "mixture manifest");
    e.gain = parse_double(row[4], "mixture manifest");
    e.wav_path = row[5];
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_mixture_manifest(const std::string &path,
                            const std::vector<MixEntry> &entries) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write mixture manifest: " + path);
  for (const auto &e : entries)
    out << e.mix_id << '\t' << e.target_utt << '\t' << e.interferer_utt << '\t'
        << format_double(e.sir_db) << '\t' << format_double(e.gain) << '\t'
        << e.wav_path << '\n';
}

std::vector<EmbeddingEntry> read_embedding_manifest(const std::string &path) {
  std::vector<EmbeddingEntry> entries;
  for (auto &row : read_tsv(path, 2, "embedding manifest"))
    entries.push_back({row[0], row[1]});
  return entries;
}

void write_embedding_manifest(const std::string &path,
                              const std::vector<EmbeddingEntry> &entries) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embedding manifest: " + path);
  for (const auto &e : entries) out << e.speaker_id << '\t' << e.path << '\n';
}

}  // namespace tsasr
