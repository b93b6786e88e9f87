// src/run_config.cc

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

#include "tsasr/run_config.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "tsasr/errors.h"

namespace tsasr {

namespace {

std::string trim(const std::string &s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

int parse_int(const std::string &v, const std::string &key) {
  try {
    size_t pos = 0;
    int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception &) {
    throw ConfigError("config key '" + key + "': bad integer '" + v + "'");
  }
}

uint64_t parse_u64(const std::string &v, const std::string &key) {
  try {
    size_t pos = 0;
    uint64_t r = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception &) {
    throw ConfigError("config key '" + key + "': bad integer '" + v + "'");
  }
}

double parse_dbl(const std::string &v, const std::string &key) {
  try {
    size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception &) {
    throw ConfigError("config key '" + key + "': bad number '" + v + "'");
  }
}

bool parse_bool(const std::string &v, const std::string &key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': bad boolean '" + v + "'");
}

std::vector<int> parse_int_list(const std::string &v, const std::string &key) {
  std::vector<int> out;
  if (trim(v).empty()) return out;
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_int(trim(item), key));
  return out;
}

std::string fmt_int_list(const std::vector<int> &v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::string fmt_dbl(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

struct KeyHandler {
  const char *key;
  std::function<void(RunConfig &, const std::string &)> set;
  std::function<std::string(const RunConfig &)> get;
};

const std::vector<KeyHandler> &handlers() {
  static const std::vector<KeyHandler> kHandlers = []() {
    std::vector<KeyHandler> h;
    auto add_int = [&h](const char *key, int RunConfig::*field) {
      h.push_back({key,
                   [field, key](RunConfig &c, const std::string &v) {
                     c.*field = parse_int(v, key);
                   },
                   [field](const RunConfig &c) {
                     return std::to_string(c.*field);
                   }});
    };
    auto add_dbl = [&h](const char *key, double RunConfig::*field) {
      h.push_back({key,
                   [field, key](RunConfig &c, const std::string &v) {
                     c.*field = parse_dbl(v, key);
                   },
                   [field](const RunConfig &c) { return fmt_dbl(c.*field); }});
    };
    auto add_str = [&h](const char *key, std::string RunConfig::*field) {
      h.push_back({key,
                   [field](RunConfig &c, const std::string &v) { c.*field = v; },
                   [field](const RunConfig &c) { return c.*field; }});
    };
    auto add_list = [&h](const char *key, std::vector<int> RunConfig::*field) {
      h.push_back({key,
                   [field, key](RunConfig &c, const std::string &v) {
                     c.*field = parse_int_list(v, key);
                   },
                   [field](const RunConfig &c) {
                     return fmt_int_list(c.*field);
                   }});
    };

    add_list("stage_channels", &RunConfig::stage_channels);
    add_int("num_classes", &RunConfig::num_classes);
    add_int("context", &RunConfig::context);
    add_int("feat_dim", &RunConfig::feat_dim);
    add_int("embedding_dim", &RunConfig::embedding_dim);
    add_int("generator_hidden", &RunConfig::generator_hidden);
    add_str("fusion", &RunConfig::fusion);
    add_list("at_blocks", &RunConfig::at_blocks);
    add_str("scale_mode", &RunConfig::scale_mode);
    add_str("bias_mode", &RunConfig::bias_mode);

    add_int("sample_rate", &RunConfig::sample_rate);
    add_dbl("frame_length_ms", &RunConfig::frame_length_ms);
    add_dbl("frame_shift_ms", &RunConfig::frame_shift_ms);
    add_int("num_ceps", &RunConfig::num_ceps);
    add_int("num_filters", &RunConfig::num_filters);
    add_int("fft_size", &RunConfig::fft_size);
    add_dbl("preemphasis", &RunConfig::preemphasis);
    h.push_back({"cmn",
                 [](RunConfig &c, const std::string &v) {
                   c.cmn = parse_bool(v, "cmn");
                 },
                 [](const RunConfig &c) { return c.cmn ? "true" : "false"; }});

    add_dbl("initial_lr", &RunConfig::initial_lr);
    add_dbl("momentum", &RunConfig::momentum);
    add_int("batch_size", &RunConfig::batch_size);
    add_dbl("improvement_threshold", &RunConfig::improvement_threshold);
    add_int("plateau_epochs", &RunConfig::plateau_epochs);
    add_int("max_decays", &RunConfig::max_decays);
    add_int("max_epochs", &RunConfig::max_epochs);
    add_int("repeats", &RunConfig::repeats);
    h.push_back({"seed",
                 [](RunConfig &c, const std::string &v) {
                   c.seed = parse_u64(v, "seed");
                 },
                 [](const RunConfig &c) { return std::to_string(c.seed); }});

    add_list("sirs", &RunConfig::sirs);

    add_int("toy_speakers", &RunConfig::toy_speakers);
    add_int("toy_classes", &RunConfig::toy_classes);
    add_int("toy_frames_per_utt", &RunConfig::toy_frames_per_utt);
    add_int("toy_train_utts", &RunConfig::toy_train_utts);
    add_int("toy_cv_utts", &RunConfig::toy_cv_utts);
    add_int("toy_test_utts", &RunConfig::toy_test_utts);
    add_dbl("toy_overlap_fraction", &RunConfig::toy_overlap_fraction);
    add_dbl("toy_noise_std", &RunConfig::toy_noise_std);
    add_dbl("toy_signature_scale", &RunConfig::toy_signature_scale);
    add_int("toy_class_run_length", &RunConfig::toy_class_run_length);
    return h;
  }();
  return kHandlers;
}

}  // namespace

void RunConfig::apply_override(const std::string &key, const std::string &value) {
  for (const auto &h : handlers()) {
    if (key == h.key) {
      h.set(*this, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key: '" + key + "'");
}

RunConfig RunConfig::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value' (" + path + ")");
    cfg.apply_override(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto &h : handlers()) {
    out += h.key;
    out += " = ";
    out += h.get(*this);
    out += "\n";
  }
  return out;
}

void RunConfig::validate() const {
  model_config().validate();
  conditioning_config().validate();
  train_config().schedule.validate();
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (sirs.empty()) throw ConfigError("sirs must be non-empty");
}

ModelConfig RunConfig::model_config() const {
  if (stage_channels.size() != 4)
    throw ConfigError("stage_channels must list exactly 4 stages");
  ModelConfig mc;
  mc.stage_channels = {stage_channels[0], stage_channels[1], stage_channels[2],
                       stage_channels[3]};
  mc.num_classes = num_classes;
  mc.input_height = 2 * context + 1;
  mc.input_width = feat_dim;
  mc.embedding_dim = embedding_dim;
  return mc;
}

ConditioningConfig RunConfig::conditioning_config() const {
  ConditioningConfig cc;
  cc.fusion = fusion_from_string(fusion);
  cc.at_blocks = cc.fusion == FusionMode::kAffine ? at_blocks : std::vector<int>{};
  cc.scale_mode = scale_mode_from_string(scale_mode);
  cc.bias_mode = bias_mode_from_string(bias_mode);
  cc.generator_hidden = generator_hidden;
  return cc;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig tc;
  tc.batch_size = batch_size;
  tc.momentum = momentum;
  tc.schedule.initial_lr = initial_lr;
  tc.schedule.improvement_threshold = improvement_threshold;
  tc.schedule.plateau_epochs = plateau_epochs;
  tc.schedule.max_decays = max_decays;
  tc.schedule.max_epochs = max_epochs;
  return tc;
}

MfccConfig RunConfig::mfcc_config() const {
  MfccConfig mf;
  mf.sample_rate = sample_rate;
  mf.frame_length_ms = frame_length_ms;
  mf.frame_shift_ms = frame_shift_ms;
  mf.num_ceps = num_ceps;
  mf.num_filters = num_filters;
  mf.fft_size = fft_size;
  mf.preemphasis = preemphasis;
  mf.apply_cmn = cmn;
  return mf;
}

ToyConfig RunConfig::toy_config() const {
  ToyConfig tc;
  tc.n_speakers = toy_speakers;
  tc.n_classes = toy_classes;
  tc.feat_dim = feat_dim;
  tc.frames_per_utt = toy_frames_per_utt;
  tc.train_utts_per_speaker = toy_train_utts;
  tc.cv_utts_per_speaker = toy_cv_utts;
  tc.test_utts_per_group = toy_test_utts;
  tc.sir_list = sirs;
  tc.overlap_fraction = toy_overlap_fraction;
  tc.noise_std = toy_noise_std;
  tc.signature_scale = toy_signature_scale;
  tc.class_run_length = toy_class_run_length;
  tc.context = context;
  tc.embedding_dim = embedding_dim;
  tc.seed = seed;
  return tc;
}

std::string RunConfig::variant_name() const {
  FusionMode fm = fusion_from_string(fusion);
  if (fm == FusionMode::kNone) return "resnet18";
  if (fm == FusionMode::kInputBias) return "resnet18_cond_bias";
  if (fm == FusionMode::kMiddleFusion) return "resnet18_middle_fusion";

  std::string name = "resnet18_at";
  ScaleMode sm = scale_mode_from_string(scale_mode);
  BiasMode bm = bias_mode_from_string(bias_mode);
  if (sm == ScaleMode::kFrozenOne) name += "_scale1";
  if (sm == ScaleMode::kSigmoid) name += "_sigmoid";
  if (sm == ScaleMode::kTanh) name += "_tanh";
  if (bm == BiasMode::kFrozenZero) name += "_bias0";
  std::vector<int> sorted = at_blocks;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != std::vector<int>{1, 2, 3, 4}) {
    name += "_block";
    for (int b : sorted) name += std::to_string(b);
  }
  return name;
}

}  // namespace tsasr
