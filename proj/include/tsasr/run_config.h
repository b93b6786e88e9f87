// include/tsasr/run_config.h

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

#ifndef TSASR_RUN_CONFIG_H_
#define TSASR_RUN_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tsasr/mfcc.h"
#include "tsasr/model.h"
#include "tsasr/schedule.h"
#include "tsasr/toy_corpus.h"
#include "tsasr/trainer.h"

namespace tsasr {

// Flat `key = value` experiment configuration.  Unknown keys are rejected;
// every resolved value is serialized into the artifacts each command writes.
// Defaults are the desk-scale preset; the paper-scale model is selected by
// overriding stage_channels/num_classes/embedding_dim.
struct RunConfig {
  // model
  std::vector<int> stage_channels{8, 16, 32, 64};
  int num_classes = 10;
  int context = 10;
  int feat_dim = 13;
  int embedding_dim = 32;
  int generator_hidden = 64;
  std::string fusion = "affine";
  std::vector<int> at_blocks{1, 2, 3, 4};
  std::string scale_mode = "free";
  std::string bias_mode = "free";

  // mfcc front-end
  int sample_rate = 16000;
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  int num_ceps = 13;
  int num_filters = 23;
  int fft_size = 512;
  double preemphasis = 0.97;
  bool cmn = true;

  // optimization
  double initial_lr = 0.01;
  double momentum = 0.9;
  int batch_size = 1024;
  double improvement_threshold = 0.01;
  int plateau_epochs = 3;
  int max_decays = 6;
  int max_epochs = 100;
  int repeats = 3;
  uint64_t seed = 0;

  // mixing
  std::vector<int> sirs{0, 5, 10, 15, 20, 25};

  // toy corpus
  int toy_speakers = 8;
  int toy_classes = 10;
  int toy_frames_per_utt = 200;
  int toy_train_utts = 9;
  int toy_cv_utts = 1;
  int toy_test_utts = 1;
  double toy_overlap_fraction = 0.5;
  double toy_noise_std = 0.3;
  double toy_signature_scale = 1.0;
  int toy_class_run_length = 5;

  static RunConfig load(const std::string &path);
  void apply_override(const std::string &key, const std::string &value);
  void validate() const;

  // Full resolved key = value text, one key per line, fixed order.
  std::string serialize() const;

  ModelConfig model_config() const;
  ConditioningConfig conditioning_config() const;
  TrainConfig train_config() const;
  MfccConfig mfcc_config() const;
  ToyConfig toy_config() const;
  std::string variant_name() const;
};

}  // namespace tsasr

#endif  // TSASR_RUN_CONFIG_H_
