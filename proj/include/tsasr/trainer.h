// include/tsasr/trainer.h

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

#ifndef TSASR_TRAINER_H_
#define TSASR_TRAINER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tsasr/model.h"
#include "tsasr/schedule.h"
#include "tsasr/tensor.h"

namespace tsasr {

// Frame-group tags: non-negative values are SIR levels in dB, the two clean
// test partitions use the sentinels below.
constexpr int kTagCleanDev = -1000;
constexpr int kTagCleanEval = -1001;
std::string group_name(int tag);

// Context windows with target-speaker labels.  For mixtures the label and
// speaker are the target's, and sir_tags records the mixing SIR.
struct LabeledFrameSet {
  int window_h = 0;  // 2c + 1
  int dim = 0;
  std::vector<float> windows;  // n x window_h x dim
  std::vector<int> labels;
  std::vector<int> speakers;  // target-speaker index
  std::vector<int> sir_tags;

  int size() const { return static_cast<int>(labels.size()); }
  void append_window(const float *w, int label, int speaker, int tag);
  // Windows `indices` as a B x 1 x window_h x dim batch.
  nn::Tensor4 gather(const std::vector<int> &indices) const;
};

struct TrainConfig {
  int batch_size = 1024;
  double momentum = 0.9;
  ScheduleConfig schedule;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double cv_loss = 0.0;
  double lr = 0.0;
  int decay_count = 0;
  std::string action;
};

// epoch,train_loss,cv_loss,lr,decay_count,action with %.17g numbers, so a
// fixed seed reproduces the file byte for byte.
void write_training_log(const std::string &path,
                        const std::vector<EpochRecord> &log,
                        const std::string &provenance = "");
std::vector<EpochRecord> read_training_log(const std::string &path);

// Frame-shuffled minibatch SGD with the plateau schedule; deterministic in
// (data, config, seed).  The embeddings matrix is indexed by speaker id and
// is ignored by unconditioned models.
std::vector<EpochRecord> train_model(AcousticModel &model,
                                     const LabeledFrameSet &train_set,
                                     const LabeledFrameSet &cv_set,
                                     const nn::Matrix &speaker_embeddings,
                                     const TrainConfig &cfg, uint64_t seed);

struct GroupMetrics {
  int tag = 0;
  int frames = 0;
  double mean_cross_entropy = 0.0;
  double frame_accuracy = 0.0;
};

// Eval-mode metrics per SIR group (ascending SIR, then clean_dev, clean_eval),
// plus an "overall" entry at the end with tag INT_MIN.
constexpr int kTagOverall = INT32_MIN;
std::vector<GroupMetrics> evaluate_model(AcousticModel &model,
                                         const LabeledFrameSet &test_set,
                                         const nn::Matrix &speaker_embeddings,
                                         int batch_size = 512);

}  // namespace tsasr

#endif  // TSASR_TRAINER_H_
