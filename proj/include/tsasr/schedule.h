// include/tsasr/schedule.h

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

#ifndef TSASR_SCHEDULE_H_
#define TSASR_SCHEDULE_H_

#include <limits>
#include <string>

namespace tsasr {

struct ScheduleConfig {
  double initial_lr = 0.01;
  double improvement_threshold = 0.01;  // cv-loss improvement vs best so far
  int plateau_epochs = 3;               // successive sub-threshold epochs
  double decay_factor = 0.5;
  int max_decays = 6;
  int max_epochs = 100;

  void validate() const;
};

enum class ScheduleAction { kContinue, kDecay, kStop };
const char *to_string(ScheduleAction a);

// Plateau schedule with early stopping: the learning rate halves after
// plateau_epochs successive epochs whose improvement over the best cv loss is
// below the threshold; training stops when a plateau completes with the decay
// budget already spent, or at max_epochs.  The plateau counter resets after
// each decay; the best loss only moves on improvements at or above the
// threshold.
class TrainSchedule {
 public:
  explicit TrainSchedule(const ScheduleConfig &cfg);

  // Call once per completed epoch with that epoch's cv loss.
  ScheduleAction step(double cv_loss);

  int epoch() const { return epoch_; }
  double learning_rate() const { return lr_; }
  int decay_count() const { return decay_count_; }
  int plateau_count() const { return plateau_count_; }
  double best_cv_loss() const { return best_cv_loss_; }

 private:
  ScheduleConfig cfg_;
  int epoch_ = 0;
  double lr_;
  int decay_count_ = 0;
  int plateau_count_ = 0;
  double best_cv_loss_ = std::numeric_limits<double>::infinity();
  bool stopped_ = false;
};

}  // namespace tsasr

#endif  // TSASR_SCHEDULE_H_
