// src/schedule.cc

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

#include "tsasr/schedule.h"

#include <cmath>

#include "tsasr/errors.h"

namespace tsasr {

void ScheduleConfig::validate() const {
  if (initial_lr <= 0.0) throw ConfigError("schedule: initial_lr must be > 0");
  if (improvement_threshold < 0.0)
    throw ConfigError("schedule: improvement_threshold must be >= 0");
  if (plateau_epochs < 1) throw ConfigError("schedule: plateau_epochs must be >= 1");
  if (decay_factor <= 0.0 || decay_factor >= 1.0)
    throw ConfigError("schedule: decay_factor must be in (0, 1)");
  if (max_decays < 0) throw ConfigError("schedule: max_decays must be >= 0");
  if (max_epochs < 1 || max_epochs > 100)
    throw ConfigError("schedule: max_epochs must be in [1, 100]");
}

const char *to_string(ScheduleAction a) {
  switch (a) {
    case ScheduleAction::kContinue: return "continue";
    case ScheduleAction::kDecay: return "decay";
    case ScheduleAction::kStop: return "stop";
  }
  return "?";
}

TrainSchedule::TrainSchedule(const ScheduleConfig &cfg) : cfg_(cfg) {
  cfg.validate();
  lr_ = cfg.initial_lr;
}

ScheduleAction TrainSchedule::step(double cv_loss) {
  if (stopped_) throw StateError("TrainSchedule: step after stop");
  if (!std::isfinite(cv_loss))
    throw NumericError("TrainSchedule: non-finite cv loss");

  ++epoch_;
  const double improvement = best_cv_loss_ - cv_loss;
  ScheduleAction action = ScheduleAction::kContinue;

  if (improvement < cfg_.improvement_threshold) {
    ++plateau_count_;
    if (plateau_count_ >= cfg_.plateau_epochs) {
      if (decay_count_ >= cfg_.max_decays) {
        action = ScheduleAction::kStop;
      } else {
        lr_ *= cfg_.decay_factor;
        ++decay_count_;
        plateau_count_ = 0;
        action = ScheduleAction::kDecay;
      }
    }
  } else {
    plateau_count_ = 0;
    best_cv_loss_ = cv_loss;
  }

  if (epoch_ >= cfg_.max_epochs) action = ScheduleAction::kStop;
  if (action == ScheduleAction::kStop) stopped_ = true;
  return action;
}

}  // namespace tsasr
