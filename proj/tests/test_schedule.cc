// tests/test_schedule.cc

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
#include <vector>

#include <gtest/gtest.h>

#include "tsasr/errors.h"
#include "tsasr/rng.h"

namespace tsasr {
namespace {

TEST(ScheduleTest, DecayAfterThreePlateauEpochs) {
  TrainSchedule s{ScheduleConfig{}};
  // Improvements vs best: large, then 0.005, 0.0075, 0.0085 (all < 0.01).
  EXPECT_EQ(s.step(1.0), ScheduleAction::kContinue);
  EXPECT_DOUBLE_EQ(s.learning_rate(), 0.01);
  EXPECT_EQ(s.step(0.9950), ScheduleAction::kContinue);
  EXPECT_EQ(s.step(0.9925), ScheduleAction::kContinue);
  EXPECT_EQ(s.step(0.9915), ScheduleAction::kDecay);
  EXPECT_DOUBLE_EQ(s.learning_rate(), 0.005);
  EXPECT_EQ(s.decay_count(), 1);
  EXPECT_EQ(s.plateau_count(), 0);  // counter resets after a decay
}

TEST(ScheduleTest, ImprovementMeasuredAgainstBestSoFar) {
  TrainSchedule s{ScheduleConfig{}};
  s.step(1.0);
  // 0.995 improves by only 0.005 -> best stays 1.0.
  s.step(0.995);
  EXPECT_DOUBLE_EQ(s.best_cv_loss(), 1.0);
  // 0.985 improves by 0.015 vs best -> best moves, plateau resets.
  EXPECT_EQ(s.step(0.985), ScheduleAction::kContinue);
  EXPECT_DOUBLE_EQ(s.best_cv_loss(), 0.985);
  EXPECT_EQ(s.plateau_count(), 0);
}

TEST(ScheduleTest, NoPlateauRunsToMaxEpochs) {
  TrainSchedule s{ScheduleConfig{}};
  double loss = 10.0;
  for (int epoch = 1; epoch <= 99; ++epoch) {
    loss -= 0.02;  // always >= 0.01 improvement
    ASSERT_EQ(s.step(loss), ScheduleAction::kContinue) << epoch;
  }
  loss -= 0.02;
  EXPECT_EQ(s.step(loss), ScheduleAction::kStop);  // hard stop at epoch 100
  EXPECT_EQ(s.epoch(), 100);
  EXPECT_EQ(s.decay_count(), 0);
  EXPECT_DOUBLE_EQ(s.learning_rate(), 0.01);
}

TEST(ScheduleTest, StopAfterSixthDecayPlateau) {
  TrainSchedule s{ScheduleConfig{}};
  s.step(1.0);
  // Six decays: each needs three plateau epochs (identical losses).
  for (int d = 1; d <= 6; ++d) {
    ASSERT_EQ(s.step(1.0), ScheduleAction::kContinue);
    ASSERT_EQ(s.step(1.0), ScheduleAction::kContinue);
    ASSERT_EQ(s.step(1.0), ScheduleAction::kDecay);
    ASSERT_EQ(s.decay_count(), d);
    ASSERT_NEAR(s.learning_rate(), 0.01 * std::pow(0.5, d), 1e-15);
  }
  // Budget exhausted: the next completed plateau stops instead of decaying.
  EXPECT_EQ(s.step(1.0), ScheduleAction::kContinue);
  EXPECT_EQ(s.step(1.0), ScheduleAction::kContinue);
  EXPECT_EQ(s.step(1.0), ScheduleAction::kStop);
  EXPECT_EQ(s.decay_count(), 6);
}

TEST(ScheduleTest, LearningRateFollowsDecayCount) {
  std::mt19937_64 rng(5);
  TrainSchedule s{ScheduleConfig{}};
  for (;;) {
    double loss = 1.0 + uniform_unit(rng) * 0.005;
    ScheduleAction a = s.step(loss);
    ASSERT_NEAR(s.learning_rate(), 0.01 * std::pow(0.5, s.decay_count()), 1e-15);
    ASSERT_LE(s.decay_count(), 6);
    ASSERT_LE(s.epoch(), 100);
    if (a == ScheduleAction::kStop) break;
  }
}

TEST(ScheduleTest, ReplayReproducesTrajectory) {
  // Any recorded cv-loss sequence replays to the identical lr trajectory.
  std::mt19937_64 rng(9);
  std::vector<double> losses;
  std::vector<double> lrs;
  std::vector<int> decays;
  {
    TrainSchedule s{ScheduleConfig{}};
    double level = 2.0;
    for (;;) {
      level -= uniform_unit(rng) * 0.02;
      losses.push_back(level);
      ScheduleAction a = s.step(level);
      lrs.push_back(s.learning_rate());
      decays.push_back(s.decay_count());
      if (a == ScheduleAction::kStop) break;
    }
  }
  TrainSchedule replay{ScheduleConfig{}};
  for (size_t i = 0; i < losses.size(); ++i) {
    replay.step(losses[i]);
    ASSERT_EQ(replay.learning_rate(), lrs[i]) << i;
    ASSERT_EQ(replay.decay_count(), decays[i]) << i;
  }
}

TEST(ScheduleTest, StepAfterStopIsStateError) {
  ScheduleConfig cfg;
  cfg.max_epochs = 1;
  TrainSchedule s{cfg};
  EXPECT_EQ(s.step(1.0), ScheduleAction::kStop);
  EXPECT_THROW(s.step(0.5), StateError);
}

TEST(ScheduleTest, NonFiniteLossRejected) {
  TrainSchedule s{ScheduleConfig{}};
  EXPECT_THROW(s.step(std::nan("")), NumericError);
}

TEST(ScheduleTest, ConfigValidation) {
  ScheduleConfig cfg;
  cfg.max_epochs = 101;
  EXPECT_THROW(TrainSchedule{cfg}, ConfigError);
  cfg.max_epochs = 100;
  cfg.decay_factor = 1.0;
  EXPECT_THROW(TrainSchedule{cfg}, ConfigError);
}

}  // namespace
}  // namespace tsasr
