// include/tsasr/experiment.h

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

#ifndef TSASR_EXPERIMENT_H_
#define TSASR_EXPERIMENT_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tsasr/model.h"
#include "tsasr/toy_corpus.h"
#include "tsasr/trainer.h"

namespace tsasr {

struct ExperimentConfig {
  std::string variant_name;
  ModelConfig model;
  ConditioningConfig conditioning;
  TrainConfig train;
  int n_repeats = 3;
  uint64_t base_seed = 0;
};

struct RunOutcome {
  uint64_t seed = 0;
  std::vector<EpochRecord> log;
  std::vector<GroupMetrics> metrics;
};

struct ExperimentResult {
  std::string variant_name;
  std::vector<RunOutcome> runs;
  std::vector<GroupMetrics> mean_metrics;  // per-group mean over runs
};

// Trains n_repeats models with seeds base_seed + i on the corpus train/cv
// split and evaluates each on the test groups.  Deterministic in
// (corpus, config, base_seed).  per_run, when set, sees each trained model
// before it is discarded (checkpointing hook).
using RunCallback =
    std::function<void(int run, AcousticModel &model, const RunOutcome &)>;
ExperimentResult run_experiment(const ExperimentConfig &cfg,
                                const ToyCorpus &corpus,
                                const RunCallback &per_run = nullptr);

// Table-2-shaped results: one row per variant, cells are mean frame accuracy:
//   variant,sir_0,...,sir_25,clean_dev,clean_eval
void write_results_csv(const std::string &path,
                       const std::vector<ExperimentResult> &results,
                       const std::string &provenance = "");

// Per-run detail with the same group columns plus run and seed; this is the
// input `report` merges.
void write_runs_csv(const std::string &path,
                    const std::vector<ExperimentResult> &results,
                    const std::string &provenance = "");

struct RunRow {
  std::string variant;
  int run = 0;
  uint64_t seed = 0;
  std::vector<std::string> group_names;
  std::vector<double> accuracies;
};
std::vector<RunRow> read_runs_csv(const std::string &path);

// Merges per-run rows (possibly from several files) into per-variant means,
// written in the Table-2-shaped layout.  Variants keep first-seen order.
void write_report(const std::string &path, const std::vector<RunRow> &rows,
                  const std::string &provenance = "");

}  // namespace tsasr

#endif  // TSASR_EXPERIMENT_H_
