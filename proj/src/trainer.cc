// src/trainer.cc

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

#include "tsasr/trainer.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "tsasr/errors.h"
#include "tsasr/layers.h"
#include "tsasr/optimizer.h"
#include "tsasr/rng.h"

namespace tsasr {

using nn::Matrix;
using nn::Mode;
using nn::Tensor4;

std::string group_name(int tag) {
  if (tag == kTagCleanDev) return "clean_dev";
  if (tag == kTagCleanEval) return "clean_eval";
  if (tag == kTagOverall) return "overall";
  return "sir_" + std::to_string(tag);
}

void LabeledFrameSet::append_window(const float *w, int label, int speaker,
                                    int tag) {
  windows.insert(windows.end(), w, w + static_cast<size_t>(window_h) * dim);
  labels.push_back(label);
  speakers.push_back(speaker);
  sir_tags.push_back(tag);
}

Tensor4 LabeledFrameSet::gather(const std::vector<int> &indices) const {
  Tensor4 batch(static_cast<int>(indices.size()), 1, window_h, dim);
  const size_t window_size = static_cast<size_t>(window_h) * dim;
  for (size_t b = 0; b < indices.size(); ++b) {
    const float *src = windows.data() + static_cast<size_t>(indices[b]) * window_size;
    double *dst = batch.data.data() + b * window_size;
    for (size_t j = 0; j < window_size; ++j) dst[j] = src[j];
  }
  return batch;
}

namespace {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Matrix gather_embeddings(const Matrix &speaker_embeddings,
                         const LabeledFrameSet &set,
                         const std::vector<int> &indices) {
  Matrix z(static_cast<int>(indices.size()), speaker_embeddings.cols);
  for (size_t b = 0; b < indices.size(); ++b) {
    const int spk = set.speakers[indices[b]];
    if (spk < 0 || spk >= speaker_embeddings.rows)
      throw DataError("speaker index " + std::to_string(spk) +
                      " outside embedding table");
    std::copy(speaker_embeddings.row(spk),
              speaker_embeddings.row(spk) + speaker_embeddings.cols, z.row(b));
  }
  return z;
}

double mean_cv_loss(AcousticModel &model, const LabeledFrameSet &set,
                    const Matrix &speaker_embeddings, int batch_size) {
  const bool needs_z = model.conditioning().fusion != FusionMode::kNone;
  double total = 0.0;
  for (int start = 0; start < set.size(); start += batch_size) {
    const int end = std::min(start + batch_size, set.size());
    std::vector<int> indices(end - start);
    for (int i = start; i < end; ++i) indices[i - start] = i;
    Tensor4 x = set.gather(indices);
    Matrix z;
    if (needs_z) z = gather_embeddings(speaker_embeddings, set, indices);
    Matrix logits = model.forward(x, needs_z ? &z : nullptr, Mode::kEval);
    std::vector<int> labels(indices.size());
    for (size_t b = 0; b < indices.size(); ++b) labels[b] = set.labels[indices[b]];
    auto xent = nn::softmax_cross_entropy(logits, labels);
    total += xent.loss * static_cast<double>(indices.size());
  }
  return total / set.size();
}

}  // namespace

std::vector<EpochRecord> train_model(AcousticModel &model,
                                     const LabeledFrameSet &train_set,
                                     const LabeledFrameSet &cv_set,
                                     const Matrix &speaker_embeddings,
                                     const TrainConfig &cfg, uint64_t seed) {
  if (train_set.size() == 0 || cv_set.size() == 0)
    throw DataError("train_model: empty train or cv split");
  if (cfg.batch_size < 1) throw ConfigError("train_model: batch_size must be >= 1");

  const bool needs_z = model.conditioning().fusion != FusionMode::kNone;
  nn::SgdMomentum opt(cfg.schedule.initial_lr, cfg.momentum);
  opt.attach(model.parameters());
  TrainSchedule schedule(cfg.schedule);

  std::vector<int> order(train_set.size());
  for (int i = 0; i < train_set.size(); ++i) order[i] = i;

  std::vector<EpochRecord> log;
  for (int epoch = 1;; ++epoch) {
    std::mt19937_64 shuffle_rng(derive_seed(seed, "epoch-shuffle", epoch));
    deterministic_shuffle(order, shuffle_rng);

    double train_loss_sum = 0.0;
    for (int start = 0; start < train_set.size(); start += cfg.batch_size) {
      const int end = std::min(start + cfg.batch_size, train_set.size());
      std::vector<int> indices(order.begin() + start, order.begin() + end);
      Tensor4 x = train_set.gather(indices);
      Matrix z;
      if (needs_z) z = gather_embeddings(speaker_embeddings, train_set, indices);
      Matrix logits = model.forward(x, needs_z ? &z : nullptr, Mode::kTrain);
      std::vector<int> labels(indices.size());
      for (size_t b = 0; b < indices.size(); ++b)
        labels[b] = train_set.labels[indices[b]];
      auto xent = nn::softmax_cross_entropy(logits, labels);
      model.backward(xent.grad);
      opt.step();
      train_loss_sum += xent.loss * static_cast<double>(indices.size());
    }
    const double train_loss = train_loss_sum / train_set.size();
    const double cv_loss =
        mean_cv_loss(model, cv_set, speaker_embeddings, cfg.batch_size);

    ScheduleAction action = schedule.step(cv_loss);
    if (action == ScheduleAction::kDecay)
      opt.set_learning_rate(schedule.learning_rate());

    log.push_back({epoch, train_loss, cv_loss, schedule.learning_rate(),
                   schedule.decay_count(), to_string(action)});
    if (action == ScheduleAction::kStop) break;
  }
  return log;
}

void write_training_log(const std::string &path,
                        const std::vector<EpochRecord> &log,
                        const std::string &provenance) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write training log: " + path);
  if (!provenance.empty()) {
    std::istringstream lines(provenance);
    std::string line;
    while (std::getline(lines, line)) out << "# " << line << '\n';
  }
  out << "epoch,train_loss,cv_loss,lr,decay_count,action\n";
  for (const auto &r : log)
    out << r.epoch << ',' << fmt_g17(r.train_loss) << ',' << fmt_g17(r.cv_loss)
        << ',' << fmt_g17(r.lr) << ',' << r.decay_count << ',' << r.action
        << '\n';
}

std::vector<EpochRecord> read_training_log(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open training log: " + path);
  std::vector<EpochRecord> log;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::istringstream ss(line);
    EpochRecord r;
    std::string field;
    std::getline(ss, field, ',');
    r.epoch = std::stoi(field);
    std::getline(ss, field, ',');
    r.train_loss = std::stod(field);
    std::getline(ss, field, ',');
    r.cv_loss = std::stod(field);
    std::getline(ss, field, ',');
    r.lr = std::stod(field);
    std::getline(ss, field, ',');
    r.decay_count = std::stoi(field);
    std::getline(ss, r.action, ',');
    log.push_back(std::move(r));
  }
  return log;
}

std::vector<GroupMetrics> evaluate_model(AcousticModel &model,
                                         const LabeledFrameSet &test_set,
                                         const Matrix &speaker_embeddings,
                                         int batch_size) {
  if (test_set.size() == 0) throw DataError("evaluate_model: empty test set");
  const bool needs_z = model.conditioning().fusion != FusionMode::kNone;

  std::map<int, GroupMetrics> groups;
  GroupMetrics overall;
  overall.tag = kTagOverall;

  for (int start = 0; start < test_set.size(); start += batch_size) {
    const int end = std::min(start + batch_size, test_set.size());
    std::vector<int> indices(end - start);
    for (int i = start; i < end; ++i) indices[i - start] = i;
    Tensor4 x = test_set.gather(indices);
    Matrix z;
    if (needs_z) z = gather_embeddings(speaker_embeddings, test_set, indices);
    Matrix logits = model.forward(x, needs_z ? &z : nullptr, Mode::kEval);

    std::vector<int> labels(indices.size());
    for (size_t b = 0; b < indices.size(); ++b)
      labels[b] = test_set.labels[indices[b]];
    auto xent_all = nn::softmax_cross_entropy(logits, labels);
    (void)xent_all;  // validates the label range for the whole batch

    for (size_t b = 0; b < indices.size(); ++b) {
      const int idx = indices[b];
      const int label = test_set.labels[idx];
      const double *row = logits.row(static_cast<int>(b));
      int argmax = 0;
      double mx = row[0];
      for (int k = 1; k < logits.cols; ++k)
        if (row[k] > mx) {
          mx = row[k];
          argmax = k;
        }
      // Per-frame cross entropy from the row's log-sum-exp.
      double z_sum = 0.0;
      for (int k = 0; k < logits.cols; ++k) z_sum += std::exp(row[k] - mx);
      const double ce = std::log(z_sum) + mx - row[label];

      GroupMetrics &g = groups[test_set.sir_tags[idx]];
      g.tag = test_set.sir_tags[idx];
      g.frames += 1;
      g.mean_cross_entropy += ce;
      g.frame_accuracy += (argmax == label) ? 1.0 : 0.0;
      overall.frames += 1;
      overall.mean_cross_entropy += ce;
      overall.frame_accuracy += (argmax == label) ? 1.0 : 0.0;
    }
  }

  // Ascending SIR first, then clean_dev, clean_eval, then overall.
  std::vector<GroupMetrics> out;
  for (auto &[tag, g] : groups)
    if (tag != kTagCleanDev && tag != kTagCleanEval) out.push_back(g);
  if (groups.count(kTagCleanDev)) out.push_back(groups[kTagCleanDev]);
  if (groups.count(kTagCleanEval)) out.push_back(groups[kTagCleanEval]);
  out.push_back(overall);
  for (auto &g : out) {
    g.mean_cross_entropy /= g.frames;
    g.frame_accuracy /= g.frames;
  }
  return out;
}

}  // namespace tsasr
