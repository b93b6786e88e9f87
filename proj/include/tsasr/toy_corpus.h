// include/tsasr/toy_corpus.h

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

#ifndef TSASR_TOY_CORPUS_H_
#define TSASR_TOY_CORPUS_H_

#include <cstdint>
#include <vector>

#include "tsasr/tensor.h"
#include "tsasr/trainer.h"

namespace tsasr {

// Desk-scale synthetic "speech": class k has a base spectral template, each
// speaker adds a fixed signature vector, frames are template + signature +
// noise, and overlapped utterances are average-power-matched sums of two
// speakers' frame sequences at a toy SIR.  Labels always follow the target
// speaker.  The true signatures (padded to embedding_dim, unit norm) serve as
// the speaker embeddings.
struct ToyConfig {
  int n_speakers = 8;
  int n_classes = 10;
  int feat_dim = 13;
  int frames_per_utt = 200;
  int train_utts_per_speaker = 9;  // train/cv is a 90/10 split by utterance
  int cv_utts_per_speaker = 1;
  int test_utts_per_group = 1;     // per speaker, per test group
  std::vector<int> sir_list{0, 5, 10, 15, 20, 25};
  double overlap_fraction = 0.5;   // share of overlapped train/cv utterances
  double noise_std = 0.3;
  double signature_scale = 1.0;
  int class_run_length = 5;        // frames per class segment
  int context = 10;                // window = 2*context + 1
  int embedding_dim = 32;          // >= feat_dim
  uint64_t seed = 0;

  void validate() const;
};

struct ToyCorpus {
  ToyConfig config;
  LabeledFrameSet train;
  LabeledFrameSet cv;
  // Test groups: one clean_dev and one clean_eval partition plus one group
  // per SIR in sir_list, all tagged in sir_tags.
  LabeledFrameSet test;
  nn::Matrix embeddings;  // n_speakers x embedding_dim, unit rows
};

ToyCorpus make_toy_corpus(const ToyConfig &cfg);

// Spec-default corpus: remaining knobs from ToyConfig defaults.
ToyCorpus make_toy_corpus(int n_speakers, int n_classes, int frames_per_utt,
                          uint64_t seed);

}  // namespace tsasr

#endif  // TSASR_TOY_CORPUS_H_
