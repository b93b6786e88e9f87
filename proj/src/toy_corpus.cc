// src/toy_corpus.cc

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

#include "tsasr/toy_corpus.h"

#include <cmath>

#include "tsasr/errors.h"
#include "tsasr/features.h"
#include "tsasr/rng.h"

namespace tsasr {

void ToyConfig::validate() const {
  if (n_speakers < 2) throw ConfigError("toy corpus: need at least 2 speakers");
  if (n_classes < 2) throw ConfigError("toy corpus: need at least 2 classes");
  if (feat_dim < 1) throw ConfigError("toy corpus: feat_dim must be >= 1");
  if (frames_per_utt < 1)
    throw ConfigError("toy corpus: frames_per_utt must be >= 1");
  if (train_utts_per_speaker < 1 || cv_utts_per_speaker < 1 ||
      test_utts_per_group < 1)
    throw ConfigError("toy corpus: utterance counts must be >= 1");
  if (overlap_fraction < 0.0 || overlap_fraction > 1.0)
    throw ConfigError("toy corpus: overlap_fraction must be in [0, 1]");
  if (noise_std < 0.0) throw ConfigError("toy corpus: noise_std must be >= 0");
  if (class_run_length < 1)
    throw ConfigError("toy corpus: class_run_length must be >= 1");
  if (context < 0) throw ConfigError("toy corpus: context must be >= 0");
  if (embedding_dim < feat_dim)
    throw ConfigError("toy corpus: embedding_dim must be >= feat_dim");
  if (sir_list.empty()) throw ConfigError("toy corpus: empty sir_list");
}

namespace {

struct ToyUtterance {
  FeatureMatrix frames;     // frames_per_utt x feat_dim
  std::vector<int> labels;  // per frame
};

struct ToyGenerator {
  const ToyConfig &cfg;
  std::vector<std::vector<double>> templates;   // class -> feat_dim
  std::vector<std::vector<double>> signatures;  // speaker -> feat_dim
  std::mt19937_64 choice_rng;
  Gaussian noise;

  ToyGenerator(const ToyConfig &c, uint64_t seed)
      : cfg(c),
        choice_rng(derive_seed(seed, "toy-choices")),
        noise(derive_seed(seed, "toy-noise")) {
    Gaussian proto(derive_seed(seed, "toy-prototypes"));
    templates.resize(cfg.n_classes);
    for (auto &t : templates) {
      t.resize(cfg.feat_dim);
      for (double &v : t) v = proto.sample();
    }
    signatures.resize(cfg.n_speakers);
    for (auto &s : signatures) {
      s.resize(cfg.feat_dim);
      for (double &v : s) v = proto.sample() * cfg.signature_scale;
    }
  }

  ToyUtterance clean_utterance(int speaker) {
    ToyUtterance u;
    u.frames = FeatureMatrix(cfg.frames_per_utt, cfg.feat_dim);
    u.labels.resize(cfg.frames_per_utt);
    int current_class = 0;
    for (int t = 0; t < cfg.frames_per_utt; ++t) {
      if (t % cfg.class_run_length == 0)
        current_class =
            static_cast<int>(bounded_rand(choice_rng, cfg.n_classes));
      u.labels[t] = current_class;
      for (int d = 0; d < cfg.feat_dim; ++d)
        u.frames.at(t, d) = static_cast<float>(templates[current_class][d] +
                                               signatures[speaker][d] +
                                               noise.sample(0.0, cfg.noise_std));
    }
    return u;
  }

  // Average-power-matched sum: the interferer sequence is scaled so the
  // utterance-level SIR equals sir_db, labels stay the target's.
  ToyUtterance overlap_utterance(int target_speaker, int sir_db) {
    int interferer = target_speaker;
    while (interferer == target_speaker)
      interferer = static_cast<int>(bounded_rand(choice_rng, cfg.n_speakers));

    ToyUtterance target = clean_utterance(target_speaker);
    ToyUtterance other = clean_utterance(interferer);

    auto mean_power = [&](const FeatureMatrix &f) {
      double acc = 0.0;
      for (float v : f.data) acc += static_cast<double>(v) * v;
      return acc / static_cast<double>(f.data.size());
    };
    const double p_t = mean_power(target.frames);
    const double p_i = mean_power(other.frames);
    const double gain =
        std::sqrt(p_t / (p_i * std::pow(10.0, sir_db / 10.0)));

    for (size_t i = 0; i < target.frames.data.size(); ++i)
      target.frames.data[i] = static_cast<float>(
          static_cast<double>(target.frames.data[i]) +
          gain * static_cast<double>(other.frames.data[i]));
    return target;
  }

  void append_utterance(LabeledFrameSet &set, const ToyUtterance &u,
                        int speaker, int tag) {
    ContextBatch batch = expand_context(u.frames, cfg.context);
    const size_t window_size =
        static_cast<size_t>(batch.width) * batch.dim;
    for (int b = 0; b < batch.num_windows; ++b)
      set.append_window(batch.data.data() + b * window_size, u.labels[b],
                        speaker, tag);
  }
};

}  // namespace

ToyCorpus make_toy_corpus(const ToyConfig &cfg) {
  cfg.validate();
  ToyCorpus corpus;
  corpus.config = cfg;

  ToyGenerator gen(cfg, cfg.seed);

  auto init_set = [&cfg](LabeledFrameSet &s) {
    s.window_h = 2 * cfg.context + 1;
    s.dim = cfg.feat_dim;
  };
  init_set(corpus.train);
  init_set(corpus.cv);
  init_set(corpus.test);

  auto fill_split = [&](LabeledFrameSet &set, int utts_per_speaker) {
    for (int s = 0; s < cfg.n_speakers; ++s) {
      for (int u = 0; u < utts_per_speaker; ++u) {
        const bool overlapped =
            uniform_unit(gen.choice_rng) < cfg.overlap_fraction;
        if (overlapped) {
          const int sir = cfg.sir_list[bounded_rand(gen.choice_rng,
                                                    cfg.sir_list.size())];
          gen.append_utterance(set, gen.overlap_utterance(s, sir), s, sir);
        } else {
          gen.append_utterance(set, gen.clean_utterance(s), s, kTagCleanDev);
        }
      }
    }
  };
  fill_split(corpus.train, cfg.train_utts_per_speaker);
  fill_split(corpus.cv, cfg.cv_utts_per_speaker);

  for (int s = 0; s < cfg.n_speakers; ++s) {
    for (int u = 0; u < cfg.test_utts_per_group; ++u) {
      gen.append_utterance(corpus.test, gen.clean_utterance(s), s, kTagCleanDev);
      gen.append_utterance(corpus.test, gen.clean_utterance(s), s, kTagCleanEval);
      for (int sir : cfg.sir_list)
        gen.append_utterance(corpus.test, gen.overlap_utterance(s, sir), s, sir);
    }
  }

  corpus.embeddings = nn::Matrix(cfg.n_speakers, cfg.embedding_dim);
  for (int s = 0; s < cfg.n_speakers; ++s) {
    double norm_sq = 0.0;
    for (int d = 0; d < cfg.feat_dim; ++d)
      norm_sq += gen.signatures[s][d] * gen.signatures[s][d];
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (int d = 0; d < cfg.feat_dim; ++d)
      corpus.embeddings.at(s, d) = gen.signatures[s][d] * inv;
  }
  return corpus;
}

ToyCorpus make_toy_corpus(int n_speakers, int n_classes, int frames_per_utt,
                          uint64_t seed) {
  ToyConfig cfg;
  cfg.n_speakers = n_speakers;
  cfg.n_classes = n_classes;
  cfg.frames_per_utt = frames_per_utt;
  cfg.seed = seed;
  return make_toy_corpus(cfg);
}

}  // namespace tsasr
