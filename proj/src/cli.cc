// src/cli.cc

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

#include "tsasr/cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "tsasr/checkpoint.h"
#include "tsasr/embedding.h"
#include "tsasr/errors.h"
#include "tsasr/experiment.h"
#include "tsasr/gradcheck.h"
#include "tsasr/mixer.h"
#include "tsasr/rng.h"
#include "tsasr/run_config.h"

namespace tsasr {

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  bool seed_set = false;
  uint64_t seed = 0;
};

void add_common(CLI::App *cmd, CommonOpts &opts) {
  cmd->add_option("--config", opts.config_path, "flat key = value config file");
  cmd->add_option("--set", opts.overrides,
                  "override a config key, e.g. --set batch_size=256");
  cmd->add_option("--seed", opts.seed, "experiment seed (overrides config)")
      ->each([&opts](const std::string &) { opts.seed_set = true; });
}

RunConfig resolve_config(const CommonOpts &opts) {
  RunConfig cfg;
  if (!opts.config_path.empty()) cfg = RunConfig::load(opts.config_path);
  for (const auto &kv : opts.overrides) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opts.seed_set) cfg.seed = opts.seed;
  return cfg;
}

void write_resolved_config(const std::string &outdir, const RunConfig &cfg) {
  std::ofstream out(outdir + "/config.resolved");
  if (!out) throw DataError("cannot write " + outdir + "/config.resolved");
  out << cfg.serialize();
}

void ensure_outdir(const std::string &outdir) {
  if (outdir.empty()) throw ConfigError("--outdir is required");
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw DataError("cannot create outdir '" + outdir + "': " + ec.message());
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------

int run_mix(const RunConfig &cfg, const std::string &manifest_path,
            const std::string &outdir) {
  ensure_outdir(outdir);
  auto manifest = read_manifest(manifest_path);
  std::vector<double> sirs(cfg.sirs.begin(), cfg.sirs.end());
  auto entries = build_overlap_corpus(manifest, sirs,
                                      derive_seed(cfg.seed, "mix"), outdir);
  write_mixture_manifest(outdir + "/mixtures.tsv", entries);

  // Companion 3-column manifest (mix_id, target speaker, wav) so mixtures can
  // be featurized like any utterance.
  std::map<std::string, std::string> speaker_of;
  for (const auto &e : manifest) speaker_of[e.utt_id] = e.speaker_id;
  std::vector<UttEntry> utt_view;
  for (const auto &e : entries)
    utt_view.push_back({e.mix_id, speaker_of.at(e.target_utt), e.wav_path});
  write_manifest(outdir + "/mixtures_utt.tsv", utt_view);
  write_resolved_config(outdir, cfg);
  std::cout << "mix: wrote " << entries.size() << " mixtures to " << outdir
            << "\n";
  return kExitOk;
}

int run_featurize(const RunConfig &cfg, const std::string &manifest_path,
                  const std::string &outdir) {
  ensure_outdir(outdir);
  auto manifest = read_manifest(manifest_path);
  if (manifest.empty()) throw DataError("empty manifest: " + manifest_path);
  MfccConfig mfcc_cfg = cfg.mfcc_config();
  std::vector<UttEntry> feat_manifest;
  for (const auto &e : manifest) {
    Waveform w = load_wav(e.path);
    FeatureMatrix f = compute_mfcc(w, mfcc_cfg);
    std::string path = outdir + "/" + e.utt_id + ".atfm";
    write_features(path, f);
    feat_manifest.push_back({e.utt_id, e.speaker_id, path});
  }
  write_manifest(outdir + "/features.tsv", feat_manifest);
  write_resolved_config(outdir, cfg);
  std::cout << "featurize: wrote " << feat_manifest.size() << " feature files to "
            << outdir << "\n";
  return kExitOk;
}

int run_embed(const RunConfig &cfg, const std::string &feat_manifest_path,
              const std::string &outdir) {
  ensure_outdir(outdir);
  auto manifest = read_manifest(feat_manifest_path);
  if (manifest.empty())
    throw DataError("empty feature manifest: " + feat_manifest_path);

  std::map<std::string, std::vector<FeatureMatrix>> by_speaker;
  std::vector<std::string> speaker_order;
  for (const auto &e : manifest) {
    if (!by_speaker.count(e.speaker_id)) speaker_order.push_back(e.speaker_id);
    by_speaker[e.speaker_id].push_back(read_features(e.path));
  }

  std::vector<EmbeddingEntry> entries;
  for (const auto &speaker : speaker_order) {
    SpeakerEmbedding emb =
        stats_embedding(by_speaker[speaker], cfg.embedding_dim,
                        derive_seed(cfg.seed, "embed:" + speaker));
    emb.speaker_id = speaker;
    emb = normalize_embedding(emb);
    std::string path = outdir + "/" + speaker + ".atem";
    save_embedding(path, emb);
    entries.push_back({speaker, path});
  }
  write_embedding_manifest(outdir + "/embeddings.tsv", entries);
  write_resolved_config(outdir, cfg);
  std::cout << "embed: wrote " << entries.size() << " embeddings to " << outdir
            << "\n";
  return kExitOk;
}

int run_train(const RunConfig &cfg, const std::string &outdir) {
  ensure_outdir(outdir);
  cfg.validate();
  ToyCorpus corpus = make_toy_corpus(cfg.toy_config());

  ExperimentConfig exp;
  exp.variant_name = cfg.variant_name();
  exp.model = cfg.model_config();
  exp.conditioning = cfg.conditioning_config();
  exp.train = cfg.train_config();
  exp.n_repeats = cfg.repeats;
  exp.base_seed = derive_seed(cfg.seed, "train");

  const std::string provenance = cfg.serialize();
  auto per_run = [&](int run, AcousticModel &model, const RunOutcome &outcome) {
    save_checkpoint(outdir + "/run" + std::to_string(run) + ".atck",
                    model.parameters());
    write_training_log(outdir + "/run" + std::to_string(run) + "_train_log.csv",
                       outcome.log, provenance);
  };
  ExperimentResult result = run_experiment(exp, corpus, per_run);

  write_results_csv(outdir + "/results.csv", {result}, provenance);
  write_runs_csv(outdir + "/results_runs.csv", {result}, provenance);
  write_resolved_config(outdir, cfg);

  std::cout << "train: variant " << result.variant_name << ", "
            << result.runs.size() << " run(s)\n";
  for (const auto &g : result.mean_metrics)
    std::cout << "  " << group_name(g.tag) << ": accuracy "
              << fmt_g17(g.frame_accuracy) << ", cross-entropy "
              << fmt_g17(g.mean_cross_entropy) << "\n";
  return kExitOk;
}

int run_eval(const RunConfig &cfg, const std::string &checkpoint_path,
             const std::string &outdir) {
  ensure_outdir(outdir);
  cfg.validate();
  ToyCorpus corpus = make_toy_corpus(cfg.toy_config());
  AcousticModel model(cfg.model_config(), cfg.conditioning_config(), cfg.seed);
  load_checkpoint(checkpoint_path, model.parameters());

  // Batch-norm running stats are not serialized, so prime them with one
  // train-mode pass over a cv batch before eval-mode scoring.
  {
    const int warm = std::min(cfg.batch_size, corpus.cv.size());
    std::vector<int> indices(warm);
    for (int i = 0; i < warm; ++i) indices[i] = i;
    nn::Tensor4 x = corpus.cv.gather(indices);
    nn::Matrix z(warm, corpus.embeddings.cols);
    for (int i = 0; i < warm; ++i)
      std::copy(corpus.embeddings.row(corpus.cv.speakers[indices[i]]),
                corpus.embeddings.row(corpus.cv.speakers[indices[i]]) +
                    corpus.embeddings.cols,
                z.row(i));
    const bool needs_z =
        model.conditioning().fusion != FusionMode::kNone;
    model.forward(x, needs_z ? &z : nullptr, nn::Mode::kTrain);
  }

  auto metrics = evaluate_model(model, corpus.test, corpus.embeddings);
  std::ofstream out(outdir + "/eval.csv");
  if (!out) throw DataError("cannot write " + outdir + "/eval.csv");
  std::istringstream prov(cfg.serialize());
  std::string line;
  while (std::getline(prov, line)) out << "# " << line << "\n";
  out << "group,frames,mean_cross_entropy,frame_accuracy\n";
  for (const auto &g : metrics)
    out << group_name(g.tag) << ',' << g.frames << ','
        << fmt_g17(g.mean_cross_entropy) << ',' << fmt_g17(g.frame_accuracy)
        << '\n';
  write_resolved_config(outdir, cfg);

  std::cout << "eval: " << checkpoint_path << "\n";
  for (const auto &g : metrics)
    std::cout << "  " << group_name(g.tag) << ": accuracy "
              << fmt_g17(g.frame_accuracy) << " over " << g.frames
              << " frames\n";
  return kExitOk;
}

int run_gradcheck(const RunConfig &cfg, int samples_per_param) {
  cfg.validate();
  ModelConfig mc = cfg.model_config();
  ConditioningConfig cc = cfg.conditioning_config();
  AcousticModel model(mc, cc, cfg.seed);
  const bool needs_z = cc.fusion != FusionMode::kNone;

  // Small random batch in double precision.
  const int batch = 2;
  Gaussian gauss(derive_seed(cfg.seed, "gradcheck-data"));
  nn::Tensor4 x(batch, 1, mc.input_height, mc.input_width);
  for (double &v : x.data) v = gauss.sample();
  nn::Matrix z(batch, mc.embedding_dim);
  for (double &v : z.data) v = gauss.sample();
  std::vector<int> labels(batch);
  for (int i = 0; i < batch; ++i)
    labels[i] = static_cast<int>(i % mc.num_classes);

  // Give the generator non-degenerate weights so its gradients are exercised.
  if (model.generator()) {
    Gaussian gw(derive_seed(cfg.seed, "gradcheck-generator"));
    for (double &v : model.generator()->fc2.weight.value)
      v = gw.sample(0.0, 0.05);
  }

  auto loss_fn = [&]() {
    nn::Matrix logits = model.forward(x, needs_z ? &z : nullptr, nn::Mode::kTrain);
    return nn::softmax_cross_entropy(logits, labels).loss;
  };
  nn::Matrix logits = model.forward(x, needs_z ? &z : nullptr, nn::Mode::kTrain);
  auto xent = nn::softmax_cross_entropy(logits, labels);
  model.backward(xent.grad);

  auto report = nn::finite_diff_check(model.parameters(), loss_fn,
                                      samples_per_param, 1e-5,
                                      derive_seed(cfg.seed, "gradcheck"));
  std::cout << "gradcheck: max relative error " << fmt_g17(report.max_rel_err)
            << " (" << report.worst_param << ") over "
            << report.scalars_checked << " scalars\n";
  if (!report.ok()) {
    std::cerr << "gradcheck: FAILED (threshold 1e-4)\n";
    return kExitNumeric;
  }
  return kExitOk;
}

int run_report(const std::vector<std::string> &inputs,
               const std::string &output) {
  std::vector<RunRow> rows;
  for (const auto &path : inputs) {
    auto file_rows = read_runs_csv(path);
    rows.insert(rows.end(), file_rows.begin(), file_rows.end());
  }
  write_report(output, rows);
  std::ifstream echo(output);
  std::string line;
  while (std::getline(echo, line))
    if (!line.empty() && line[0] != '#') std::cout << line << "\n";
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char *const *argv) {
  CLI::App app{"Speaker-conditioned acoustic model experiment tool"};
  app.require_subcommand(1);

  CommonOpts mix_opts, feat_opts, embed_opts, train_opts, eval_opts,
      grad_opts, report_opts;
  std::string mix_manifest, mix_outdir;
  std::string feat_manifest, feat_outdir;
  std::string embed_manifest, embed_outdir;
  std::string train_outdir;
  std::string eval_checkpoint, eval_outdir;
  int grad_samples = 6;
  std::vector<std::string> report_inputs;
  std::string report_output;

  CLI::App *mix = app.add_subcommand("mix", "simulate overlap speech at exact SIRs");
  add_common(mix, mix_opts);
  mix->add_option("--manifest", mix_manifest, "utterance manifest")->required();
  mix->add_option("--outdir", mix_outdir, "output directory")->required();
  mix->add_option("--sirs", [&mix_opts](const std::vector<std::string> &vals) {
        mix_opts.overrides.push_back("sirs=" + vals.back());
        return true;
      }, "comma-separated SIR list in dB");

  CLI::App *feat = app.add_subcommand("featurize", "extract MFCC features to ATFM files");
  add_common(feat, feat_opts);
  feat->add_option("--manifest", feat_manifest, "utterance manifest")->required();
  feat->add_option("--outdir", feat_outdir, "output directory")->required();

  CLI::App *embed = app.add_subcommand("embed", "build per-speaker fallback embeddings");
  add_common(embed, embed_opts);
  embed->add_option("--feat-manifest", embed_manifest, "feature manifest")->required();
  embed->add_option("--outdir", embed_outdir, "output directory")->required();

  CLI::App *train = app.add_subcommand("train", "train on the synthetic toy corpus");
  add_common(train, train_opts);
  train->add_option("--outdir", train_outdir, "output directory")->required();
  train->add_option("--conditioning",
                    [&train_opts](const std::vector<std::string> &vals) {
                      train_opts.overrides.push_back("fusion=" + vals.back());
                      return true;
                    },
                    "fusion mode: none|affine|input_bias|middle_fusion");
  train->add_option("--at-blocks",
                    [&train_opts](const std::vector<std::string> &vals) {
                      train_opts.overrides.push_back("at_blocks=" + vals.back());
                      return true;
                    },
                    "conditioned blocks, e.g. 1 or 1,2,3,4");
  train->add_option("--scale-mode",
                    [&train_opts](const std::vector<std::string> &vals) {
                      train_opts.overrides.push_back("scale_mode=" + vals.back());
                      return true;
                    },
                    "free|frozen_one|sigmoid|tanh");
  train->add_option("--bias-mode",
                    [&train_opts](const std::vector<std::string> &vals) {
                      train_opts.overrides.push_back("bias_mode=" + vals.back());
                      return true;
                    },
                    "free|frozen_zero");
  train->add_option("--repeats",
                    [&train_opts](const std::vector<std::string> &vals) {
                      train_opts.overrides.push_back("repeats=" + vals.back());
                      return true;
                    },
                    "number of repeated runs (seeds base+i)");

  CLI::App *eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint per SIR group");
  add_common(eval_cmd, eval_opts);
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "ATCK checkpoint")->required();
  eval_cmd->add_option("--outdir", eval_outdir, "output directory")->required();

  CLI::App *grad = app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_common(grad, grad_opts);
  grad->add_option("--samples", grad_samples, "scalars probed per parameter tensor");

  CLI::App *report = app.add_subcommand("report", "merge run CSVs into a summary table");
  add_common(report, report_opts);
  report->add_option("--inputs", report_inputs, "results_runs.csv files")->required();
  report->add_option("--output", report_output, "merged summary CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (mix->parsed()) return run_mix(resolve_config(mix_opts), mix_manifest, mix_outdir);
    if (feat->parsed())
      return run_featurize(resolve_config(feat_opts), feat_manifest, feat_outdir);
    if (embed->parsed())
      return run_embed(resolve_config(embed_opts), embed_manifest, embed_outdir);
    if (train->parsed()) return run_train(resolve_config(train_opts), train_outdir);
    if (eval_cmd->parsed())
      return run_eval(resolve_config(eval_opts), eval_checkpoint, eval_outdir);
    if (grad->parsed()) return run_gradcheck(resolve_config(grad_opts), grad_samples);
    if (report->parsed()) return run_report(report_inputs, report_output);
    std::cerr << "no subcommand given\n";
    return kExitUsage;
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError &e) {
    std::cerr << "numerical check failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception &e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitData;
  }
}

int cli_main(const std::vector<std::string> &args) {
  std::vector<const char *> argv;
  argv.push_back("tsasr");
  for (const auto &a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace tsasr
