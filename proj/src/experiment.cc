// src/experiment.cc

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

#include "tsasr/experiment.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "tsasr/errors.h"

namespace tsasr {

ExperimentResult run_experiment(const ExperimentConfig &cfg,
                                const ToyCorpus &corpus,
                                const RunCallback &per_run) {
  if (cfg.n_repeats < 1)
    throw ConfigError("run_experiment: n_repeats must be >= 1");

  ExperimentResult result;
  result.variant_name = cfg.variant_name;

  for (int r = 0; r < cfg.n_repeats; ++r) {
    RunOutcome run;
    run.seed = cfg.base_seed + static_cast<uint64_t>(r);
    AcousticModel model(cfg.model, cfg.conditioning, run.seed);
    run.log = train_model(model, corpus.train, corpus.cv, corpus.embeddings,
                          cfg.train, run.seed);
    run.metrics = evaluate_model(model, corpus.test, corpus.embeddings);
    if (per_run) per_run(r, model, run);
    result.runs.push_back(std::move(run));
  }

  // Group-wise arithmetic mean over runs (group lists are identical because
  // every run scores the same test set).
  result.mean_metrics = result.runs.front().metrics;
  for (size_t g = 0; g < result.mean_metrics.size(); ++g) {
    double acc = 0.0, ce = 0.0;
    for (const auto &run : result.runs) {
      acc += run.metrics[g].frame_accuracy;
      ce += run.metrics[g].mean_cross_entropy;
    }
    result.mean_metrics[g].frame_accuracy = acc / result.runs.size();
    result.mean_metrics[g].mean_cross_entropy = ce / result.runs.size();
  }
  return result;
}

namespace {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_provenance(std::ofstream &out, const std::string &provenance) {
  if (provenance.empty()) return;
  std::istringstream lines(provenance);
  std::string line;
  while (std::getline(lines, line)) out << "# " << line << '\n';
}

// Group columns excluding the trailing "overall" entry.
std::vector<const GroupMetrics *> table_groups(
    const std::vector<GroupMetrics> &metrics) {
  std::vector<const GroupMetrics *> out;
  for (const auto &g : metrics)
    if (g.tag != kTagOverall) out.push_back(&g);
  return out;
}

}  // namespace

void write_results_csv(const std::string &path,
                       const std::vector<ExperimentResult> &results,
                       const std::string &provenance) {
  if (results.empty()) throw DataError("write_results_csv: no results");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write results CSV: " + path);
  write_provenance(out, provenance);

  auto header_groups = table_groups(results.front().mean_metrics);
  out << "variant";
  for (const auto *g : header_groups) out << ',' << group_name(g->tag);
  out << '\n';
  for (const auto &res : results) {
    out << res.variant_name;
    for (const auto *g : table_groups(res.mean_metrics))
      out << ',' << fmt_g17(g->frame_accuracy);
    out << '\n';
  }
}

void write_runs_csv(const std::string &path,
                    const std::vector<ExperimentResult> &results,
                    const std::string &provenance) {
  if (results.empty()) throw DataError("write_runs_csv: no results");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write runs CSV: " + path);
  write_provenance(out, provenance);

  auto header_groups = table_groups(results.front().runs.front().metrics);
  out << "variant,run,seed";
  for (const auto *g : header_groups) out << ',' << group_name(g->tag);
  out << '\n';
  for (const auto &res : results) {
    for (size_t r = 0; r < res.runs.size(); ++r) {
      out << res.variant_name << ',' << r << ',' << res.runs[r].seed;
      for (const auto *g : table_groups(res.runs[r].metrics))
        out << ',' << fmt_g17(g->frame_accuracy);
      out << '\n';
    }
  }
}

std::vector<RunRow> read_runs_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open runs CSV: " + path);
  std::string line;
  std::vector<std::string> columns;
  std::vector<RunRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (columns.empty()) {
      columns = fields;
      if (columns.size() < 4 || columns[0] != "variant" || columns[1] != "run" ||
          columns[2] != "seed")
        throw FormatError("unexpected runs CSV header: " + path);
      continue;
    }
    if (fields.size() != columns.size())
      throw FormatError("ragged runs CSV row: " + path);
    RunRow row;
    row.variant = fields[0];
    row.run = std::stoi(fields[1]);
    row.seed = std::stoull(fields[2]);
    for (size_t i = 3; i < fields.size(); ++i) {
      row.group_names.push_back(columns[i]);
      row.accuracies.push_back(std::stod(fields[i]));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("runs CSV has no data rows: " + path);
  return rows;
}

void write_report(const std::string &path, const std::vector<RunRow> &rows,
                  const std::string &provenance) {
  if (rows.empty()) throw DataError("write_report: no rows");
  const auto &groups = rows.front().group_names;
  for (const auto &row : rows)
    if (row.group_names != groups)
      throw FormatError("write_report: inconsistent group columns across rows");

  std::vector<std::string> variant_order;
  std::map<std::string, std::pair<std::vector<double>, int>> sums;
  for (const auto &row : rows) {
    auto it = sums.find(row.variant);
    if (it == sums.end()) {
      variant_order.push_back(row.variant);
      it = sums.emplace(row.variant,
                        std::make_pair(std::vector<double>(groups.size(), 0.0), 0))
               .first;
    }
    for (size_t i = 0; i < groups.size(); ++i)
      it->second.first[i] += row.accuracies[i];
    it->second.second += 1;
  }

  std::ofstream out(path);
  if (!out) throw DataError("cannot write report: " + path);
  write_provenance(out, provenance);
  out << "variant";
  for (const auto &g : groups) out << ',' << g;
  out << '\n';
  for (const auto &variant : variant_order) {
    const auto &[sum, count] = sums[variant];
    out << variant;
    for (double s : sum) out << ',' << fmt_g17(s / count);
    out << '\n';
  }
}

}  // namespace tsasr
