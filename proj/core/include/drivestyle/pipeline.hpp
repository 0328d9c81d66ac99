// Copyright 2026 The drivestyle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end orchestration: ingest -> fragment -> factors -> discretize ->
// train -> metrics -> score -> report.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drivestyle/discretizer.hpp"
#include "drivestyle/factors.hpp"
#include "drivestyle/fragmentation.hpp"
#include "drivestyle/hlm.hpp"
#include "drivestyle/metrics.hpp"
#include "drivestyle/styleanalysis.hpp"
#include "drivestyle/telemetry.hpp"

namespace drivestyle {

const char* library_version();

struct PipelineConfig {
  // paths
  std::string telemetry;
  std::string labels;      // optional
  std::string attributes;  // optional
  std::string output_dir = "out";
  // resume points (optional)
  std::string resume_corpus;        // with resume_codebook: start at training
  std::string resume_codebook;
  std::string resume_factor_model;  // with resume_codebook: skip fitting

  Scenario scenario = Scenario::kUrban;
  double sample_rate_hz = 100.0;
  NonFinitePolicy nonfinite_policy = NonFinitePolicy::kRejectRow;
  double max_gap_s = 0.5;

  FragmentConfig fragment;
  int factor_count = 0;  // 0: Kaiser's criterion
  bool rotate = true;

  int bins = 5;
  bool prefer_gev = true;

  int K = 3;
  double alpha = 0.0;  // 0: 50 / K
  double beta = 0.1;
  int iterations = 2000;
  int burn_in = 500;
  int thin = 10;
  std::uint64_t seed = 1;
  int chains = 1;

  std::vector<double> gamma;              // empty: gamma_k = k
  std::optional<std::array<double, 4>> thresholds;  // empty: scenario preset
  bool fit_thresholds = false;
  double grid_step = 0.01;
  std::string ordering = "bins";          // or "features"
  int group_permutations = 10000;

  std::vector<int> sweep_m{2, 3, 4, 5, 6};
  std::vector<int> sweep_k{1, 2, 3, 4, 5, 6};
  std::vector<std::uint64_t> sweep_seeds{1, 2, 3};
  double heldout_fraction = 0.2;

  /// Throws ValidationError naming the first offending key.
  void validate() const;
  Hyperparams hyperparams(int vocab_size) const;
  TrainOptions train_options() const;
  LevelThresholds level_thresholds() const;
};

/// Nested JSON form. Unknown keys are rejected with ValidationError.
std::string config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const std::string& text);
/// FNV-1a of the canonical JSON form.
std::string config_hash(const PipelineConfig& config);

struct AnalysisResult {
  std::vector<FragmentStatsMatrix> stats;
  FactorModel factor_model;
  std::vector<FactorScores> scores;
  Codebook codebook;
  WordCorpus corpus;
  TrainResult training;
  MetricsReport metrics;
  StyleOrdering ordering;
  LevelThresholds thresholds;
  std::vector<DriverScore> driver_scores;
  std::optional<ThresholdFit> threshold_fit;
  std::optional<WeightedConfusion> confusion;
  std::optional<GroupReport> groups;
  Warnings warnings;
};

/// Runs every stage in memory. `stage` (optional) is updated as stages begin.
AnalysisResult analyze(std::span<const TelemetrySeries> series, const PipelineConfig& config,
                       const std::vector<SubjectiveLabel>* labels = nullptr,
                       const std::map<std::string, DriverAttributes>* attributes = nullptr,
                       std::string* stage = nullptr);

/// Fragments, fits the factor model and scores every driver.
struct FactorStage {
  std::vector<FragmentStatsMatrix> stats;
  FactorModel model;
  std::vector<FactorScores> scores;
  Warnings warnings;
};
FactorStage factor_stage(std::span<const TelemetrySeries> series, const PipelineConfig& config);

/// Corpus builder for bins-per-factor sweeps over fixed factor scores.
CorpusBuilder make_corpus_builder(std::vector<FactorScores> scores, bool prefer_gev,
                                  Scenario scenario = Scenario::kOther);

struct RunResult {
  std::vector<std::string> artifacts;  // file names inside output_dir
  std::string manifest_path;
  Warnings warnings;
  std::optional<double> accuracy;
};

/// Executes the pipeline and writes codebook.json, factor_model.json,
/// loadings.csv, corpus.csv, model.json, trace.csv, metrics.csv,
/// scores.csv, confusion.json (with labels), groups.csv and
/// group_tests.csv (with attributes), and run-manifest.json. On failure the
/// manifest records status "failed" and the stage, and the error is
/// rethrown with the stage name prefixed.
RunResult run_pipeline(const PipelineConfig& config);

/// Configuration stored in a run manifest.
PipelineConfig config_from_manifest(const std::string& manifest_text);

}  // namespace drivestyle
