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

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drivestyle/hlm.hpp"

namespace drivestyle {

// All logarithms are natural; entropies are in nats.

struct PerplexityResult {
  double log_likelihood = 0.0;
  std::size_t token_count = 0;
  int vocab_size = 0;
  double perplexity = 0.0;             // eta
  double normalized_perplexity = 0.0;  // eta / |W|
};

/// Perplexity of `corpus` under per-document mixtures `theta` (row d for
/// document d) and styles `phi`. Throws NumericalError on a zero-probability
/// token and ValidationError on shape mismatch or an empty corpus.
PerplexityResult perplexity(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& phi,
                            const WordCorpus& corpus);
/// Training-set perplexity; documents are matched to model rows by driver id.
PerplexityResult perplexity(const StyleModel& model, const WordCorpus& corpus);

/// Perplexity of unseen documents, each folded in with phi frozen.
PerplexityResult heldout_perplexity(const StyleModel& model, const WordCorpus& heldout,
                                    int fold_in_sweeps, std::uint64_t seed);

struct EntropyResult {
  std::vector<double> per_style;
  double mean = 0.0;  // H_styles
};

EntropyResult style_entropy(const Eigen::MatrixXd& phi);
EntropyResult style_entropy(const StyleModel& model);

struct MetricsReport {
  PerplexityResult perplexity;
  EntropyResult entropy;
};

MetricsReport evaluate(const StyleModel& model, const WordCorpus& corpus);
std::string metrics_csv(const MetricsReport& report);

struct SweepRow {
  std::string param;  // "M" or "K"
  int value = 0;
  std::string metric;
  double score = 0.0;
  std::uint64_t seed = 0;
};

struct SweepConfig {
  std::vector<int> m_values;
  std::vector<int> k_values;
  int k_for_m_sweep = 3;  // K while M varies
  int m_for_k_sweep = 5;  // M while K varies
  /// Symmetric alpha; non-positive selects 50 / K.
  double alpha = 0.0;
  double beta = 0.1;
  TrainOptions train;
  std::vector<std::uint64_t> seeds{1};
  double heldout_fraction = 0.2;
  int fold_in_sweeps = 50;
};

/// Builds the word corpus for a given bins-per-factor M.
using CorpusBuilder = std::function<WordCorpus(int)>;

/// M cells record held-out normalized perplexity (training perplexity when
/// fewer than two drivers); K cells record H_styles.
std::vector<SweepRow> sweep_hyperparams(const CorpusBuilder& build, const SweepConfig& config,
                                        Warnings* warnings = nullptr);

std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Median score per parameter value across seeds.
std::map<int, double> median_by_value(const std::vector<SweepRow>& rows, const std::string& param,
                                      const std::string& metric);

double median(std::vector<double> values);

/// Deterministic train/held-out split keyed on driver ids and the seed.
std::pair<WordCorpus, WordCorpus> split_corpus(const WordCorpus& corpus, double heldout_fraction,
                                               std::uint64_t seed);

}  // namespace drivestyle
