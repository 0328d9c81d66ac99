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

// Semantics for learned styles: calm-to-aggressive ordering, per-driver
// aggressiveness scores and levels, and agreement with subjective labels.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "drivestyle/discretizer.hpp"
#include "drivestyle/fragmentation.hpp"
#include "drivestyle/hlm.hpp"

namespace drivestyle {

inline constexpr int kLevelCount = 5;

struct StyleOrdering {
  std::vector<int> rank;         // rank[k] in 1..K, 1 = calmest
  std::vector<double> severity;  // per learned style
  Warnings warnings;

  int style_count() const noexcept { return static_cast<int>(rank.size()); }
  /// Learned style indices from calmest to most aggressive.
  std::vector<int> calmest_first() const;
  static StyleOrdering identity(int K);
};

/// Ranks styles by sum_i phi_ki * severity_i (ascending). Ties keep the
/// lower style index first and add a warning.
StyleOrdering order_by_word_severity(const Eigen::MatrixXd& phi, std::span<const double> severity);

/// Word severity = sum of its decoded bin indices.
StyleOrdering order_styles(const StyleModel& model, const Codebook& cb);
std::vector<double> bin_severity(const Codebook& cb);

/// Word severity from raw statistics: every fragment statistic is
/// standardized over the pooled fragments, averaged across features, and
/// averaged per word. Unobserved words get 0.
std::vector<double> raw_word_severity(const WordCorpus& corpus,
                                      std::span<const FragmentStatsMatrix> stats);

/// s_obj = sum_k gamma_{rank(k)} theta_k. Empty `gamma` means gamma_r = r.
double aggressive_score(std::span<const double> theta, const StyleOrdering& ordering,
                        std::span<const double> gamma = {});

/// Five levels over [lo, hi]: level = 1 + #{cuts <= s}, so a score on a
/// shared endpoint belongs to the higher level.
struct LevelThresholds {
  Scenario scenario = Scenario::kOther;
  double lo = 1.0;
  double hi = 3.0;
  std::array<double, 4> cuts{};

  /// Throws ValidationError unless lo <= c1 <= ... <= c4 <= hi.
  void validate() const;
  static LevelThresholds urban();
  static LevelThresholds highway();
  static LevelThresholds for_scenario(Scenario s);
};

/// Throws RangeError for s outside [lo, hi].
int score_to_level(double s, const LevelThresholds& thresholds);

enum class LabelSource { kSelfReport, kExpert };
const char* to_string(LabelSource s);
LabelSource label_source_from_string(const std::string& s);

struct SubjectiveLabel {
  std::string driver_id;
  int level = 1;
  LabelSource source = LabelSource::kExpert;
};

std::vector<SubjectiveLabel> read_labels_csv(const std::string& text, const std::string& source);
std::string labels_csv(std::span<const SubjectiveLabel> labels);

struct DriverScore {
  std::string driver_id;
  double score = 0.0;
  int level = 0;
};

std::vector<DriverScore> score_drivers(const StyleModel& model, const StyleOrdering& ordering,
                                       const LevelThresholds& thresholds,
                                       std::span<const double> gamma = {});
std::string scores_csv(std::span<const DriverScore> scores);
std::vector<DriverScore> read_scores_csv(const std::string& text, const std::string& source);

/// Credit for predicting `predicted` when the truth is `truth`:
/// 1 for a match, 0.8 one level off, 0 otherwise.
double consistency_weight(int truth, int predicted);

/// Rows are subjective (truth) levels, columns objective (predicted).
struct WeightedConfusion {
  std::array<std::array<int, kLevelCount>, kLevelCount> raw{};
  std::array<std::array<double, kLevelCount>, kLevelCount> weighted{};
  std::size_t total = 0;
  double accuracy = 0.0;
  /// Weighted mass of column l over its raw count; NaN for an empty column.
  std::array<double, kLevelCount> precision{};
  /// Weighted mass of row l over its raw count; NaN for an empty row.
  std::array<double, kLevelCount> recall{};
};

/// Pairs predictions and labels by driver id. Throws DataError listing ids
/// present on only one side, and for duplicates or levels outside [1, 5].
WeightedConfusion weighted_confusion(std::span<const DriverScore> predicted,
                                     std::span<const SubjectiveLabel> truth);

struct ThresholdFit {
  LevelThresholds thresholds;
  double accuracy = 0.0;
  double permutation_mean = 0.0;  // mean fitted accuracy over shuffled labels
  double p_value = 1.0;
  bool significant = false;  // p <= 0.01
  Warnings warnings;
};

struct ThresholdFitOptions {
  double grid_step = 0.01;
  double lo = 1.0;
  double hi = 3.0;
  Scenario scenario = Scenario::kOther;
  int permutations = 200;  // 0 skips the baseline
  std::uint64_t seed = 1;
};

/// Grid search over four ascending cut points maximizing weighted accuracy.
/// Ties prefer the widest central interval, then the smallest second cut.
ThresholdFit fit_thresholds(std::span<const DriverScore> scores,
                            std::span<const SubjectiveLabel> truth,
                            const ThresholdFitOptions& options = {});

struct DriverAttributes {
  std::string gender;
  std::string age_band;
  std::string experience_band;
};

std::map<std::string, DriverAttributes> read_attributes_csv(const std::string& text,
                                                            const std::string& source);
std::string attributes_csv(const std::vector<std::string>& driver_ids,
                           const std::map<std::string, DriverAttributes>& attributes);

struct GroupRow {
  std::string attribute;
  std::string group;
  std::size_t size = 0;
  std::vector<double> mean;  // per style rank, calmest first
  std::vector<double> sd;    // sample sd; NaN for a group of one
};

struct GroupTest {
  std::string attribute;
  int style_rank = 0;
  double statistic = 0.0;  // between-group sum of squares of style proportions
  double p_value = 1.0;
};

struct GroupReport {
  std::vector<GroupRow> rows;
  std::vector<GroupTest> tests;
  Warnings warnings;
};

struct GroupReportOptions {
  int permutations = 10000;
  std::uint64_t seed = 1;
  /// Groups expected per attribute; absent ones are reported as warnings.
  std::map<std::string, std::vector<std::string>> expected_groups;
};

/// Mean mixture per attribute group ("gender", "age_band",
/// "experience_band", plus "all"), with a permutation test per style.
GroupReport group_report(const StyleModel& model, const StyleOrdering& ordering,
                         const std::map<std::string, DriverAttributes>& attributes,
                         const GroupReportOptions& options = {});
std::string group_rows_csv(const GroupReport& report);
std::string group_tests_csv(const GroupReport& report);

}  // namespace drivestyle
