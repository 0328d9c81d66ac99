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

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "drivestyle/errors.hpp"
#include "drivestyle/fragmentation.hpp"

namespace drivestyle {

struct FactorOptions {
  /// Explicit factor count; Kaiser's criterion (eigenvalue > 1) when absent.
  std::optional<int> factor_count;
  bool rotate = true;
  int max_rotation_iterations = 500;
  double rotation_tolerance = 1e-6;
};

/// Common-factor model of standardized fragment statistics.
///
/// Loadings are extracted from the feature correlation matrix by principal
/// factoring (eigenvectors scaled by the square root of their eigenvalues),
/// optionally varimax-rotated with Kaiser normalization, ordered by explained
/// variance and sign-normalized so each column's largest-magnitude entry is
/// positive.
struct FactorModel {
  std::vector<std::string> feature_labels;
  Eigen::VectorXd feature_means;
  Eigen::VectorXd feature_stds;  // population standard deviation
  Eigen::VectorXd eigenvalues;   // all of them, descending
  Eigen::MatrixXd unrotated_loadings;
  Eigen::MatrixXd loadings;      // features x factors
  Eigen::VectorXd uniquenesses;  // 1 - communality, per feature
  std::vector<std::string> factor_labels;
  int rotation_iterations = 0;
  Warnings warnings;

  int factor_count() const noexcept { return static_cast<int>(loadings.cols()); }
  int feature_count() const noexcept { return static_cast<int>(loadings.rows()); }
  /// Sum of squared loadings per factor divided by the feature count.
  Eigen::VectorXd explained_variance() const;
};

FactorModel fit_factor_model(const FragmentStatsMatrix& pooled,
                             const FactorOptions& options = {});

struct VarimaxResult {
  Eigen::MatrixXd loadings;
  Eigen::MatrixXd rotation;
  int iterations = 0;
};

/// Orthogonal varimax rotation with Kaiser row normalization. Throws
/// NumericalError when it does not converge within `max_iterations`.
VarimaxResult varimax(const Eigen::MatrixXd& loadings, int max_iterations = 500,
                      double tolerance = 1e-6);

struct FactorScores {
  std::string driver_id;
  Eigen::MatrixXd scores;  // factors x fragments
  std::vector<std::string> factor_labels;

  std::size_t fragment_count() const noexcept { return static_cast<std::size_t>(scores.cols()); }
};

/// Least-squares factor scores, (A'A)^-1 A' z, on features standardized with
/// the model's constants. Throws SchemaError on a feature-label mismatch.
FactorScores score_fragments(const FactorModel& model, const FragmentStatsMatrix& y);

/// Semantic factor names from the channel group carrying the largest mean
/// |loading|: v -> speed, a_x -> acceleration, a_y/yaw_rate -> lateral.
std::vector<std::string> label_factors(const Eigen::MatrixXd& loadings,
                                       const std::vector<std::string>& feature_labels);

/// Channel part of a "<channel>_<stat>" feature label.
std::string feature_channel(const std::string& feature_label);
std::string channel_group(const std::string& channel);

/// Features x factors table.
std::string loadings_csv(const FactorModel& model);

}  // namespace drivestyle
