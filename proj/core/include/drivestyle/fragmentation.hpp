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
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "drivestyle/errors.hpp"
#include "drivestyle/telemetry.hpp"

namespace drivestyle {

enum class Statistic { kMax, kMean, kMin, kStd };

const char* to_string(Statistic s);
Statistic statistic_from_string(const std::string& s);

struct FragmentConfig {
  double tau_s = 10.0;
  std::vector<Statistic> stats = {Statistic::kMax, Statistic::kMean, Statistic::kStd};
};

/// Samples per fragment at `sample_rate_hz`. Throws ValidationError when the
/// config is invalid for that rate (fewer than two samples, empty stats,
/// duplicate stats).
std::size_t samples_per_fragment(const FragmentConfig& cfg, double sample_rate_hz);

/// A window of one series; `channels` view into the series' storage, which
/// must outlive the fragment.
struct Fragment {
  std::size_t index = 0;
  std::size_t begin = 0;  // first sample
  std::size_t length = 0;
  std::vector<std::span<const double>> channels;
};

struct FragmentList {
  std::string driver_id;
  Scenario scenario = Scenario::kOther;
  std::vector<std::string> channel_names;
  std::vector<Fragment> fragments;
  Warnings warnings;
};

/// Non-overlapping windows of tau * rate samples; a trailing partial window
/// is dropped.
FragmentList segment(const TelemetrySeries& s, const FragmentConfig& cfg);

/// Statistics of every channel per fragment. Rows are features in
/// channel-major order ("v_max", "v_mean", ...), columns are fragments.
struct FragmentStatsMatrix {
  std::string driver_id;
  Scenario scenario = Scenario::kOther;
  Eigen::MatrixXd values;
  std::vector<std::string> feature_labels;

  std::size_t fragment_count() const noexcept { return static_cast<std::size_t>(values.cols()); }
  std::size_t feature_count() const noexcept { return static_cast<std::size_t>(values.rows()); }
};

std::string feature_label(const std::string& channel, Statistic stat);

/// Throws ValidationError when `fragments` is empty.
FragmentStatsMatrix fragment_stats(const FragmentList& fragments, const FragmentConfig& cfg);

/// Population statistic of a window.
double compute_statistic(std::span<const double> window, Statistic stat);

/// Column-wise concatenation of per-driver matrices; labels must agree.
FragmentStatsMatrix pool(std::span<const FragmentStatsMatrix> per_driver);

/// CSV with one row per feature, one column per fragment.
std::string stats_matrix_csv(const FragmentStatsMatrix& y);

}  // namespace drivestyle
