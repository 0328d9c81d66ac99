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

// Labelled synthetic telemetry. Each driver switches between style regimes
// at fragment granularity; within a regime the channels follow mean-reverting
// noise around the style's envelope.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "drivestyle/factors.hpp"
#include "drivestyle/styleanalysis.hpp"
#include "drivestyle/telemetry.hpp"

namespace drivestyle {

/// Kinematic envelope of one style. Speeds in km/h, accelerations in
/// m/s^2, yaw rates in deg/s.
struct RegimeProfile {
  std::string name;
  double speed_mean = 0.0;
  double speed_sd = 1.0;
  double accel_sd = 0.1;
  double burst_rate_hz = 0.0;
  double burst_magnitude = 0.0;
  double yaw_bias = 0.0;
  double yaw_sd = 1.0;
};

struct ProfileSet {
  int schema_version = 1;
  std::string name;
  double sample_rate_hz = 10.0;
  double fragment_s = 10.0;
  double dwell_mean_fragments = 3.0;
  double speed_reversion = 0.3;   // 1/s
  double accel_reversion = 1.0;   // 1/s
  double yaw_reversion = 0.5;     // 1/s
  double burst_duration_s = 2.0;
  double burst_positive_fraction = 0.7;
  std::vector<RegimeProfile> styles;  // calmest first

  /// Throws ValidationError on non-positive spreads or rates, or when a
  /// style fails to dominate its predecessor in every envelope field.
  void validate() const;
  int style_count() const noexcept { return static_cast<int>(styles.size()); }
};

/// Three urban styles (calm, normal, aggressive).
ProfileSet default_profile_set();

struct SimulatedDriver {
  TelemetrySeries series;
  std::vector<int> fragment_styles;
  std::vector<double> theta_true;
};

/// Style episodes drawn from `theta_true` with geometric dwell (a new style
/// is drawn at each fragment boundary with probability 1 / dwell).
/// Requires at least two whole fragments.
SimulatedDriver simulate_driver(const std::vector<double>& theta_true, const ProfileSet& profiles,
                                double duration_s, std::uint64_t seed,
                                const std::string& driver_id = "drv000",
                                Scenario scenario = Scenario::kUrban);

using MixtureSampler = std::function<std::vector<double>(std::mt19937_64&)>;

/// Draws a target level uniformly, then a two-style mixture whose score
/// lies in the middle half of that level's interval. Levels 1 and 5 get the
/// pure calmest or most aggressive style. Requires three styles.
MixtureSampler level_stratified_mixtures(const LevelThresholds& thresholds);
MixtureSampler dirichlet_mixtures(std::vector<double> alpha);

struct CohortOptions {
  std::size_t drivers = 100;
  double duration_s = 1800.0;
  std::uint64_t seed = 1;
  Scenario scenario = Scenario::kUrban;
  LevelThresholds thresholds = LevelThresholds::urban();
  MixtureSampler mixtures;  // empty: level_stratified_mixtures(thresholds)
};

struct Cohort {
  std::vector<SimulatedDriver> drivers;
  std::vector<SubjectiveLabel> labels;  // from theta_true with gamma_k = k
  std::map<std::string, DriverAttributes> attributes;

  std::vector<TelemetrySeries> series() const;
  std::vector<std::string> driver_ids() const;
};

Cohort simulate_cohort(const CohortOptions& options, const ProfileSet& profiles);

/// Files written by write_cohort.
struct CohortFiles {
  std::string telemetry = "telemetry.csv";
  std::string labels = "labels.csv";
  std::string attributes = "attributes.csv";
  std::string mixtures = "mixtures.csv";
};

void write_cohort(const Cohort& cohort, const std::string& directory, const CohortFiles& names = {});
std::string mixtures_csv(const Cohort& cohort);

/// Factor scores with a known cell structure: style k puts factor l in
/// quantile cell (k + l) mod cells of a standard normal with probability
/// `fidelity`, anywhere otherwise. Drivers cycle through rotated copies of
/// `base_mixture`, so every cell holds the same expected mass and each
/// factor is marginally N(0, 1).
struct CellScoreOptions {
  std::size_t drivers = 60;
  std::size_t fragments = 200;
  int factors = 2;
  int cells = 4;
  double fidelity = 0.95;
  std::vector<double> base_mixture{0.6, 0.25, 0.15, 0.0};  // length = cells
  std::uint64_t seed = 1;
};

std::vector<FactorScores> simulate_cell_scores(const CellScoreOptions& options);

}  // namespace drivestyle
