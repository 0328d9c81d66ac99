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

#include "drivestyle/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "drivestyle/csv.hpp"
#include "drivestyle/fragmentation.hpp"
#include "drivestyle/hlm.hpp"

namespace drivestyle {

namespace {

std::mt19937_64 child_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x5e3dU};
  return std::mt19937_64(seq);
}

std::string driver_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "drv%03zu", i);
  return buf;
}

void require_positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(what + " must be positive");
}

}  // namespace

void ProfileSet::validate() const {
  if (schema_version != 1)
    throw ValidationError("unsupported profile schema version " + std::to_string(schema_version));
  require_positive(sample_rate_hz, "sample rate");
  require_positive(fragment_s, "fragment length");
  if (!(dwell_mean_fragments >= 1.0)) throw ValidationError("mean dwell must be at least one fragment");
  require_positive(speed_reversion, "speed reversion rate");
  require_positive(accel_reversion, "acceleration reversion rate");
  require_positive(yaw_reversion, "yaw reversion rate");
  require_positive(burst_duration_s, "burst duration");
  if (!(burst_positive_fraction >= 0.0 && burst_positive_fraction <= 1.0))
    throw ValidationError("burst positive fraction must lie in [0, 1]");
  if (styles.empty()) throw ValidationError("profile set has no styles");
  for (std::size_t k = 0; k < styles.size(); ++k) {
    const auto& s = styles[k];
    require_positive(s.speed_sd, s.name + " speed sd");
    require_positive(s.accel_sd, s.name + " acceleration sd");
    require_positive(s.yaw_sd, s.name + " yaw sd");
    if (s.speed_mean < 0.0 || s.burst_rate_hz < 0.0 || s.burst_magnitude < 0.0 || s.yaw_bias < 0.0)
      throw ValidationError(s.name + ": speed mean, burst rate, magnitude and yaw bias must be non-negative");
    if (k == 0) continue;
    const auto& p = styles[k - 1];
    const bool dominates = s.speed_mean > p.speed_mean && s.speed_sd > p.speed_sd &&
                           s.accel_sd > p.accel_sd && s.burst_rate_hz > p.burst_rate_hz &&
                           s.burst_magnitude > p.burst_magnitude && s.yaw_bias > p.yaw_bias &&
                           s.yaw_sd > p.yaw_sd;
    if (!dominates)
      throw ValidationError("style '" + s.name + "' does not dominate '" + p.name +
                            "' in every envelope field");
  }
}

ProfileSet default_profile_set() {
  ProfileSet p;
  p.name = "urban-default";
  p.styles = {
      {"calm", 38.0, 3.0, 0.25, 0.03, 0.8, 0.3, 1.5},
      {"normal", 52.0, 4.5, 0.45, 0.08, 1.5, 0.7, 3.0},
      {"aggressive", 66.0, 6.5, 0.8, 0.18, 2.6, 1.4, 5.5},
  };
  return p;
}

SimulatedDriver simulate_driver(const std::vector<double>& theta, const ProfileSet& prof,
                                double duration_s, std::uint64_t seed,
                                const std::string& driver_id, Scenario scenario) {
  prof.validate();
  const int K = prof.style_count();
  if (static_cast<int>(theta.size()) != K)
    throw ValidationError("mixture length does not match the profile style count");
  double sum = 0.0;
  for (double t : theta) {
    if (!(t >= 0.0)) throw ValidationError("mixture entries must be non-negative");
    sum += t;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("mixture must sum to 1");
  FragmentConfig fc;
  fc.tau_s = prof.fragment_s;
  const std::size_t L = samples_per_fragment(fc, prof.sample_rate_hz);
  const auto n_frag = static_cast<std::size_t>(std::floor(duration_s / prof.fragment_s + 1e-9));
  if (n_frag < 2) throw ValidationError("duration must cover at least two fragments");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double dt = 1.0 / prof.sample_rate_hz;
  const double switch_p = 1.0 / prof.dwell_mean_fragments;

  SimulatedDriver out;
  out.theta_true = theta;
  int style = sample_discrete(theta, rng);
  for (std::size_t f = 0; f < n_frag; ++f) {
    if (f > 0 && uniform01(rng) < switch_p) style = sample_discrete(theta, rng);
    out.fragment_styles.push_back(style);
  }

  const std::size_t n = n_frag * L;
  std::vector<std::vector<double>> ch(4, std::vector<double>(n));
  const auto& s0 = prof.styles[static_cast<std::size_t>(out.fragment_styles.front())];
  double v = s0.speed_mean, ax = 0.0, yaw = s0.yaw_bias;
  const auto burst_len = static_cast<std::size_t>(std::max(1.0, std::round(prof.burst_duration_s / dt)));
  std::size_t burst_left = 0;
  double burst_amp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = prof.styles[static_cast<std::size_t>(out.fragment_styles[i / L])];
    v += prof.speed_reversion * (e.speed_mean - v) * dt +
         e.speed_sd * std::sqrt(2.0 * prof.speed_reversion * dt) * gauss(rng);
    v = std::max(v, 0.0);
    ax += -prof.accel_reversion * ax * dt + e.accel_sd * std::sqrt(2.0 * prof.accel_reversion * dt) * gauss(rng);
    yaw += prof.yaw_reversion * (e.yaw_bias - yaw) * dt +
           e.yaw_sd * std::sqrt(2.0 * prof.yaw_reversion * dt) * gauss(rng);
    if (burst_left == 0 && uniform01(rng) < e.burst_rate_hz * dt) {
      burst_left = burst_len;
      burst_amp = e.burst_magnitude * (uniform01(rng) < prof.burst_positive_fraction ? 1.0 : -1.0);
    }
    double burst = 0.0;
    if (burst_left > 0) {
      const double phase = static_cast<double>(burst_len - burst_left) + 0.5;
      burst = burst_amp * std::sin(std::numbers::pi * phase / static_cast<double>(burst_len));
      --burst_left;
    }
    ch[0][i] = v;
    ch[1][i] = ax + burst;
    ch[3][i] = yaw;
    ch[2][i] = v / 3.6 * yaw * std::numbers::pi / 180.0 + 0.02 * gauss(rng);
  }
  out.series = TelemetrySeries(driver_id, prof.sample_rate_hz, scenario, {"v", "a_x", "a_y", "yaw_rate"},
                               std::move(ch));
  return out;
}

MixtureSampler level_stratified_mixtures(const LevelThresholds& t) {
  t.validate();
  return [t](std::mt19937_64& rng) {
    const int level = static_cast<int>(uniform01(rng) * kLevelCount) + 1;
    if (level == 1) return std::vector<double>{1.0, 0.0, 0.0};
    if (level == kLevelCount) return std::vector<double>{0.0, 0.0, 1.0};
    const double a = t.cuts[static_cast<std::size_t>(level - 2)];
    const double b = t.cuts[static_cast<std::size_t>(level - 1)];
    const double s = a + (0.25 + 0.5 * uniform01(rng)) * (b - a);
    if (s <= 2.0) return std::vector<double>{2.0 - s, s - 1.0, 0.0};
    return std::vector<double>{0.0, 3.0 - s, s - 2.0};
  };
}

MixtureSampler dirichlet_mixtures(std::vector<double> alpha) {
  return [alpha = std::move(alpha)](std::mt19937_64& rng) { return sample_dirichlet(alpha, rng); };
}

std::vector<TelemetrySeries> Cohort::series() const {
  std::vector<TelemetrySeries> out;
  for (const auto& d : drivers) out.push_back(d.series);
  return out;
}

std::vector<std::string> Cohort::driver_ids() const {
  std::vector<std::string> out;
  for (const auto& d : drivers) out.push_back(d.series.driver_id());
  return out;
}

Cohort simulate_cohort(const CohortOptions& o, const ProfileSet& profiles) {
  profiles.validate();
  const MixtureSampler sampler = o.mixtures ? o.mixtures : level_stratified_mixtures(o.thresholds);
  static const char* kAges[] = {"18-25", "26-35", "36-45", "46+"};
  static const char* kExperience[] = {"<3y", "3-5y", "6-10y", ">10y"};
  Cohort c;
  std::mt19937_64 mix_rng = child_stream(o.seed, 0);
  const StyleOrdering identity = StyleOrdering::identity(profiles.style_count());
  for (std::size_t i = 0; i < o.drivers; ++i) {
    const std::string id = driver_name(i);
    auto theta = sampler(mix_rng);
    auto d = simulate_driver(theta, profiles, o.duration_s, child_stream(o.seed, i + 1)(), id, o.scenario);
    SubjectiveLabel label;
    label.driver_id = id;
    label.level = score_to_level(aggressive_score(theta, identity), o.thresholds);
    label.source = LabelSource::kExpert;
    c.labels.push_back(label);
    DriverAttributes a;
    a.gender = uniform01(mix_rng) < 0.83 ? "male" : "female";
    a.age_band = kAges[static_cast<int>(uniform01(mix_rng) * 4)];
    a.experience_band = kExperience[static_cast<int>(uniform01(mix_rng) * 4)];
    c.attributes[id] = a;
    c.drivers.push_back(std::move(d));
  }
  return c;
}

std::string mixtures_csv(const Cohort& cohort) {
  std::string s = "driver_id";
  const std::size_t K = cohort.drivers.empty() ? 0 : cohort.drivers.front().theta_true.size();
  for (std::size_t k = 0; k < K; ++k) s += ",theta_" + std::to_string(k + 1);
  s += '\n';
  for (const auto& d : cohort.drivers) {
    s += d.series.driver_id();
    for (double t : d.theta_true) s += "," + format_double(t);
    s += '\n';
  }
  return s;
}

void write_cohort(const Cohort& cohort, const std::string& directory, const CohortFiles& names) {
  const std::filesystem::path dir(directory);
  const auto series = cohort.series();
  write_text_file(dir / names.telemetry, export_csv_text(series));
  write_text_file(dir / names.labels, labels_csv(cohort.labels));
  write_text_file(dir / names.attributes, attributes_csv(cohort.driver_ids(), cohort.attributes));
  write_text_file(dir / names.mixtures, mixtures_csv(cohort));
}

std::vector<FactorScores> simulate_cell_scores(const CellScoreOptions& o) {
  if (o.cells < 2) throw ValidationError("cell count must be at least 2");
  if (o.factors < 1) throw ValidationError("factor count must be at least 1");
  if (static_cast<int>(o.base_mixture.size()) != o.cells)
    throw ValidationError("base mixture length must equal the cell count");
  if (!(o.fidelity >= 0.0 && o.fidelity <= 1.0)) throw ValidationError("fidelity must lie in [0, 1]");
  const boost::math::normal_distribution<double> std_normal;
  std::vector<std::string> labels;
  for (int l = 0; l < o.factors; ++l) labels.push_back("factor" + std::to_string(l + 1));
  std::vector<FactorScores> out;
  for (std::size_t d = 0; d < o.drivers; ++d) {
    std::mt19937_64 rng = child_stream(o.seed, d);
    std::vector<double> theta(static_cast<std::size_t>(o.cells));
    for (int k = 0; k < o.cells; ++k)
      theta[static_cast<std::size_t>((k + static_cast<int>(d % static_cast<std::size_t>(o.cells))) % o.cells)] =
          o.base_mixture[static_cast<std::size_t>(k)];
    FactorScores fs;
    fs.driver_id = driver_name(d);
    fs.factor_labels = labels;
    fs.scores.resize(o.factors, static_cast<Eigen::Index>(o.fragments));
    for (std::size_t i = 0; i < o.fragments; ++i) {
      const int style = sample_discrete(theta, rng);
      for (int l = 0; l < o.factors; ++l) {
        double u;
        if (uniform01(rng) < o.fidelity) {
          const int cell = (style + l) % o.cells;
          u = (cell + uniform01(rng)) / o.cells;
        } else {
          u = uniform01(rng);
        }
        u = std::clamp(u, 1e-12, 1.0 - 1e-12);
        fs.scores(l, static_cast<Eigen::Index>(i)) = boost::math::quantile(std_normal, u);
      }
    }
    out.push_back(std::move(fs));
  }
  return out;
}

}  // namespace drivestyle
