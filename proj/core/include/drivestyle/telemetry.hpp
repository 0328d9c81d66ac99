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

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drivestyle/errors.hpp"

namespace drivestyle {

enum class Scenario { kUrban, kHighway, kOther };

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

/// One telemetry channel as it appears in an input file. `unit` is the unit
/// of the file column; values are converted to the canonical unit of the
/// channel on ingestion (km/h, m/s^2, deg/s).
struct ChannelSpec {
  std::string name;
  std::string unit;
  bool required = true;
};

/// v, a_x, a_y, yaw_rate in canonical units, all required.
std::vector<ChannelSpec> default_channel_specs();

/// Throws ValidationError on duplicate names or an empty set.
void validate_channel_specs(std::span<const ChannelSpec> specs);

/// Canonical unit for a well-known channel name, or empty if unknown.
std::string canonical_unit(const std::string& channel);

/// Multiplier turning `from_unit` into the canonical unit of `channel`.
/// Throws SchemaError for incompatible units.
double unit_factor(const std::string& channel, const std::string& from_unit);

/// Counters filled in while ingesting a series.
struct IngestCounters {
  std::size_t rejected = 0;      // rows dropped for non-finite values
  std::size_t interpolated = 0;  // samples filled by linear interpolation
  std::size_t clipped = 0;       // samples clamped to a channel range

  friend bool operator==(const IngestCounters&, const IngestCounters&) = default;
};

/// A uniformly sampled multi-channel signal for one driver. All channels have
/// equal length; samples are indexed by count at `sample_rate_hz`.
class TelemetrySeries {
 public:
  TelemetrySeries() = default;
  TelemetrySeries(std::string driver_id, double sample_rate_hz, Scenario scenario,
                  std::vector<std::string> channel_names,
                  std::vector<std::vector<double>> channel_data);

  const std::string& driver_id() const noexcept { return driver_id_; }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  Scenario scenario() const noexcept { return scenario_; }
  std::size_t size() const noexcept;
  bool empty() const noexcept { return size() == 0; }

  const std::vector<std::string>& channel_names() const noexcept { return names_; }
  std::size_t channel_count() const noexcept { return names_.size(); }
  std::span<const double> channel(std::size_t i) const { return data_.at(i); }
  /// Throws SchemaError if `name` is not a channel of this series.
  std::span<const double> channel(const std::string& name) const;
  std::optional<std::size_t> channel_index(const std::string& name) const;

  const IngestCounters& counters() const noexcept { return counters_; }
  void set_counters(IngestCounters c) noexcept { counters_ = c; }

  friend bool operator==(const TelemetrySeries&, const TelemetrySeries&) = default;

 private:
  std::string driver_id_;
  double sample_rate_hz_ = 1.0;
  Scenario scenario_ = Scenario::kOther;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> data_;
  IngestCounters counters_;
};

enum class NonFinitePolicy {
  kRejectRow,    // drop any row holding a non-finite value
  kInterpolate,  // fill gaps up to `max_gap_s` linearly, reject the rest
};

struct IngestOptions {
  double sample_rate_hz = 100.0;
  Scenario scenario = Scenario::kOther;
  NonFinitePolicy policy = NonFinitePolicy::kRejectRow;
  double max_gap_s = 0.5;
  double jitter_tolerance = 0.01;  // relative to 1 / sample_rate_hz
  /// Optional physical limits per channel (canonical units); values outside
  /// are clamped and counted.
  std::map<std::string, std::pair<double, double>> clip;
};

/// Reads `driver_id,timestamp_s,<channels...>` CSV. Extra columns are ignored.
/// Returns one series per driver in order of first appearance.
std::vector<TelemetrySeries> ingest_csv(const std::filesystem::path& path,
                                        std::span<const ChannelSpec> specs,
                                        const IngestOptions& options);

/// Same as ingest_csv on in-memory text; `source` names the input in errors.
std::vector<TelemetrySeries> ingest_csv_text(const std::string& text,
                                             std::span<const ChannelSpec> specs,
                                             const IngestOptions& options,
                                             const std::string& source = "<memory>");

/// Writes series back in the canonical CSV layout. Timestamps are i / rate.
void export_csv(const std::filesystem::path& path, std::span<const TelemetrySeries> series);
std::string export_csv_text(std::span<const TelemetrySeries> series);

struct ChannelSummary {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

struct ValidationReport {
  std::string driver_id;
  std::size_t sample_count = 0;
  std::vector<ChannelSummary> channels;
  std::size_t count_rejected = 0;
  std::size_t count_interpolated = 0;
  std::size_t count_clipped = 0;
  bool usable = false;
};

ValidationReport validate_series(const TelemetrySeries& s);

}  // namespace drivestyle
