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

#include "drivestyle/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_map>

#include "drivestyle/csv.hpp"

namespace drivestyle {

namespace {

constexpr const char* kDriverColumn = "driver_id";
constexpr const char* kTimestampColumn = "timestamp_s";

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct RawDriver {
  std::vector<std::size_t> rows;  // file data-row index per sample
  std::vector<double> timestamps;
  std::vector<std::vector<double>> values;  // per channel
};

std::string join_rows(const std::vector<std::size_t>& rows) {
  std::ostringstream os;
  const std::size_t shown = std::min<std::size_t>(rows.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) os << (i ? ", " : "") << rows[i];
  if (rows.size() > shown) os << ", ... (" << rows.size() << " total)";
  return os.str();
}

// Fills interior NaN runs no longer than `max_run` samples by linear
// interpolation. Returns the number of filled samples.
std::size_t interpolate_gaps(std::vector<double>& v, std::size_t max_run) {
  std::size_t filled = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    if (std::isfinite(v[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < v.size() && !std::isfinite(v[j])) ++j;
    const std::size_t run = j - i;
    if (i > 0 && j < v.size() && run <= max_run) {
      const double a = v[i - 1];
      const double b = v[j];
      for (std::size_t k = i; k < j; ++k) {
        const double t = static_cast<double>(k - i + 1) / static_cast<double>(run + 1);
        v[k] = a + (b - a) * t;
      }
      filled += run;
    }
    i = j;
  }
  return filled;
}

}  // namespace

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::kUrban: return "urban";
    case Scenario::kHighway: return "highway";
    case Scenario::kOther: return "other";
  }
  return "other";
}

Scenario scenario_from_string(const std::string& s) {
  const auto l = lower(s);
  if (l == "urban") return Scenario::kUrban;
  if (l == "highway") return Scenario::kHighway;
  if (l == "other") return Scenario::kOther;
  throw ValidationError("unknown scenario tag '" + s + "' (expected urban, highway or other)");
}

std::vector<ChannelSpec> default_channel_specs() {
  return {{"v", "km/h", true},
          {"a_x", "m/s^2", true},
          {"a_y", "m/s^2", true},
          {"yaw_rate", "deg/s", true}};
}

void validate_channel_specs(std::span<const ChannelSpec> specs) {
  if (specs.empty()) throw ValidationError("at least one channel spec is required");
  std::set<std::string> seen;
  for (const auto& s : specs) {
    if (s.name.empty()) throw ValidationError("channel spec with empty name");
    if (s.name == kDriverColumn || s.name == kTimestampColumn)
      throw ValidationError("channel name '" + s.name + "' is reserved");
    if (!seen.insert(s.name).second)
      throw ValidationError("duplicate channel name '" + s.name + "'");
  }
}

std::string canonical_unit(const std::string& channel) {
  if (channel == "v") return "km/h";
  if (channel == "a_x" || channel == "a_y") return "m/s^2";
  if (channel == "yaw_rate") return "deg/s";
  return {};
}

double unit_factor(const std::string& channel, const std::string& from_unit) {
  const std::string canon = canonical_unit(channel);
  std::string u = lower(from_unit);
  // Accept the UTF-8 superscript spelling of m/s^2.
  if (u == "m/s\xc2\xb2") u = "m/s^2";
  if (canon.empty() || u.empty() || u == lower(canon)) return 1.0;
  if (canon == "km/h") {
    if (u == "m/s") return 3.6;
    if (u == "mph") return 1.609344;
  } else if (canon == "m/s^2") {
    if (u == "g") return 9.80665;
    if (u == "cm/s^2") return 0.01;
  } else if (canon == "deg/s") {
    if (u == "rad/s") return 180.0 / std::numbers::pi;
  }
  throw SchemaError("cannot convert channel '" + channel + "' from unit '" + from_unit +
                    "' to '" + canon + "'");
}

TelemetrySeries::TelemetrySeries(std::string driver_id, double sample_rate_hz,
                                 Scenario scenario, std::vector<std::string> channel_names,
                                 std::vector<std::vector<double>> channel_data)
    : driver_id_(std::move(driver_id)),
      sample_rate_hz_(sample_rate_hz),
      scenario_(scenario),
      names_(std::move(channel_names)),
      data_(std::move(channel_data)) {
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_))
    throw ValidationError("sample_rate_hz must be positive");
  if (names_.size() != data_.size())
    throw InternalError("channel name/data count mismatch");
  for (const auto& d : data_) {
    if (d.size() != data_.front().size())
      throw DataError("channels of driver '" + driver_id_ + "' differ in length");
  }
}

std::size_t TelemetrySeries::size() const noexcept {
  return data_.empty() ? 0 : data_.front().size();
}

std::optional<std::size_t> TelemetrySeries::channel_index(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

std::span<const double> TelemetrySeries::channel(const std::string& name) const {
  const auto i = channel_index(name);
  if (!i) throw SchemaError("series '" + driver_id_ + "' has no channel '" + name + "'");
  return data_[*i];
}

std::vector<TelemetrySeries> ingest_csv(const std::filesystem::path& path,
                                        std::span<const ChannelSpec> specs,
                                        const IngestOptions& options) {
  return ingest_csv_text(read_text_file(path), specs, options, path.string());
}

std::vector<TelemetrySeries> ingest_csv_text(const std::string& text,
                                             std::span<const ChannelSpec> specs,
                                             const IngestOptions& options,
                                             const std::string& source) {
  validate_channel_specs(specs);
  if (!(options.sample_rate_hz > 0.0))
    throw ValidationError("sample_rate_hz must be positive");

  CsvReader reader(text, source);
  const auto& header = reader.header();
  auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  };

  const auto driver_col = find_column(kDriverColumn);
  const auto time_col = find_column(kTimestampColumn);
  if (!driver_col) throw SchemaError(source + ": missing column '" + kDriverColumn + "'");
  if (!time_col) throw SchemaError(source + ": missing column '" + kTimestampColumn + "'");

  std::vector<std::size_t> channel_cols;
  std::vector<std::string> channel_names;
  std::vector<double> factors;
  for (const auto& spec : specs) {
    const auto col = find_column(spec.name);
    if (!col) {
      if (spec.required)
        throw SchemaError(source + ": missing required channel column '" + spec.name + "'");
      continue;
    }
    channel_cols.push_back(*col);
    channel_names.push_back(spec.name);
    factors.push_back(unit_factor(spec.name, spec.unit));
  }
  if (channel_cols.empty()) throw SchemaError(source + ": no channel columns present");

  std::vector<std::string> order;
  std::unordered_map<std::string, RawDriver> drivers;
  std::vector<std::string> fields;
  std::size_t row = 0;
  while (reader.next(fields)) {
    if (fields.size() != header.size())
      throw DataError(source + ": data row " + std::to_string(row) + " has " +
                          std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(header.size()),
                      {row});
    const std::string& id = fields[*driver_col];
    auto [it, inserted] = drivers.try_emplace(id);
    if (inserted) {
      order.push_back(id);
      it->second.values.resize(channel_cols.size());
    }
    RawDriver& d = it->second;
    const double t = parse_double(fields[*time_col]);
    if (!std::isfinite(t))
      throw DataError(source + ": non-finite timestamp in data row " + std::to_string(row),
                      {row});
    d.rows.push_back(row);
    d.timestamps.push_back(t);
    for (std::size_t c = 0; c < channel_cols.size(); ++c)
      d.values[c].push_back(parse_double(fields[channel_cols[c]]) * factors[c]);
    ++row;
  }

  const double expected_dt = 1.0 / options.sample_rate_hz;
  const std::size_t max_run =
      static_cast<std::size_t>(std::floor(options.max_gap_s * options.sample_rate_hz + 1e-9));

  std::vector<TelemetrySeries> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    RawDriver& d = drivers.at(id);
    std::vector<std::size_t> non_monotone;
    std::vector<std::size_t> jitter;
    for (std::size_t i = 1; i < d.timestamps.size(); ++i) {
      const double dt = d.timestamps[i] - d.timestamps[i - 1];
      if (dt <= 0.0) {
        non_monotone.push_back(d.rows[i]);
      } else if (std::abs(dt - expected_dt) > options.jitter_tolerance * expected_dt) {
        jitter.push_back(d.rows[i]);
      }
    }
    if (!non_monotone.empty())
      throw DataError(source + ": non-monotone timestamps for driver '" + id +
                          "' at data rows " + join_rows(non_monotone),
                      non_monotone);
    if (!jitter.empty())
      throw DataError(source + ": sampling interval of driver '" + id + "' deviates more than " +
                          format_double(options.jitter_tolerance * 100.0) +
                          "% from 1/rate at data rows " + join_rows(jitter),
                      jitter);

    IngestCounters counters;
    if (options.policy == NonFinitePolicy::kInterpolate) {
      for (auto& v : d.values) counters.interpolated += interpolate_gaps(v, max_run);
    }
    const std::size_t n = d.timestamps.size();
    std::vector<char> keep(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& v : d.values) {
        if (!std::isfinite(v[i])) {
          keep[i] = 0;
          break;
        }
      }
    }
    std::vector<std::vector<double>> data(d.values.size());
    for (std::size_t c = 0; c < d.values.size(); ++c) {
      data[c].reserve(n);
      for (std::size_t i = 0; i < n; ++i)
        if (keep[i]) data[c].push_back(d.values[c][i]);
    }
    counters.rejected = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), 0));

    for (std::size_t c = 0; c < data.size(); ++c) {
      const auto lim = options.clip.find(channel_names[c]);
      if (lim == options.clip.end()) continue;
      for (double& x : data[c]) {
        const double y = std::clamp(x, lim->second.first, lim->second.second);
        if (y != x) {
          x = y;
          ++counters.clipped;
        }
      }
    }

    TelemetrySeries s(id, options.sample_rate_hz, options.scenario, channel_names,
                      std::move(data));
    s.set_counters(counters);
    out.push_back(std::move(s));
  }
  return out;
}

std::string export_csv_text(std::span<const TelemetrySeries> series) {
  std::string out;
  if (series.empty()) {
    out = std::string(kDriverColumn) + "," + kTimestampColumn + "\n";
    return out;
  }
  const auto& names = series.front().channel_names();
  out += kDriverColumn;
  out += ',';
  out += kTimestampColumn;
  for (const auto& n : names) out += "," + n;
  out += '\n';
  for (const auto& s : series) {
    if (s.channel_names() != names)
      throw SchemaError("cannot export series with differing channel sets");
    const double dt = 1.0 / s.sample_rate_hz();
    for (std::size_t i = 0; i < s.size(); ++i) {
      out += s.driver_id();
      out += ',';
      out += format_double(static_cast<double>(i) * dt);
      for (std::size_t c = 0; c < s.channel_count(); ++c) {
        out += ',';
        out += format_double(s.channel(c)[i]);
      }
      out += '\n';
    }
  }
  return out;
}

void export_csv(const std::filesystem::path& path, std::span<const TelemetrySeries> series) {
  write_text_file(path, export_csv_text(series));
}

ValidationReport validate_series(const TelemetrySeries& s) {
  ValidationReport r;
  r.driver_id = s.driver_id();
  r.sample_count = s.size();
  r.count_rejected = s.counters().rejected;
  r.count_interpolated = s.counters().interpolated;
  r.count_clipped = s.counters().clipped;
  for (std::size_t c = 0; c < s.channel_count(); ++c) {
    ChannelSummary cs;
    cs.name = s.channel_names()[c];
    const auto v = s.channel(c);
    if (!v.empty()) {
      const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
      cs.min = *mn;
      cs.max = *mx;
      double sum = 0.0;
      for (double x : v) sum += x;
      cs.mean = sum / static_cast<double>(v.size());
      // Guard against rounding drift for constant channels.
      cs.mean = std::clamp(cs.mean, cs.min, cs.max);
    }
    r.channels.push_back(cs);
  }
  bool finite = true;
  for (std::size_t c = 0; c < s.channel_count(); ++c)
    for (double x : s.channel(c)) finite = finite && std::isfinite(x);
  r.usable = r.sample_count > 0 && s.channel_count() > 0 && finite;
  return r;
}

}  // namespace drivestyle
