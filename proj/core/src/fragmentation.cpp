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

#include "drivestyle/fragmentation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "drivestyle/csv.hpp"

namespace drivestyle {

const char* to_string(Statistic s) {
  switch (s) {
    case Statistic::kMax: return "max";
    case Statistic::kMean: return "mean";
    case Statistic::kMin: return "min";
    case Statistic::kStd: return "std";
  }
  return "?";
}

Statistic statistic_from_string(const std::string& s) {
  if (s == "max") return Statistic::kMax;
  if (s == "mean" || s == "avg") return Statistic::kMean;
  if (s == "min") return Statistic::kMin;
  if (s == "std") return Statistic::kStd;
  throw ValidationError("unknown statistic '" + s + "' (expected max, mean, min or std)");
}

std::size_t samples_per_fragment(const FragmentConfig& cfg, double sample_rate_hz) {
  if (!(cfg.tau_s > 0.0) || !std::isfinite(cfg.tau_s))
    throw ValidationError("fragment length tau_s must be positive");
  if (cfg.stats.empty()) throw ValidationError("at least one fragment statistic is required");
  std::set<Statistic> unique(cfg.stats.begin(), cfg.stats.end());
  if (unique.size() != cfg.stats.size())
    throw ValidationError("fragment statistics must be distinct");
  const double n = std::floor(cfg.tau_s * sample_rate_hz + 1e-9);
  if (n < 2.0)
    throw ValidationError("tau_s * sample_rate_hz must cover at least two samples");
  return static_cast<std::size_t>(n);
}

FragmentList segment(const TelemetrySeries& s, const FragmentConfig& cfg) {
  const std::size_t len = samples_per_fragment(cfg, s.sample_rate_hz());
  FragmentList out;
  out.driver_id = s.driver_id();
  out.scenario = s.scenario();
  out.channel_names = s.channel_names();
  const std::size_t count = s.size() / len;
  if (count == 0) {
    out.warnings.push_back("series '" + s.driver_id() + "' has " + std::to_string(s.size()) +
                           " samples, shorter than one fragment of " + std::to_string(len));
    return out;
  }
  out.fragments.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Fragment f;
    f.index = i;
    f.begin = i * len;
    f.length = len;
    f.channels.reserve(s.channel_count());
    for (std::size_t c = 0; c < s.channel_count(); ++c)
      f.channels.push_back(s.channel(c).subspan(f.begin, len));
    out.fragments.push_back(std::move(f));
  }
  return out;
}

std::string feature_label(const std::string& channel, Statistic stat) {
  return channel + "_" + to_string(stat);
}

double compute_statistic(std::span<const double> window, Statistic stat) {
  if (window.empty()) throw ValidationError("statistic of an empty window");
  switch (stat) {
    case Statistic::kMax:
      return *std::max_element(window.begin(), window.end());
    case Statistic::kMin:
      return *std::min_element(window.begin(), window.end());
    case Statistic::kMean: {
      double sum = 0.0;
      for (double x : window) sum += x;
      return sum / static_cast<double>(window.size());
    }
    case Statistic::kStd: {
      // Two-pass population standard deviation.
      double sum = 0.0;
      for (double x : window) sum += x;
      const double mean = sum / static_cast<double>(window.size());
      double ss = 0.0;
      for (double x : window) ss += (x - mean) * (x - mean);
      return std::sqrt(ss / static_cast<double>(window.size()));
    }
  }
  return 0.0;
}

FragmentStatsMatrix fragment_stats(const FragmentList& fragments, const FragmentConfig& cfg) {
  if (fragments.fragments.empty())
    throw ValidationError("fragment_stats needs at least one fragment (driver '" +
                          fragments.driver_id + "')");
  if (cfg.stats.empty()) throw ValidationError("at least one fragment statistic is required");
  FragmentStatsMatrix y;
  y.driver_id = fragments.driver_id;
  y.scenario = fragments.scenario;
  const std::size_t nch = fragments.channel_names.size();
  const std::size_t nst = cfg.stats.size();
  for (const auto& ch : fragments.channel_names)
    for (auto st : cfg.stats) y.feature_labels.push_back(feature_label(ch, st));
  y.values.resize(static_cast<Eigen::Index>(nch * nst),
                  static_cast<Eigen::Index>(fragments.fragments.size()));
  for (std::size_t i = 0; i < fragments.fragments.size(); ++i) {
    const Fragment& f = fragments.fragments[i];
    for (std::size_t c = 0; c < nch; ++c) {
      for (std::size_t k = 0; k < nst; ++k) {
        const double v = compute_statistic(f.channels[c], cfg.stats[k]);
        if (!std::isfinite(v))
          throw DataError("non-finite statistic in fragment " + std::to_string(i) +
                          " of driver '" + fragments.driver_id + "'");
        y.values(static_cast<Eigen::Index>(c * nst + k), static_cast<Eigen::Index>(i)) = v;
      }
    }
  }
  return y;
}

FragmentStatsMatrix pool(std::span<const FragmentStatsMatrix> per_driver) {
  FragmentStatsMatrix out;
  out.driver_id = "*";
  if (per_driver.empty()) return out;
  out.feature_labels = per_driver.front().feature_labels;
  out.scenario = per_driver.front().scenario;
  Eigen::Index cols = 0;
  for (const auto& y : per_driver) {
    if (y.feature_labels != out.feature_labels)
      throw SchemaError("cannot pool matrices with different feature labels (driver '" +
                        y.driver_id + "')");
    cols += y.values.cols();
  }
  out.values.resize(static_cast<Eigen::Index>(out.feature_labels.size()), cols);
  Eigen::Index at = 0;
  for (const auto& y : per_driver) {
    out.values.middleCols(at, y.values.cols()) = y.values;
    at += y.values.cols();
  }
  return out;
}

std::string stats_matrix_csv(const FragmentStatsMatrix& y) {
  std::string s = "feature";
  for (Eigen::Index j = 0; j < y.values.cols(); ++j) s += "," + std::to_string(j);
  s += '\n';
  for (Eigen::Index r = 0; r < y.values.rows(); ++r) {
    s += y.feature_labels[static_cast<std::size_t>(r)];
    for (Eigen::Index j = 0; j < y.values.cols(); ++j) s += "," + format_double(y.values(r, j));
    s += '\n';
  }
  return s;
}

}  // namespace drivestyle
