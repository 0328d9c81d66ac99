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

#include <span>
#include <string>
#include <vector>

#include "drivestyle/distributions.hpp"
#include "drivestyle/factors.hpp"
#include "drivestyle/telemetry.hpp"

namespace drivestyle {

/// Equal-probability bins per factor and the mixed-radix word encoding.
///
/// A fragment whose factor-ell score falls in bin b_ell encodes to the word
/// sum_ell b_ell * M^(m - 1 - ell), factor 0 most significant. A score equal
/// to a cut point belongs to the upper bin.
struct Codebook {
  int bins_per_factor = 0;  // M
  std::vector<std::string> factor_labels;
  std::vector<FittedDistribution> fits;       // the law each factor was cut with
  std::vector<std::vector<double>> cuts;      // per factor, M - 1 ascending

  int factor_count() const noexcept { return static_cast<int>(factor_labels.size()); }
  int word_count() const;
  int bin_index(int factor, double score) const;
  int encode_bins(std::span<const int> bins) const;
  std::vector<int> decode(int word) const;
};

/// Cuts each factor's law at its k/M quantiles. Throws ValidationError for
/// M < 2 or a label/fit count mismatch and NumericalError when a quantile
/// is non-finite, not increasing, or outside the law's support.
Codebook build_codebook(std::span<const FittedDistribution> per_factor_fits, int bins_per_factor,
                        std::vector<std::string> factor_labels);

/// Word ids of one driver's fragments, in fragment order.
std::vector<int> encode(const FactorScores& scores, const Codebook& cb);

struct WordCorpus {
  std::vector<std::string> driver_ids;
  std::vector<std::vector<int>> documents;
  int vocab_size = 0;
  Scenario scenario = Scenario::kOther;

  std::size_t document_count() const noexcept { return documents.size(); }
  std::size_t token_count() const noexcept;
  /// Throws DataError if any id is out of range or the shape is inconsistent.
  void validate() const;
};

WordCorpus build_corpus(std::span<const FactorScores> scores, const Codebook& cb,
                        Scenario scenario = Scenario::kOther);

struct CodebookFit {
  Codebook codebook;
  std::vector<CandidateFits> candidates;  // per factor
  Warnings warnings;
};

/// Fits the four candidate families to each factor over all drivers'
/// fragments and cuts the selected law into M bins.
CodebookFit fit_codebook(std::span<const FactorScores> scores, int bins_per_factor,
                         bool prefer_gev = true);

}  // namespace drivestyle
