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

#include "drivestyle/discretizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drivestyle {

int Codebook::word_count() const {
  long long w = 1;
  for (int i = 0; i < factor_count(); ++i) {
    w *= bins_per_factor;
    if (w > std::numeric_limits<int>::max())
      throw ValidationError("codebook vocabulary too large");
  }
  return static_cast<int>(w);
}

int Codebook::bin_index(int factor, double score) const {
  const auto& c = cuts.at(static_cast<std::size_t>(factor));
  return static_cast<int>(std::upper_bound(c.begin(), c.end(), score) - c.begin());
}

int Codebook::encode_bins(std::span<const int> bins) const {
  if (static_cast<int>(bins.size()) != factor_count())
    throw ValidationError("bin tuple length does not match the factor count");
  int word = 0;
  for (int b : bins) {
    if (b < 0 || b >= bins_per_factor) throw RangeError("bin index out of range");
    word = word * bins_per_factor + b;
  }
  return word;
}

std::vector<int> Codebook::decode(int word) const {
  if (word < 0 || word >= word_count()) throw RangeError("word id out of range");
  std::vector<int> bins(static_cast<std::size_t>(factor_count()));
  for (int l = factor_count() - 1; l >= 0; --l) {
    bins[static_cast<std::size_t>(l)] = word % bins_per_factor;
    word /= bins_per_factor;
  }
  return bins;
}

Codebook build_codebook(std::span<const FittedDistribution> per_factor_fits, int bins_per_factor,
                        std::vector<std::string> factor_labels) {
  if (bins_per_factor < 2) throw ValidationError("bins per factor M must be at least 2");
  if (per_factor_fits.empty()) throw ValidationError("codebook needs at least one factor");
  if (factor_labels.size() != per_factor_fits.size())
    throw ValidationError("one factor label per fitted distribution is required");
  Codebook cb;
  cb.bins_per_factor = bins_per_factor;
  cb.factor_labels = std::move(factor_labels);
  cb.fits.assign(per_factor_fits.begin(), per_factor_fits.end());
  (void)cb.word_count();
  for (std::size_t l = 0; l < per_factor_fits.size(); ++l) {
    const auto& fit = per_factor_fits[l];
    std::vector<double> c;
    for (int k = 1; k < bins_per_factor; ++k) {
      const double q = quantile(fit, static_cast<double>(k) / bins_per_factor);
      if (!std::isfinite(q) || q < fit.support_lo || q > fit.support_hi)
        throw NumericalError("quantile " + std::to_string(k) + "/" +
                             std::to_string(bins_per_factor) + " of factor '" +
                             cb.factor_labels[l] + "' lies outside the fitted support");
      if (!c.empty() && !(q > c.back()))
        throw NumericalError("cut points of factor '" + cb.factor_labels[l] +
                             "' are not strictly increasing");
      c.push_back(q);
    }
    cb.cuts.push_back(std::move(c));
  }
  return cb;
}

std::vector<int> encode(const FactorScores& scores, const Codebook& cb) {
  if (scores.factor_labels != cb.factor_labels)
    throw SchemaError("factor labels of driver '" + scores.driver_id +
                      "' do not match the codebook");
  const int m = cb.factor_count();
  std::vector<int> words(scores.fragment_count());
  std::vector<int> bins(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (int l = 0; l < m; ++l)
      bins[static_cast<std::size_t>(l)] =
          cb.bin_index(l, scores.scores(l, static_cast<Eigen::Index>(i)));
    words[i] = cb.encode_bins(bins);
  }
  return words;
}

std::size_t WordCorpus::token_count() const noexcept {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.size();
  return n;
}

void WordCorpus::validate() const {
  if (vocab_size < 1) throw DataError("corpus vocabulary size must be positive");
  if (driver_ids.size() != documents.size())
    throw DataError("corpus has " + std::to_string(driver_ids.size()) + " driver ids for " +
                    std::to_string(documents.size()) + " documents");
  for (std::size_t d = 0; d < documents.size(); ++d)
    for (int w : documents[d])
      if (w < 0 || w >= vocab_size)
        throw DataError("word id " + std::to_string(w) + " of driver '" + driver_ids[d] +
                        "' outside [0, " + std::to_string(vocab_size) + ")");
}

WordCorpus build_corpus(std::span<const FactorScores> scores, const Codebook& cb,
                        Scenario scenario) {
  WordCorpus c;
  c.vocab_size = cb.word_count();
  c.scenario = scenario;
  for (const auto& s : scores) {
    c.driver_ids.push_back(s.driver_id);
    c.documents.push_back(encode(s, cb));
  }
  return c;
}

CodebookFit fit_codebook(std::span<const FactorScores> scores, int bins_per_factor,
                         bool prefer_gev) {
  if (scores.empty()) throw ValidationError("no factor scores to discretize");
  const auto& labels = scores.front().factor_labels;
  const int m = static_cast<int>(labels.size());
  CodebookFit out;
  std::vector<FittedDistribution> selected;
  for (int l = 0; l < m; ++l) {
    std::vector<double> data;
    for (const auto& s : scores) {
      if (s.factor_labels != labels)
        throw SchemaError("factor labels differ between drivers");
      for (Eigen::Index i = 0; i < s.scores.cols(); ++i) data.push_back(s.scores(l, i));
    }
    auto cands = fit_candidates(data);
    for (const auto& w : cands.warnings)
      out.warnings.push_back(labels[static_cast<std::size_t>(l)] + ": " + w);
    selected.push_back(select_fit(cands, prefer_gev));
    out.candidates.push_back(std::move(cands));
  }
  out.codebook = build_codebook(selected, bins_per_factor, labels);
  return out;
}

}  // namespace drivestyle
