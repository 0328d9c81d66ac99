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

// Text forms of every artifact. JSON documents carry a "schema" name and a
// "schema_version"; readers reject other versions with SchemaError.
// Doubles are written in shortest round-trip form, so write -> read -> write
// is byte-identical.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "drivestyle/discretizer.hpp"
#include "drivestyle/factors.hpp"
#include "drivestyle/hlm.hpp"
#include "drivestyle/metrics.hpp"
#include "drivestyle/styleanalysis.hpp"
#include "drivestyle/synthgen.hpp"

namespace drivestyle {

inline constexpr int kSchemaVersion = 1;

std::string codebook_to_json(const Codebook& cb);
Codebook codebook_from_json(const std::string& text);

std::string model_to_json(const StyleModel& model);
StyleModel model_from_json(const std::string& text);

std::string factor_model_to_json(const FactorModel& model);
FactorModel factor_model_from_json(const std::string& text);

std::string profiles_to_json(const ProfileSet& profiles);
ProfileSet profiles_from_json(const std::string& text);

std::string thresholds_to_json(const LevelThresholds& t);
LevelThresholds thresholds_from_json(const std::string& text);

/// Confusion, accuracy, per-level precision/recall and the thresholds used.
std::string confusion_to_json(const WeightedConfusion& c, const LevelThresholds& thresholds,
                              const ThresholdFit* fit = nullptr);

/// `driver_id,fragment_index,word_id`, plus a `# vocab_size=...` line and a
/// `# scenario=...` line before the header.
std::string corpus_to_csv(const WordCorpus& corpus);
WordCorpus corpus_from_csv(const std::string& text, const std::string& source);

/// `driver_id,fragment_index,<factor labels...>`.
std::string factor_scores_csv(std::span<const FactorScores> scores);

}  // namespace drivestyle
