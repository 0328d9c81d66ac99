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

// Hierarchical latent style model: drivers mix K shared styles, styles are
// distributions over driving words. Inference is collapsed Gibbs sampling
// over per-token style assignments.

#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drivestyle/discretizer.hpp"
#include "drivestyle/errors.hpp"

namespace drivestyle {

struct Hyperparams {
  std::vector<double> alpha;  // length K
  std::vector<double> beta;   // length V

  int topic_count() const noexcept { return static_cast<int>(alpha.size()); }
  int vocab_size() const noexcept { return static_cast<int>(beta.size()); }
  bool symmetric() const noexcept;
  /// Throws ValidationError on empty vectors or non-positive entries.
  void validate() const;

  static Hyperparams make_symmetric(int K, int V, double alpha, double beta);
  /// alpha = 50 / K, beta = 0.1.
  static Hyperparams make_default(int K, int V);
};

/// Collapsed sampler state. The corpus is shared read-only between chains.
struct GibbsState {
  std::shared_ptr<const WordCorpus> corpus;
  int K = 0;
  int V = 0;
  std::vector<std::vector<int>> z;
  std::vector<int> doc_topic;    // D x K, row-major
  std::vector<int> topic_word;   // K x V, row-major
  std::vector<int> topic_totals; // K
  std::vector<std::mt19937_64> streams;  // one per document
  std::uint64_t seed = 0;
  long long iteration = 0;

  int n_dk(std::size_t d, int k) const { return doc_topic[d * static_cast<std::size_t>(K) + static_cast<std::size_t>(k)]; }
  int n_kw(int k, int w) const { return topic_word[static_cast<std::size_t>(k) * static_cast<std::size_t>(V) + static_cast<std::size_t>(w)]; }
};

/// Random stream for one document, keyed by the run seed and the driver id
/// so that a driver's draws do not depend on its position in the corpus.
std::mt19937_64 document_stream(std::uint64_t seed, const std::string& driver_id);

/// Uniform initial assignments drawn from each document's stream.
GibbsState init_state(std::shared_ptr<const WordCorpus> corpus, const Hyperparams& hyper,
                      std::uint64_t seed);

/// State with the given assignments (streams keyed as in init_state).
GibbsState state_from_assignments(std::shared_ptr<const WordCorpus> corpus,
                                  const Hyperparams& hyper, std::vector<std::vector<int>> z,
                                  std::uint64_t seed);

/// Full conditional of z at (d, n). The token at (d, n) must already be
/// removed from every count. Throws InternalError on a negative count.
std::vector<double> gibbs_conditional(const GibbsState& state, const Hyperparams& hyper,
                                      std::size_t d, std::size_t n);

/// Resamples every token once in document order.
void gibbs_sweep(GibbsState& state, const Hyperparams& hyper);

/// True when the stored counts equal a recount of the assignments.
bool counts_consistent(const GibbsState& state);
/// Throws InternalError describing the first mismatch.
void check_counts(const GibbsState& state);

/// log p(z, w | alpha, beta) with Theta and Phi integrated out.
double exact_joint_log_prob(const WordCorpus& corpus, const std::vector<std::vector<int>>& z,
                            const Hyperparams& hyper);
double exact_joint_log_prob(const GibbsState& state, const Hyperparams& hyper);

struct TrainProvenance {
  int iterations = 0;
  int burn_in = 0;
  int thin = 0;
  std::uint64_t seed = 0;
  int chains = 1;
  int selected_chain = 0;
  int samples_averaged = 0;
};

struct StyleModel {
  std::vector<std::string> driver_ids;
  Eigen::MatrixXd theta;  // D x K
  Eigen::MatrixXd phi;    // K x V
  Hyperparams hyper;
  TrainProvenance provenance;

  int topic_count() const noexcept { return static_cast<int>(phi.rows()); }
  int vocab_size() const noexcept { return static_cast<int>(phi.cols()); }
  std::size_t driver_count() const noexcept { return static_cast<std::size_t>(theta.rows()); }
  /// Row of `driver_id`, or throws SchemaError.
  std::size_t driver_index(const std::string& driver_id) const;
};

/// Posterior-mean point estimates from the current counts.
StyleModel estimate(const GibbsState& state, const Hyperparams& hyper);

struct TrainOptions {
  int iterations = 2000;
  int burn_in = 500;
  int thin = 10;
  std::uint64_t seed = 1;
  int chains = 1;
  /// Estimate from the final state only instead of averaging samples.
  bool single_sample = false;
  /// Record the joint log-probability every this many sweeps (0 = never).
  int trace_every = 1;
};

struct TracePoint {
  long long iteration = 0;
  double joint_log_prob = 0.0;
};

struct TrainDiagnostics {
  std::vector<TracePoint> trace;  // of the selected chain
  std::vector<double> chain_final_log_prob;
  Warnings warnings;
};

struct TrainResult {
  StyleModel model;
  TrainDiagnostics diagnostics;
};

/// Runs `chains` independent chains with seeds seed, seed+1, ... and keeps
/// the one with the highest final joint log-probability. Post-burn-in
/// estimates are averaged every `thin` sweeps.
TrainResult train(std::shared_ptr<const WordCorpus> corpus, const Hyperparams& hyper,
                  const TrainOptions& options);
TrainResult train(const WordCorpus& corpus, const Hyperparams& hyper, const TrainOptions& options);

struct GeneratedCorpus {
  WordCorpus corpus;
  Eigen::MatrixXd theta;  // D x K
  Eigen::MatrixXd phi;    // K x V
  std::vector<std::vector<int>> z;
};

/// Samples from the generative model: phi_k ~ Dir(beta), theta_d ~ Dir(alpha),
/// z ~ Cat(theta_d), w ~ Cat(phi_z).
GeneratedCorpus generate_corpus(const Hyperparams& hyper, std::span<const int> doc_lengths,
                                std::uint64_t seed);

std::vector<double> sample_dirichlet(std::span<const double> alpha, std::mt19937_64& rng);

/// Estimates theta for an unseen document with phi frozen: `sweeps` Gibbs
/// sweeps over its tokens, theta averaged over the second half.
std::vector<double> fold_in(const StyleModel& model, std::span<const int> document,
                            std::span<const double> alpha, int sweeps, std::mt19937_64& rng);

/// Uniform double in [0, 1) with 53 random bits. Used instead of
/// std::uniform_real_distribution so draws do not depend on the standard
/// library implementation.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Index drawn proportionally to non-negative `weights`.
int sample_discrete(std::span<const double> weights, std::mt19937_64& rng);

std::string trace_csv(const std::vector<TracePoint>& trace);

}  // namespace drivestyle
