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

#include "drivestyle/hlm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "drivestyle/csv.hpp"

namespace drivestyle {

namespace {

std::size_t idx(std::size_t row, int col, int width) {
  return row * static_cast<std::size_t>(width) + static_cast<std::size_t>(col);
}

// Sum after sorting, so the result does not depend on the order of terms.
double order_free_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

// log Delta(a) = sum lgamma(a_i) - lgamma(sum a_i)
double log_dirichlet_norm(std::span<const double> a) {
  double s = 0.0, sum = 0.0;
  for (double v : a) {
    s += std::lgamma(v);
    sum += v;
  }
  return s - std::lgamma(sum);
}

void check_shapes(const WordCorpus& corpus, const Hyperparams& hyper) {
  hyper.validate();
  if (corpus.vocab_size != hyper.vocab_size())
    throw ValidationError("beta has length " + std::to_string(hyper.vocab_size()) +
                          " but the corpus vocabulary has " + std::to_string(corpus.vocab_size) +
                          " words");
  corpus.validate();
}

void tally(GibbsState& s) {
  const auto& docs = s.corpus->documents;
  s.doc_topic.assign(docs.size() * static_cast<std::size_t>(s.K), 0);
  s.topic_word.assign(static_cast<std::size_t>(s.K) * static_cast<std::size_t>(s.V), 0);
  s.topic_totals.assign(static_cast<std::size_t>(s.K), 0);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (std::size_t n = 0; n < docs[d].size(); ++n) {
      const int k = s.z[d][n];
      ++s.doc_topic[idx(d, k, s.K)];
      ++s.topic_word[idx(static_cast<std::size_t>(k), docs[d][n], s.V)];
      ++s.topic_totals[static_cast<std::size_t>(k)];
    }
  }
}

}  // namespace

bool Hyperparams::symmetric() const noexcept {
  auto all_equal = [](const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
  };
  return all_equal(alpha) && all_equal(beta);
}

void Hyperparams::validate() const {
  if (alpha.empty()) throw ValidationError("style count K must be at least 1");
  if (beta.empty()) throw ValidationError("vocabulary size must be at least 1");
  for (double a : alpha)
    if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("alpha entries must be positive");
  for (double b : beta)
    if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("beta entries must be positive");
}

Hyperparams Hyperparams::make_symmetric(int K, int V, double alpha, double beta) {
  if (K < 1) throw ValidationError("style count K must be at least 1, got " + std::to_string(K));
  if (V < 1) throw ValidationError("vocabulary size must be at least 1");
  Hyperparams h;
  h.alpha.assign(static_cast<std::size_t>(K), alpha);
  h.beta.assign(static_cast<std::size_t>(V), beta);
  h.validate();
  return h;
}

Hyperparams Hyperparams::make_default(int K, int V) {
  if (K < 1) throw ValidationError("style count K must be at least 1, got " + std::to_string(K));
  return make_symmetric(K, V, 50.0 / K, 0.1);
}

std::mt19937_64 document_stream(std::uint64_t seed, const std::string& driver_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(fnv1a64(driver_id)),
                    static_cast<std::uint32_t>(fnv1a64(driver_id) >> 32)};
  return std::mt19937_64(seq);
}

int sample_discrete(std::span<const double> weights, std::mt19937_64& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericalError("cannot sample from a non-positive weight vector");
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  // u rounded onto the total: take the last positive entry.
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return static_cast<int>(i);
  return 0;
}

GibbsState state_from_assignments(std::shared_ptr<const WordCorpus> corpus,
                                  const Hyperparams& hyper, std::vector<std::vector<int>> z,
                                  std::uint64_t seed) {
  if (!corpus) throw ValidationError("null corpus");
  check_shapes(*corpus, hyper);
  GibbsState s;
  s.corpus = std::move(corpus);
  s.K = hyper.topic_count();
  s.V = hyper.vocab_size();
  s.seed = seed;
  const auto& docs = s.corpus->documents;
  if (z.size() != docs.size()) throw ValidationError("assignment count does not match corpus");
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (z[d].size() != docs[d].size())
      throw ValidationError("assignment length does not match document " + std::to_string(d));
    for (int k : z[d])
      if (k < 0 || k >= s.K) throw RangeError("assignment outside [0, K)");
    s.streams.push_back(document_stream(seed, s.corpus->driver_ids[d]));
  }
  s.z = std::move(z);
  tally(s);
  return s;
}

GibbsState init_state(std::shared_ptr<const WordCorpus> corpus, const Hyperparams& hyper,
                      std::uint64_t seed) {
  if (!corpus) throw ValidationError("null corpus");
  check_shapes(*corpus, hyper);
  const int K = hyper.topic_count();
  std::vector<std::vector<int>> z(corpus->documents.size());
  std::vector<std::mt19937_64> streams;
  for (std::size_t d = 0; d < z.size(); ++d) {
    auto rng = document_stream(seed, corpus->driver_ids[d]);
    z[d].resize(corpus->documents[d].size());
    for (auto& k : z[d]) k = static_cast<int>(uniform01(rng) * K);
    streams.push_back(rng);
  }
  GibbsState s = state_from_assignments(std::move(corpus), hyper, std::move(z), seed);
  s.streams = std::move(streams);
  return s;
}

std::vector<double> gibbs_conditional(const GibbsState& state, const Hyperparams& hyper,
                                      std::size_t d, std::size_t n) {
  const int w = state.corpus->documents.at(d).at(n);
  double beta_sum = 0.0;
  for (double b : hyper.beta) beta_sum += b;
  std::vector<double> p(static_cast<std::size_t>(state.K));
  double total = 0.0;
  for (int k = 0; k < state.K; ++k) {
    const int nkw = state.n_kw(k, w);
    const int nk = state.topic_totals[static_cast<std::size_t>(k)];
    const int ndk = state.n_dk(d, k);
    if (nkw < 0 || nk < 0 || ndk < 0)
      throw InternalError("negative count at document " + std::to_string(d) + ", topic " +
                          std::to_string(k));
    const double pk = (nkw + hyper.beta[static_cast<std::size_t>(w)]) / (nk + beta_sum) *
                      (ndk + hyper.alpha[static_cast<std::size_t>(k)]);
    p[static_cast<std::size_t>(k)] = pk;
    total += pk;
  }
  for (auto& v : p) v /= total;
  return p;
}

void gibbs_sweep(GibbsState& s, const Hyperparams& hyper) {
  const auto& docs = s.corpus->documents;
  const int K = s.K;
  const int V = s.V;
  double beta_sum = 0.0;
  for (double b : hyper.beta) beta_sum += b;
  std::vector<double> cum(static_cast<std::size_t>(K));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    auto& rng = s.streams[d];
    int* nd = &s.doc_topic[idx(d, 0, K)];
    for (std::size_t n = 0; n < docs[d].size(); ++n) {
      const int w = docs[d][n];
      int k = s.z[d][n];
      int* nkw_old = &s.topic_word[idx(static_cast<std::size_t>(k), w, V)];
      --*nkw_old;
      --nd[k];
      --s.topic_totals[static_cast<std::size_t>(k)];
      if (*nkw_old < 0 || nd[k] < 0 || s.topic_totals[static_cast<std::size_t>(k)] < 0)
        throw InternalError("negative count after decrement at document " + std::to_string(d));
      const double bw = hyper.beta[static_cast<std::size_t>(w)];
      double acc = 0.0;
      for (int j = 0; j < K; ++j) {
        acc += (s.topic_word[idx(static_cast<std::size_t>(j), w, V)] + bw) /
               (s.topic_totals[static_cast<std::size_t>(j)] + beta_sum) *
               (nd[j] + hyper.alpha[static_cast<std::size_t>(j)]);
        cum[static_cast<std::size_t>(j)] = acc;
      }
      const double u = uniform01(rng) * acc;
      k = 0;
      while (k < K - 1 && !(u < cum[static_cast<std::size_t>(k)])) ++k;
      s.z[d][n] = k;
      ++s.topic_word[idx(static_cast<std::size_t>(k), w, V)];
      ++nd[k];
      ++s.topic_totals[static_cast<std::size_t>(k)];
    }
  }
  ++s.iteration;
}

bool counts_consistent(const GibbsState& state) {
  GibbsState fresh;
  fresh.corpus = state.corpus;
  fresh.K = state.K;
  fresh.V = state.V;
  fresh.z = state.z;
  tally(fresh);
  return fresh.doc_topic == state.doc_topic && fresh.topic_word == state.topic_word &&
         fresh.topic_totals == state.topic_totals;
}

void check_counts(const GibbsState& state) {
  GibbsState fresh;
  fresh.corpus = state.corpus;
  fresh.K = state.K;
  fresh.V = state.V;
  fresh.z = state.z;
  tally(fresh);
  if (fresh.doc_topic != state.doc_topic)
    throw InternalError("document-style counts differ from the assignments");
  if (fresh.topic_word != state.topic_word)
    throw InternalError("style-word counts differ from the assignments");
  if (fresh.topic_totals != state.topic_totals)
    throw InternalError("style totals differ from the assignments");
}

double exact_joint_log_prob(const WordCorpus& corpus, const std::vector<std::vector<int>>& z,
                            const Hyperparams& hyper) {
  hyper.validate();
  const int K = hyper.topic_count();
  const int V = hyper.vocab_size();
  if (z.size() != corpus.documents.size())
    throw ValidationError("assignment count does not match corpus");
  std::vector<std::vector<double>> nkw(static_cast<std::size_t>(K),
                                       std::vector<double>(static_cast<std::size_t>(V), 0.0));
  std::vector<double> doc_terms;
  const double log_delta_alpha = log_dirichlet_norm(hyper.alpha);
  std::vector<double> nd(static_cast<std::size_t>(K));
  for (std::size_t d = 0; d < z.size(); ++d) {
    if (z[d].size() != corpus.documents[d].size())
      throw ValidationError("assignment length does not match document " + std::to_string(d));
    std::fill(nd.begin(), nd.end(), 0.0);
    for (std::size_t n = 0; n < z[d].size(); ++n) {
      const int k = z[d][n];
      const int w = corpus.documents[d][n];
      if (k < 0 || k >= K) throw RangeError("assignment outside [0, K)");
      if (w < 0 || w >= V) throw RangeError("word id outside the vocabulary");
      nd[static_cast<std::size_t>(k)] += 1.0;
      nkw[static_cast<std::size_t>(k)][static_cast<std::size_t>(w)] += 1.0;
    }
    for (int k = 0; k < K; ++k) nd[static_cast<std::size_t>(k)] += hyper.alpha[static_cast<std::size_t>(k)];
    std::vector<double> lg;
    double sum = 0.0;
    for (double v : nd) {
      lg.push_back(std::lgamma(v));
      sum += v;
    }
    doc_terms.push_back(order_free_sum(lg) - std::lgamma(sum) - log_delta_alpha);
  }
  const double log_delta_beta = log_dirichlet_norm(hyper.beta);
  std::vector<double> topic_terms;
  for (int k = 0; k < K; ++k) {
    auto& row = nkw[static_cast<std::size_t>(k)];
    for (int w = 0; w < V; ++w) row[static_cast<std::size_t>(w)] += hyper.beta[static_cast<std::size_t>(w)];
    topic_terms.push_back(log_dirichlet_norm(row) - log_delta_beta);
  }
  return order_free_sum(topic_terms) + order_free_sum(doc_terms);
}

double exact_joint_log_prob(const GibbsState& state, const Hyperparams& hyper) {
  return exact_joint_log_prob(*state.corpus, state.z, hyper);
}

std::size_t StyleModel::driver_index(const std::string& driver_id) const {
  auto it = std::find(driver_ids.begin(), driver_ids.end(), driver_id);
  if (it == driver_ids.end()) throw SchemaError("driver '" + driver_id + "' is not in the model");
  return static_cast<std::size_t>(it - driver_ids.begin());
}

StyleModel estimate(const GibbsState& s, const Hyperparams& hyper) {
  const std::size_t D = s.corpus->documents.size();
  StyleModel m;
  m.driver_ids = s.corpus->driver_ids;
  m.hyper = hyper;
  m.theta.resize(static_cast<Eigen::Index>(D), s.K);
  m.phi.resize(s.K, s.V);
  const double alpha_sum = std::accumulate(hyper.alpha.begin(), hyper.alpha.end(), 0.0);
  const double beta_sum = std::accumulate(hyper.beta.begin(), hyper.beta.end(), 0.0);
  for (std::size_t d = 0; d < D; ++d) {
    const double denom = static_cast<double>(s.corpus->documents[d].size()) + alpha_sum;
    for (int k = 0; k < s.K; ++k)
      m.theta(static_cast<Eigen::Index>(d), k) =
          (s.n_dk(d, k) + hyper.alpha[static_cast<std::size_t>(k)]) / denom;
  }
  for (int k = 0; k < s.K; ++k) {
    const double denom = s.topic_totals[static_cast<std::size_t>(k)] + beta_sum;
    for (int w = 0; w < s.V; ++w)
      m.phi(k, w) = (s.n_kw(k, w) + hyper.beta[static_cast<std::size_t>(w)]) / denom;
  }
  return m;
}

namespace {

struct ChainOutcome {
  StyleModel model;
  std::vector<TracePoint> trace;
  double final_log_prob = 0.0;
  int samples = 0;
};

ChainOutcome run_chain(const std::shared_ptr<const WordCorpus>& corpus, const Hyperparams& hyper,
                       const TrainOptions& o, std::uint64_t seed) {
  ChainOutcome out;
  GibbsState s = init_state(corpus, hyper, seed);
  Eigen::MatrixXd theta_sum, phi_sum;
  for (int it = 1; it <= o.iterations; ++it) {
    gibbs_sweep(s, hyper);
    if (o.trace_every > 0 && (it % o.trace_every == 0 || it == o.iterations))
      out.trace.push_back({it, exact_joint_log_prob(s, hyper)});
    if (!o.single_sample && it > o.burn_in && (it - o.burn_in) % o.thin == 0) {
      StyleModel e = estimate(s, hyper);
      if (out.samples == 0) {
        theta_sum = e.theta;
        phi_sum = e.phi;
      } else {
        theta_sum += e.theta;
        phi_sum += e.phi;
      }
      ++out.samples;
    }
  }
  out.model = estimate(s, hyper);
  if (out.samples > 0) {
    out.model.theta = theta_sum / out.samples;
    out.model.phi = phi_sum / out.samples;
  }
  out.final_log_prob = out.trace.empty() || out.trace.back().iteration != o.iterations
                           ? exact_joint_log_prob(s, hyper)
                           : out.trace.back().joint_log_prob;
  return out;
}

}  // namespace

TrainResult train(std::shared_ptr<const WordCorpus> corpus, const Hyperparams& hyper,
                  const TrainOptions& o) {
  if (!corpus) throw ValidationError("null corpus");
  if (o.iterations < 1) throw ValidationError("iterations must be positive");
  if (o.burn_in < 0 || o.burn_in >= o.iterations)
    throw ValidationError("burn-in must satisfy 0 <= burn_in < iterations");
  if (o.thin < 1) throw ValidationError("thinning lag must be at least 1");
  if (o.chains < 1) throw ValidationError("chain count must be at least 1");
  if (o.trace_every < 0) throw ValidationError("trace interval must be non-negative");
  check_shapes(*corpus, hyper);
  if (corpus->documents.empty() || corpus->token_count() == 0)
    throw DataError("cannot train on an empty corpus");

  TrainResult result;
  int best = -1;
  ChainOutcome kept;
  for (int c = 0; c < o.chains; ++c) {
    ChainOutcome oc = run_chain(corpus, hyper, o, o.seed + static_cast<std::uint64_t>(c));
    result.diagnostics.chain_final_log_prob.push_back(oc.final_log_prob);
    if (best < 0 || oc.final_log_prob > kept.final_log_prob) {
      best = c;
      kept = std::move(oc);
    }
  }
  if (!o.single_sample && kept.samples == 0)
    result.diagnostics.warnings.push_back(
        "no post-burn-in sample fell on the thinning grid; estimate taken from the final state");
  result.model = std::move(kept.model);
  result.model.provenance = {o.iterations, o.burn_in, o.thin, o.seed, o.chains, best, kept.samples};
  result.diagnostics.trace = std::move(kept.trace);
  return result;
}

TrainResult train(const WordCorpus& corpus, const Hyperparams& hyper, const TrainOptions& o) {
  return train(std::make_shared<const WordCorpus>(corpus), hyper, o);
}

std::vector<double> sample_dirichlet(std::span<const double> alpha, std::mt19937_64& rng) {
  std::vector<double> x(alpha.size());
  for (int attempt = 0; attempt < 100; ++attempt) {
    double sum = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      std::gamma_distribution<double> g(alpha[i], 1.0);
      x[i] = g(rng);
      sum += x[i];
    }
    if (sum > 0.0 && std::isfinite(sum)) {
      for (auto& v : x) v /= sum;
      return x;
    }
  }
  throw NumericalError("Dirichlet draw underflowed repeatedly");
}

GeneratedCorpus generate_corpus(const Hyperparams& hyper, std::span<const int> doc_lengths,
                                std::uint64_t seed) {
  hyper.validate();
  const int K = hyper.topic_count();
  const int V = hyper.vocab_size();
  for (int n : doc_lengths)
    if (n < 1) throw ValidationError("document lengths must be positive");
  std::mt19937_64 rng(seed);
  GeneratedCorpus g;
  g.phi.resize(K, V);
  for (int k = 0; k < K; ++k) {
    const auto row = sample_dirichlet(hyper.beta, rng);
    for (int w = 0; w < V; ++w) g.phi(k, w) = row[static_cast<std::size_t>(w)];
  }
  g.theta.resize(static_cast<Eigen::Index>(doc_lengths.size()), K);
  g.corpus.vocab_size = V;
  std::vector<double> phi_row(static_cast<std::size_t>(V));
  for (std::size_t d = 0; d < doc_lengths.size(); ++d) {
    const auto theta = sample_dirichlet(hyper.alpha, rng);
    for (int k = 0; k < K; ++k) g.theta(static_cast<Eigen::Index>(d), k) = theta[static_cast<std::size_t>(k)];
    char id[32];
    std::snprintf(id, sizeof id, "doc%04zu", d);
    g.corpus.driver_ids.emplace_back(id);
    std::vector<int> doc, zd;
    for (int n = 0; n < doc_lengths[d]; ++n) {
      const int k = sample_discrete(theta, rng);
      for (int w = 0; w < V; ++w) phi_row[static_cast<std::size_t>(w)] = g.phi(k, w);
      zd.push_back(k);
      doc.push_back(sample_discrete(phi_row, rng));
    }
    g.corpus.documents.push_back(std::move(doc));
    g.z.push_back(std::move(zd));
  }
  return g;
}

std::vector<double> fold_in(const StyleModel& model, std::span<const int> document,
                            std::span<const double> alpha, int sweeps, std::mt19937_64& rng) {
  const int K = model.topic_count();
  if (static_cast<int>(alpha.size()) != K) throw ValidationError("alpha length must equal K");
  if (sweeps < 1) throw ValidationError("fold-in needs at least one sweep");
  const double alpha_sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  std::vector<double> theta(static_cast<std::size_t>(K));
  if (document.empty()) {
    for (int k = 0; k < K; ++k) theta[static_cast<std::size_t>(k)] = alpha[static_cast<std::size_t>(k)] / alpha_sum;
    return theta;
  }
  for (int w : document)
    if (w < 0 || w >= model.vocab_size()) throw DataError("fold-in word id outside the vocabulary");
  std::vector<int> z(document.size());
  std::vector<int> nd(static_cast<std::size_t>(K), 0);
  for (auto& k : z) {
    k = static_cast<int>(uniform01(rng) * K);
    ++nd[static_cast<std::size_t>(k)];
  }
  std::vector<double> p(static_cast<std::size_t>(K));
  std::vector<double> acc(static_cast<std::size_t>(K), 0.0);
  int kept = 0;
  const double N = static_cast<double>(document.size());
  for (int s = 1; s <= sweeps; ++s) {
    for (std::size_t n = 0; n < document.size(); ++n) {
      --nd[static_cast<std::size_t>(z[n])];
      for (int k = 0; k < K; ++k)
        p[static_cast<std::size_t>(k)] =
            model.phi(k, document[n]) * (nd[static_cast<std::size_t>(k)] + alpha[static_cast<std::size_t>(k)]);
      z[n] = sample_discrete(p, rng);
      ++nd[static_cast<std::size_t>(z[n])];
    }
    if (s > sweeps / 2) {
      for (int k = 0; k < K; ++k)
        acc[static_cast<std::size_t>(k)] += (nd[static_cast<std::size_t>(k)] + alpha[static_cast<std::size_t>(k)]) / (N + alpha_sum);
      ++kept;
    }
  }
  for (int k = 0; k < K; ++k) theta[static_cast<std::size_t>(k)] = acc[static_cast<std::size_t>(k)] / kept;
  return theta;
}

std::string trace_csv(const std::vector<TracePoint>& trace) {
  std::string s = "iteration,joint_log_prob\n";
  for (const auto& t : trace)
    s += std::to_string(t.iteration) + "," + format_double(t.joint_log_prob) + "\n";
  return s;
}

}  // namespace drivestyle
