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

#include "drivestyle/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "drivestyle/csv.hpp"

namespace drivestyle {

namespace {

PerplexityResult finish(double ll, std::size_t n, int V) {
  PerplexityResult r;
  r.log_likelihood = ll;
  r.token_count = n;
  r.vocab_size = V;
  r.perplexity = std::exp(-ll / static_cast<double>(n));
  r.normalized_perplexity = r.perplexity / V;
  return r;
}

double document_log_likelihood(const Eigen::Ref<const Eigen::VectorXd>& theta_d,
                               const Eigen::MatrixXd& phi, const std::vector<int>& doc,
                               const std::string& id) {
  double ll = 0.0;
  for (int w : doc) {
    const double p = theta_d.dot(phi.col(w));
    if (!(p > 0.0))
      throw NumericalError("token " + std::to_string(w) + " of driver '" + id +
                           "' has zero probability under the model");
    ll += std::log(p);
  }
  return ll;
}

}  // namespace

PerplexityResult perplexity(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& phi,
                            const WordCorpus& corpus) {
  if (phi.cols() != corpus.vocab_size)
    throw ValidationError("model vocabulary (" + std::to_string(phi.cols()) +
                          ") does not match the corpus (" + std::to_string(corpus.vocab_size) + ")");
  if (theta.rows() != static_cast<Eigen::Index>(corpus.document_count()) ||
      theta.cols() != phi.rows())
    throw ValidationError("theta shape does not match the corpus and phi");
  corpus.validate();
  const std::size_t n = corpus.token_count();
  if (n == 0) throw ValidationError("perplexity of an empty corpus is undefined");
  double ll = 0.0;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d)
    ll += document_log_likelihood(theta.row(static_cast<Eigen::Index>(d)).transpose(), phi,
                                  corpus.documents[d], corpus.driver_ids[d]);
  return finish(ll, n, corpus.vocab_size);
}

PerplexityResult perplexity(const StyleModel& model, const WordCorpus& corpus) {
  Eigen::MatrixXd theta(static_cast<Eigen::Index>(corpus.document_count()), model.topic_count());
  for (std::size_t d = 0; d < corpus.document_count(); ++d)
    theta.row(static_cast<Eigen::Index>(d)) =
        model.theta.row(static_cast<Eigen::Index>(model.driver_index(corpus.driver_ids[d])));
  return perplexity(theta, model.phi, corpus);
}

PerplexityResult heldout_perplexity(const StyleModel& model, const WordCorpus& heldout,
                                    int fold_in_sweeps, std::uint64_t seed) {
  if (model.vocab_size() != heldout.vocab_size)
    throw ValidationError("held-out vocabulary does not match the model");
  Eigen::MatrixXd theta(static_cast<Eigen::Index>(heldout.document_count()), model.topic_count());
  for (std::size_t d = 0; d < heldout.document_count(); ++d) {
    auto rng = document_stream(seed, heldout.driver_ids[d]);
    const auto t = fold_in(model, heldout.documents[d], model.hyper.alpha, fold_in_sweeps, rng);
    for (int k = 0; k < model.topic_count(); ++k)
      theta(static_cast<Eigen::Index>(d), k) = t[static_cast<std::size_t>(k)];
  }
  return perplexity(theta, model.phi, heldout);
}

EntropyResult style_entropy(const Eigen::MatrixXd& phi) {
  EntropyResult r;
  for (Eigen::Index k = 0; k < phi.rows(); ++k) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < phi.cols(); ++i) {
      const double p = phi(k, i);
      if (p > 0.0) h -= p * std::log(p);
    }
    r.per_style.push_back(std::max(h, 0.0));
  }
  double s = 0.0;
  for (double h : r.per_style) s += h;
  r.mean = r.per_style.empty() ? 0.0 : s / static_cast<double>(r.per_style.size());
  return r;
}

EntropyResult style_entropy(const StyleModel& model) { return style_entropy(model.phi); }

MetricsReport evaluate(const StyleModel& model, const WordCorpus& corpus) {
  return {perplexity(model, corpus), style_entropy(model)};
}

std::string metrics_csv(const MetricsReport& r) {
  std::string s = "metric,value\n";
  s += "perplexity," + format_double(r.perplexity.perplexity) + "\n";
  s += "normalized_perplexity," + format_double(r.perplexity.normalized_perplexity) + "\n";
  s += "mean_style_entropy," + format_double(r.entropy.mean) + "\n";
  for (std::size_t k = 0; k < r.entropy.per_style.size(); ++k)
    s += "style_entropy_" + std::to_string(k) + "," + format_double(r.entropy.per_style[k]) + "\n";
  s += "token_count," + std::to_string(r.perplexity.token_count) + "\n";
  s += "vocab_size," + std::to_string(r.perplexity.vocab_size) + "\n";
  return s;
}

double median(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::pair<WordCorpus, WordCorpus> split_corpus(const WordCorpus& corpus, double heldout_fraction,
                                               std::uint64_t seed) {
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0))
    throw ValidationError("held-out fraction must lie in (0, 1)");
  const std::size_t D = corpus.document_count();
  std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
  for (std::size_t d = 0; d < D; ++d)
    keyed.emplace_back(fnv1a64(corpus.driver_ids[d] + "#" + std::to_string(seed)), d);
  std::sort(keyed.begin(), keyed.end());
  std::size_t h = static_cast<std::size_t>(std::ceil(heldout_fraction * static_cast<double>(D)));
  h = std::clamp<std::size_t>(h, D > 1 ? 1 : 0, D > 0 ? D - 1 : 0);
  std::vector<bool> held(D, false);
  for (std::size_t i = 0; i < h; ++i) held[keyed[i].second] = true;
  WordCorpus train, test;
  for (auto* c : {&train, &test}) {
    c->vocab_size = corpus.vocab_size;
    c->scenario = corpus.scenario;
  }
  for (std::size_t d = 0; d < D; ++d) {
    auto& c = held[d] ? test : train;
    c.driver_ids.push_back(corpus.driver_ids[d]);
    c.documents.push_back(corpus.documents[d]);
  }
  return {std::move(train), std::move(test)};
}

std::vector<SweepRow> sweep_hyperparams(const CorpusBuilder& build, const SweepConfig& cfg,
                                        Warnings* warnings) {
  if (cfg.m_values.empty() && cfg.k_values.empty())
    throw ValidationError("sweep needs at least one M or K value");
  if (cfg.seeds.empty()) throw ValidationError("sweep needs at least one seed");
  auto hyper_for = [&](int K, int V) {
    return Hyperparams::make_symmetric(K, V, cfg.alpha > 0.0 ? cfg.alpha : 50.0 / K, cfg.beta);
  };
  std::vector<SweepRow> rows;
  for (int M : cfg.m_values) {
    const WordCorpus corpus = build(M);
    for (auto seed : cfg.seeds) {
      TrainOptions o = cfg.train;
      o.seed = seed;
      const Hyperparams h = hyper_for(cfg.k_for_m_sweep, corpus.vocab_size);
      double score = 0.0;
      if (corpus.document_count() >= 2) {
        auto [tr, te] = split_corpus(corpus, cfg.heldout_fraction, seed);
        const auto model = train(tr, h, o).model;
        score = heldout_perplexity(model, te, cfg.fold_in_sweeps, seed).normalized_perplexity;
      } else {
        if (warnings)
          warnings->push_back("M=" + std::to_string(M) +
                              ": single driver, using training perplexity");
        const auto model = train(corpus, h, o).model;
        score = perplexity(model, corpus).normalized_perplexity;
      }
      rows.push_back({"M", M, "normalized_perplexity", score, seed});
    }
  }
  if (!cfg.k_values.empty()) {
    const WordCorpus corpus = build(cfg.m_for_k_sweep);
    for (int K : cfg.k_values) {
      for (auto seed : cfg.seeds) {
        TrainOptions o = cfg.train;
        o.seed = seed;
        const auto model = train(corpus, hyper_for(K, corpus.vocab_size), o).model;
        rows.push_back({"K", K, "mean_style_entropy", style_entropy(model).mean, seed});
      }
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s = "param,value,metric,score,seed\n";
  for (const auto& r : rows)
    s += r.param + "," + std::to_string(r.value) + "," + r.metric + "," + format_double(r.score) +
         "," + std::to_string(r.seed) + "\n";
  return s;
}

std::map<int, double> median_by_value(const std::vector<SweepRow>& rows, const std::string& param,
                                      const std::string& metric) {
  std::map<int, std::vector<double>> by;
  for (const auto& r : rows)
    if (r.param == param && r.metric == metric) by[r.value].push_back(r.score);
  std::map<int, double> out;
  for (auto& [v, s] : by) out[v] = median(s);
  return out;
}

}  // namespace drivestyle
