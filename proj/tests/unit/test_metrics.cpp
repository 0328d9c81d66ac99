#include <doctest.h>

#include <cmath>

#include "drivestyle/metrics.hpp"

using namespace drivestyle;

namespace {

WordCorpus corpus_of(std::vector<std::vector<int>> docs, int V) {
  WordCorpus c;
  for (std::size_t d = 0; d < docs.size(); ++d) c.driver_ids.push_back("d" + std::to_string(d));
  c.documents = std::move(docs);
  c.vocab_size = V;
  return c;
}

}  // namespace

TEST_CASE("uniform model has perplexity equal to the vocabulary size") {
  const int V = 125;
  const auto c = corpus_of({{0, 5, 124, 7}, {3, 3}}, V);
  Eigen::MatrixXd theta(2, 3);
  theta << 0.2, 0.3, 0.5,
           1.0, 0.0, 0.0;
  const Eigen::MatrixXd phi = Eigen::MatrixXd::Constant(3, V, 1.0 / V);
  const auto r = perplexity(theta, phi, c);
  CHECK(std::abs(r.perplexity - V) < 1e-9);
  CHECK(std::abs(r.normalized_perplexity - 1.0) < 1e-9);
  CHECK(r.token_count == 6);
}

TEST_CASE("concentrated single word gives perplexity near one") {
  const auto c = corpus_of({{1, 1, 1}}, 3);
  Eigen::MatrixXd theta(1, 1);
  theta << 1.0;
  Eigen::MatrixXd phi(1, 3);
  phi << 1e-12, 1.0 - 2e-12, 1e-12;
  CHECK(perplexity(theta, phi, c).perplexity == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("two-token hand computation") {
  const auto c = corpus_of({{0, 1}}, 2);
  Eigen::MatrixXd theta(1, 2);
  theta << 0.5, 0.5;
  Eigen::MatrixXd phi(2, 2);
  phi << 1.0, 0.0,
         0.0, 0.5;
  // p(w0) = 0.5, p(w1) = 0.25.
  const auto r = perplexity(theta, phi, c);
  CHECK(r.perplexity == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.log_likelihood == doctest::Approx(std::log(0.5) + std::log(0.25)));
}

TEST_CASE("zero-probability token is a numerical error") {
  const auto c = corpus_of({{1}}, 2);
  Eigen::MatrixXd theta(1, 1);
  theta << 1.0;
  Eigen::MatrixXd phi(1, 2);
  phi << 1.0, 0.0;
  CHECK_THROWS_AS(perplexity(theta, phi, c), NumericalError);
}

TEST_CASE("style entropy anchors") {
  Eigen::MatrixXd phi(3, 125);
  phi.row(0).setConstant(1.0 / 125.0);
  phi.row(1).setZero();
  phi(1, 7) = 1.0;
  phi.row(2).setZero();
  phi(2, 0) = 0.5;
  phi(2, 1) = 0.5;
  const auto e = style_entropy(phi);
  REQUIRE(e.per_style.size() == 3);
  CHECK(std::abs(e.per_style[0] - std::log(125.0)) < 1e-9);
  CHECK(e.per_style[1] == 0.0);
  CHECK(e.per_style[2] == doctest::Approx(std::log(2.0)));
  CHECK(e.mean == doctest::Approx((std::log(125.0) + std::log(2.0)) / 3.0));
}

TEST_CASE("median helper") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS(median({}));
}

TEST_CASE("split_corpus is deterministic and disjoint") {
  WordCorpus c;
  c.vocab_size = 2;
  for (int d = 0; d < 10; ++d) {
    c.driver_ids.push_back("d" + std::to_string(d));
    c.documents.push_back({d % 2});
  }
  const auto [train1, held1] = split_corpus(c, 0.2, 4);
  const auto [train2, held2] = split_corpus(c, 0.2, 4);
  CHECK(held1.driver_ids == held2.driver_ids);
  CHECK(held1.document_count() == 2);
  CHECK(train1.document_count() == 8);
  for (const auto& id : held1.driver_ids)
    CHECK(std::find(train1.driver_ids.begin(), train1.driver_ids.end(), id) == train1.driver_ids.end());
}

TEST_CASE("metrics csv layout") {
  MetricsReport r;
  r.perplexity = {-1.0, 4, 2, 1.5, 0.75};
  r.entropy = {{0.5, 0.25}, 0.375};
  CHECK(metrics_csv(r) ==
        "metric,value\nperplexity,1.5\nnormalized_perplexity,0.75\nmean_style_entropy,0.375\n"
        "style_entropy_0,0.5\nstyle_entropy_1,0.25\ntoken_count,4\nvocab_size,2\n");
}

TEST_CASE("single driver sweep falls back and stays finite") {
  CorpusBuilder build = [](int M) {
    WordCorpus c;
    c.driver_ids = {"only"};
    c.vocab_size = M * M;
    for (int i = 0; i < 40; ++i) c.documents.resize(1), c.documents[0].push_back(i % c.vocab_size);
    return c;
  };
  SweepConfig cfg;
  cfg.m_values = {2, 3};
  cfg.k_values = {1, 2};
  cfg.train.iterations = 30;
  cfg.train.burn_in = 10;
  cfg.train.thin = 5;
  Warnings w;
  const auto rows = sweep_hyperparams(build, cfg, &w);
  CHECK(rows.size() == 4);
  for (const auto& r : rows) CHECK(std::isfinite(r.score));
  CHECK_FALSE(w.empty());
  const auto csv = sweep_csv(rows);
  CHECK(csv.rfind("param,value,metric,score,seed\n", 0) == 0);
  const auto med = median_by_value(rows, "K", "mean_style_entropy");
  CHECK(med.size() == 2);
}
