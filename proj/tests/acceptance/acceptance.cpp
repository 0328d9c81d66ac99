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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Usage: drivestyle_acceptance [path-to-cli]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "drivestyle/csv.hpp"
#include "drivestyle/discretizer.hpp"
#include "drivestyle/distributions.hpp"
#include "drivestyle/factors.hpp"
#include "drivestyle/hlm.hpp"
#include "drivestyle/metrics.hpp"
#include "drivestyle/pipeline.hpp"
#include "drivestyle/styleanalysis.hpp"
#include "drivestyle/synthgen.hpp"

namespace ds = drivestyle;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;  // 0: none
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::shared_ptr<const ds::WordCorpus> small_corpus(std::vector<std::vector<int>> docs, int V) {
  auto c = std::make_shared<ds::WordCorpus>();
  for (std::size_t d = 0; d < docs.size(); ++d) c->driver_ids.push_back("d" + std::to_string(d));
  c->documents = std::move(docs);
  c->vocab_size = V;
  return c;
}

double tv(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  return 0.5 * (a - b).cwiseAbs().sum();
}

// 1. Gibbs chain against the enumerated posterior.
Outcome exact_posterior() {
  const auto c = small_corpus({{0, 1, 0}, {1, 1, 0}}, 2);
  const auto h = ds::Hyperparams::make_symmetric(2, 2, 1.0, 1.0);
  std::vector<double> exact(64);
  for (int code = 0; code < 64; ++code) {
    std::vector<std::vector<int>> z(2, std::vector<int>(3));
    for (int b = 0; b < 6; ++b) z[static_cast<std::size_t>(b / 3)][static_cast<std::size_t>(b % 3)] = (code >> b) & 1;
    exact[static_cast<std::size_t>(code)] = ds::exact_joint_log_prob(*c, z, h);
  }
  const double mx = *std::max_element(exact.begin(), exact.end());
  double total = 0.0;
  for (auto& e : exact) total += (e = std::exp(e - mx));
  for (auto& e : exact) e /= total;

  auto s = ds::init_state(c, h, 2024);
  for (int i = 0; i < 1000; ++i) ds::gibbs_sweep(s, h);
  const int samples = 200000;
  std::vector<double> freq(64, 0.0);
  for (int i = 0; i < samples; ++i) {
    ds::gibbs_sweep(s, h);
    int code = 0;
    for (int b = 0; b < 6; ++b) code |= s.z[static_cast<std::size_t>(b / 3)][static_cast<std::size_t>(b % 3)] << b;
    freq[static_cast<std::size_t>(code)] += 1.0;
  }
  double d = 0.0;
  for (int i = 0; i < 64; ++i) d += 0.5 * std::abs(freq[static_cast<std::size_t>(i)] / samples - exact[static_cast<std::size_t>(i)]);
  return {d < 0.02, "TV = " + fmt(d) + " (< 0.02)"};
}

// 2. Recovery of generated styles and mixtures.
Outcome topic_recovery() {
  const int K = 3, V = 125;
  const auto h = ds::Hyperparams::make_symmetric(K, V, 50.0 / K, 0.1);
  const auto g = ds::generate_corpus(h, std::vector<int>(100, 500), 17);
  ds::TrainOptions o;
  o.iterations = 2000;
  o.burn_in = 500;
  o.thin = 10;
  o.seed = 3;
  o.trace_every = 0;
  const auto r = ds::train(g.corpus, h, o);
  std::vector<int> perm{0, 1, 2};
  double best_worst = 1e9, best_theta = 1e9;
  std::string per_topic;
  do {
    double worst = 0.0;
    std::string row;
    for (int k = 0; k < K; ++k) {
      const double d = tv(r.model.phi.row(perm[static_cast<std::size_t>(k)]), g.phi.row(k));
      worst = std::max(worst, d);
      row += (k ? " " : "") + fmt(d);
    }
    if (worst < best_worst) {
      best_worst = worst;
      per_topic = row;
      double err = 0.0;
      for (Eigen::Index d = 0; d < g.theta.rows(); ++d)
        for (int k = 0; k < K; ++k) err += std::abs(r.model.theta(d, perm[static_cast<std::size_t>(k)]) - g.theta(d, k));
      best_theta = err / static_cast<double>(g.theta.size());
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {best_worst < 0.05 && best_theta < 0.05,
          "per-style TV [" + per_topic + "] max " + fmt(best_worst) + " (< 0.05), mean |theta error| = " + fmt(best_theta) + " (< 0.05)"};
}

// 3. Tallies after every sweep of a fuzz corpus.
Outcome count_consistency() {
  std::mt19937_64 rng(31);
  std::vector<std::vector<int>> docs;
  std::size_t tokens = 0;
  while (tokens < 10000) {
    std::size_t n = std::min<std::size_t>(rng() % 200, 10000 - tokens);
    std::vector<int> d(n);
    for (auto& w : d) w = static_cast<int>(rng() % 57);
    tokens += n;
    docs.push_back(std::move(d));
  }
  const auto c = small_corpus(docs, 57);
  const auto h = ds::Hyperparams::make_symmetric(6, 57, 0.4, 0.05);
  auto s = ds::init_state(c, h, 8);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    ds::gibbs_sweep(s, h);
    if (!ds::counts_consistent(s)) ++violations;
  }
  return {violations == 0 && c->token_count() == 10000,
          std::to_string(c->token_count()) + " tokens, 1000 sweeps, " + std::to_string(violations) + " violations"};
}

// 4. Perplexity and entropy anchors.
Outcome metrics_closed_forms() {
  const int V = 125;
  ds::WordCorpus c;
  c.vocab_size = V;
  std::mt19937_64 rng(2);
  for (int d = 0; d < 5; ++d) {
    c.driver_ids.push_back("d" + std::to_string(d));
    c.documents.emplace_back();
    for (int n = 0; n < 40; ++n) c.documents.back().push_back(static_cast<int>(rng() % V));
  }
  Eigen::MatrixXd theta = Eigen::MatrixXd::Random(5, 3).cwiseAbs();
  for (Eigen::Index d = 0; d < 5; ++d) theta.row(d) /= theta.row(d).sum();
  const Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(3, V, 1.0 / V);
  const auto p = ds::perplexity(theta, uniform, c);
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(2, V);
  onehot(0, 3) = 1.0;
  onehot(1, 100) = 1.0;
  const auto h1 = ds::style_entropy(onehot);
  const auto hu = ds::style_entropy(uniform);
  const double e1 = std::abs(p.perplexity - V);
  const double e2 = std::abs(p.normalized_perplexity - 1.0);
  const double e3 = std::max(std::abs(h1.per_style[0]), std::abs(h1.per_style[1]));
  const double e4 = std::abs(hu.per_style[0] - std::log(125.0));
  return {e1 <= 1e-9 && e2 <= 1e-9 && e3 <= 1e-9 && e4 <= 1e-9,
          "|eta - |W|| = " + fmt(e1) + ", |eta_norm - 1| = " + fmt(e2) + ", one-hot H = " + fmt(e3) +
              ", |H - ln 125| = " + fmt(e4)};
}

// 5. GEV maximum-likelihood fit over ten seeds.
Outcome gev_fitting() {
  const auto truth = ds::make_gev(0.0, 1.0, 0.2);
  int good = 0;
  double worst_mu = 0.0, worst_sigma = 0.0, worst_xi = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> x(10000);
    for (auto& v : x) v = ds::sample(truth, rng);
    const auto fits = ds::fit_candidates(x);
    const auto& g = ds::select_fit(fits, true);
    if (g.family != ds::Family::kGEV) continue;
    // Relative error is undefined at mu = 0; an absolute 0.1 (10% of the scale) is used there.
    const double emu = std::abs(g.params[0]);
    const double esig = std::abs(g.params[1] - 1.0) / 1.0;
    const double exi = std::abs(g.params[2] - 0.2) / 0.2;
    worst_mu = std::max(worst_mu, emu);
    worst_sigma = std::max(worst_sigma, esig);
    worst_xi = std::max(worst_xi, exi);
    if (fits.fits.front().family == ds::Family::kGEV && emu <= 0.1 && esig <= 0.1 && exi <= 0.1) ++good;
  }
  return {good >= 9, std::to_string(good) + "/10 seeds pass (>= 9); worst |mu| = " + fmt(worst_mu) +
                         ", sigma rel = " + fmt(worst_sigma) + ", xi rel = " + fmt(worst_xi)};
}

// 6. Equal-probability occupancy of the fitted bins.
Outcome equal_probability_binning() {
  std::mt19937_64 rng(6);
  std::vector<double> data(5000);
  const auto source = ds::make_gev(0.3, 0.8, 0.1);
  for (auto& v : data) v = ds::sample(source, rng);
  const auto fits = ds::fit_candidates(data);
  const auto& law = ds::select_fit(fits, true);
  double worst = 0.0;
  for (int M : {4, 5}) {
    const std::vector<ds::FittedDistribution> f{law};
    const auto cb = ds::build_codebook(f, M, {"f"});
    std::vector<int> occ(static_cast<std::size_t>(M), 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++occ[static_cast<std::size_t>(cb.bin_index(0, ds::sample(law, rng)))];
    for (int o : occ) worst = std::max(worst, std::abs(static_cast<double>(o) / n - 1.0 / M));
  }
  return {worst < 0.02, "max occupancy deviation = " + fmt(100.0 * worst) + " pp (< 2 pp)"};
}

// 7. Three-block factor structure on twelve features.
Outcome factor_recovery() {
  const char* channels[] = {"v", "a_x", "yaw_rate", "a_y"};
  const char* stats[] = {"max", "mean", "std"};
  // Speed block: v stats; acceleration block: a_x stats; lateral block: yaw and a_y stats.
  const int block_of[] = {0, 1, 2, 2};
  const double level[] = {0.97, 0.9, 0.9};
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(12, 3);
  ds::FragmentStatsMatrix y;
  for (int c = 0; c < 4; ++c)
    for (int s = 0; s < 3; ++s) {
      a(c * 3 + s, block_of[c]) = level[block_of[c]];
      y.feature_labels.push_back(ds::feature_label(channels[c], ds::statistic_from_string(stats[s])));
    }
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z(0.0, 1.0);
  const int n = 5000;
  y.values.resize(12, n);
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d f(z(rng), z(rng), z(rng));
    for (int i = 0; i < 12; ++i) {
      const double u = std::sqrt(1.0 - a.row(i).squaredNorm());
      y.values(i, j) = 10.0 + 3.0 * (a.row(i).dot(f) + u * z(rng));
    }
  }
  const auto m = ds::fit_factor_model(y);
  if (m.factor_count() != 3) return {false, "Kaiser selected m = " + std::to_string(m.factor_count())};
  std::vector<int> perm{0, 1, 2};
  double best = 1e9;
  do {
    double worst = 0.0;
    for (int c = 0; c < 3; ++c) {
      const Eigen::VectorXd g = m.loadings.col(perm[static_cast<std::size_t>(c)]);
      worst = std::max(worst, std::min((g - a.col(c)).cwiseAbs().maxCoeff(), (g + a.col(c)).cwiseAbs().maxCoeff()));
    }
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {best < 0.1, "m = 3, max |loading error| = " + fmt(best) + " (< 0.1)"};
}

// 8. Aggressiveness score and urban level mapping.
Outcome scoring_fidelity() {
  const std::vector<double> theta{0.2, 0.3, 0.5};
  const double s = ds::aggressive_score(theta, ds::StyleOrdering::identity(3));
  const auto u = ds::LevelThresholds::urban();
  const int l1 = ds::score_to_level(2.3, u);
  const int l2 = ds::score_to_level(3.0, u);
  return {s == 2.3 && l1 == 4 && l2 == 5,
          "s = " + ds::format_double(s) + ", level(2.3) = " + std::to_string(l1) + ", level(3.0) = " + std::to_string(l2)};
}

// 9. Full pipeline on simulated cohorts against the generator's levels.
Outcome end_to_end() {
  std::vector<double> acc;
  std::string per_seed;
  for (std::uint64_t seed : {1, 2, 3}) {
    ds::CohortOptions o;
    o.drivers = 100;
    o.duration_s = 1800.0;
    o.seed = seed;
    const auto cohort = ds::simulate_cohort(o, ds::default_profile_set());
    ds::PipelineConfig cfg;
    cfg.telemetry = "<memory>";
    cfg.sample_rate_hz = ds::default_profile_set().sample_rate_hz;
    cfg.alpha = 0.1;
    cfg.seed = seed;
    cfg.group_permutations = 0;
    const auto series = cohort.series();
    const auto r = ds::analyze(series, cfg, &cohort.labels, nullptr);
    acc.push_back(r.confusion ? r.confusion->accuracy : 0.0);
    per_seed += (per_seed.empty() ? "" : ", ") + fmt(acc.back());
  }
  const double med = ds::median(acc);
  return {med >= 0.90, "weighted accuracy median = " + fmt(med) + " (>= 0.90); seeds: " + per_seed};
}

// 10. Shape of the M and K sweeps.
Outcome sweep_shape() {
  ds::SweepConfig sc;
  sc.m_values = {2, 3, 4, 5, 6};
  sc.k_values = {1, 2, 3, 4, 5, 6};
  sc.k_for_m_sweep = 4;
  sc.m_for_k_sweep = 4;
  sc.alpha = 0.0;  // 50 / K
  sc.beta = 0.1;
  sc.seeds = {1, 2, 3};
  sc.train.iterations = 400;
  sc.train.burn_in = 200;
  sc.train.thin = 10;
  sc.train.trace_every = 0;
  ds::CellScoreOptions co;
  const auto rows = ds::sweep_hyperparams(ds::make_corpus_builder(ds::simulate_cell_scores(co), false), sc);
  const auto eta = ds::median_by_value(rows, "M", "normalized_perplexity");
  const auto ent = ds::median_by_value(rows, "K", "mean_style_entropy");
  int argmin = 0;
  double best = 1e300;
  std::string curve;
  for (const auto& [m, v] : eta) {
    curve += (curve.empty() ? "" : " ") + std::to_string(m) + ":" + fmt(v);
    if (v < best) best = v, argmin = m;
  }
  const double noise = 0.05;
  bool monotone = true;
  std::string hcurve;
  double prev = 1e300;
  for (const auto& [k, v] : ent) {
    hcurve += (hcurve.empty() ? "" : " ") + std::to_string(k) + ":" + fmt(v);
    if (v > prev + noise) monotone = false;
    prev = v;
  }
  const bool ok_m = argmin >= 3 && argmin <= 5;
  return {ok_m && monotone, "argmin M = " + std::to_string(argmin) + " [" + curve + "]; H non-increasing within " +
                                fmt(noise) + ": " + (monotone ? "yes" : "no") + " [" + hcurve + "]"};
}

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return rc;
}

std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) out.emplace_back(e.path().filename().string(), ds::read_text_file(e.path()));
  std::sort(out.begin(), out.end());
  return out;
}

// 11. Re-running from a manifest through the CLI.
Outcome determinism(const std::string& cli) {
  if (cli.empty()) return {false, "no CLI binary given"};
  const fs::path root = fs::temp_directory_path() / "drivestyle_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string q = "\"" + cli + "\"";
  const std::string r = root.string();
  if (shell(q + " simulate --drivers 20 --duration 600 --seed 11 --out \"" + r + "/cohort\" > /dev/null") != 0)
    return {false, "simulate failed"};
  const std::string sets = " --set paths.telemetry=" + r + "/cohort/telemetry.csv --set paths.labels=" + r +
                           "/cohort/labels.csv --set paths.attributes=" + r + "/cohort/attributes.csv --set paths.output_dir=" +
                           r + "/out --set telemetry.sample_rate_hz=10 --set model.iterations=300 --set model.burn_in=100"
                           " --set report.group_permutations=200";
  if (shell(q + " run" + sets + " > /dev/null") != 0) return {false, "initial run failed"};
  fs::copy_file(root / "out" / "run-manifest.json", root / "manifest.json");
  if (shell(q + " run --manifest \"" + r + "/manifest.json\" > /dev/null") != 0) return {false, "first manifest run failed"};
  const auto a = snapshot(root / "out");
  fs::remove_all(root / "out");
  if (shell(q + " run --manifest \"" + r + "/manifest.json\" > /dev/null") != 0) return {false, "second manifest run failed"};
  const auto b = snapshot(root / "out");
  std::size_t differing = 0;
  if (a.size() != b.size()) differing = std::max(a.size(), b.size());
  else
    for (std::size_t i = 0; i < a.size(); ++i) differing += a[i] != b[i];
  const std::size_t count = a.size();
  fs::remove_all(root);
  return {differing == 0 && count >= 6, std::to_string(count) + " artifacts compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::vector<Criterion> criteria{
      {1, "exact-posterior equivalence", 60.0, exact_posterior},
      {2, "topic recovery", 300.0, topic_recovery},
      {3, "count consistency", 0.0, count_consistency},
      {4, "metrics closed forms", 0.0, metrics_closed_forms},
      {5, "GEV fitting", 10.0, gev_fitting},
      {6, "equal-probability binning", 0.0, equal_probability_binning},
      {7, "factor recovery", 0.0, factor_recovery},
      {8, "scoring fidelity", 0.0, scoring_fidelity},
      {9, "end-to-end synthetic accuracy", 900.0, end_to_end},
      {10, "sweep shape", 0.0, sweep_shape},
      {11, "determinism", 0.0, [&] { return determinism(cli); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0.0 && secs > c.time_limit_s) {
      o.pass = false;
      o.detail += "; over time limit " + fmt(c.time_limit_s) + " s";
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << " ("
              << fmt(secs) << " s)" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
