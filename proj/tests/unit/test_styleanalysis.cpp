#include <doctest.h>

#include <cmath>
#include <random>

#include "drivestyle/styleanalysis.hpp"

using namespace drivestyle;

namespace {

Codebook normal_codebook(int M, int factors) {
  const std::vector<FittedDistribution> fits(static_cast<std::size_t>(factors), make_normal(0.0, 1.0));
  std::vector<std::string> labels;
  for (int i = 0; i < factors; ++i) labels.push_back("f" + std::to_string(i));
  return build_codebook(fits, M, labels);
}

std::vector<DriverScore> scored(const std::vector<double>& scores, const LevelThresholds& t) {
  std::vector<DriverScore> out;
  for (std::size_t i = 0; i < scores.size(); ++i)
    out.push_back({"d" + std::to_string(i), scores[i], score_to_level(scores[i], t)});
  return out;
}

std::vector<SubjectiveLabel> labelled(const std::vector<int>& levels) {
  std::vector<SubjectiveLabel> out;
  for (std::size_t i = 0; i < levels.size(); ++i)
    out.push_back({"d" + std::to_string(i), levels[i], LabelSource::kExpert});
  return out;
}

}  // namespace

TEST_CASE("extreme-word styles order calm to aggressive") {
  const auto cb = normal_codebook(5, 3);
  StyleModel m;
  m.phi = Eigen::MatrixXd::Zero(2, 125);
  m.phi(0, 124) = 1.0;  // (4,4,4)
  m.phi(1, 0) = 1.0;    // (0,0,0)
  m.theta = Eigen::MatrixXd::Constant(1, 2, 0.5);
  m.driver_ids = {"x"};
  const auto o = order_styles(m, cb);
  CHECK(o.rank == std::vector<int>{2, 1});
  CHECK(o.calmest_first() == std::vector<int>{1, 0});
  CHECK(o.warnings.empty());
}

TEST_CASE("identical styles tie to identity with a warning") {
  const auto cb = normal_codebook(2, 2);
  StyleModel m;
  m.phi = Eigen::MatrixXd::Constant(3, 4, 0.25);
  m.theta = Eigen::MatrixXd::Constant(1, 3, 1.0 / 3.0);
  m.driver_ids = {"x"};
  const auto o = order_styles(m, cb);
  CHECK(o.rank == std::vector<int>{1, 2, 3});
  CHECK_FALSE(o.warnings.empty());
}

TEST_CASE("bin severity sums decoded bins") {
  const auto cb = normal_codebook(5, 3);
  const auto s = bin_severity(cb);
  CHECK(s.size() == 125);
  CHECK(s[0] == 0.0);
  CHECK(s[54] == 6.0);
  CHECK(s[124] == 12.0);
}

TEST_CASE("aggressiveness score") {
  const auto id = StyleOrdering::identity(3);
  const std::vector<double> calm{1.0, 0.0, 0.0}, wild{0.0, 0.0, 1.0}, mix{0.2, 0.3, 0.5};
  CHECK(aggressive_score(calm, id) == 1.0);
  CHECK(aggressive_score(wild, id) == 3.0);
  CHECK(aggressive_score(mix, id) == 2.3);
  const std::vector<double> gamma{1.0, 2.0, 3.0};
  CHECK(aggressive_score(mix, id, gamma) == 2.3);

  StyleOrdering reversed;
  reversed.rank = {3, 2, 1};
  CHECK(aggressive_score(calm, reversed) == 3.0);
}

TEST_CASE("scenario level tables") {
  const auto u = LevelThresholds::urban();
  CHECK(score_to_level(3.0, u) == 5);
  CHECK(score_to_level(2.3, u) == 4);
  CHECK(score_to_level(2.97, u) == 5);
  CHECK(score_to_level(1.0, u) == 1);
  CHECK(score_to_level(1.009, u) == 1);
  CHECK(score_to_level(1.5, u) == 3);
  const auto h = LevelThresholds::highway();
  CHECK(score_to_level(1.0, h) == 1);
  CHECK(score_to_level(1.03, h) == 2);
  CHECK(score_to_level(2.5, h) == 4);
  CHECK_THROWS_AS(score_to_level(3.5, u), RangeError);
  CHECK_THROWS_AS(score_to_level(0.5, u), RangeError);
  CHECK_THROWS(LevelThresholds::for_scenario(Scenario::kOther));
  LevelThresholds bad = u;
  bad.cuts = {1.5, 1.4, 2.0, 2.5};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("consistency weights") {
  CHECK(consistency_weight(3, 3) == 1.0);
  CHECK(consistency_weight(3, 4) == 0.8);
  CHECK(consistency_weight(3, 2) == 0.8);
  CHECK(consistency_weight(3, 5) == 0.0);
}

TEST_CASE("weighted confusion accuracy") {
  const auto u = LevelThresholds::urban();
  const std::vector<double> s{1.0, 1.2, 1.5, 2.3, 3.0};
  const auto preds = scored(s, u);
  SUBCASE("exact") {
    const auto c = weighted_confusion(preds, labelled({1, 2, 3, 4, 5}));
    CHECK(c.accuracy == 1.0);
    CHECK(c.total == 5);
    for (int l = 0; l < kLevelCount; ++l) CHECK(c.raw[static_cast<std::size_t>(l)][static_cast<std::size_t>(l)] == 1);
  }
  SUBCASE("off by one") {
    const auto c = weighted_confusion(preds, labelled({2, 1, 4, 5, 4}));
    CHECK(c.accuracy == doctest::Approx(0.8));
  }
  SUBCASE("mixed") {
    const auto c = weighted_confusion(preds, labelled({1, 1, 5, 4, 5}));
    CHECK(c.accuracy == doctest::Approx((1 + 0.8 + 0 + 1 + 1) / 5.0));
    // Column 2 (predicted level 2) holds one driver whose truth is 1.
    CHECK(c.precision[1] == doctest::Approx(0.8));
    // Row 1 (truth level 1) holds two drivers predicted 1 and 2.
    CHECK(c.recall[0] == doctest::Approx(0.9));
    CHECK(std::isnan(c.recall[1]));
  }
  SUBCASE("unmatched ids") {
    auto t = labelled({1, 2, 3, 4, 5});
    t[0].driver_id = "zz";
    CHECK_THROWS_AS(weighted_confusion(preds, t), DataError);
  }
}

TEST_CASE("threshold fitting separates clean clusters") {
  std::vector<double> s;
  std::vector<int> lv;
  const double centres[] = {1.1, 1.5, 1.9, 2.4, 2.9};
  for (int l = 0; l < 5; ++l)
    for (int i = 0; i < 8; ++i) {
      s.push_back(centres[l] + 0.01 * i - 0.035);
      lv.push_back(l + 1);
    }
  LevelThresholds wide;
  wide.cuts = {1.3, 1.7, 2.1, 2.6};
  const auto preds = scored(s, wide);
  ThresholdFitOptions o;
  o.permutations = 200;
  const auto fit = fit_thresholds(preds, labelled(lv), o);
  CHECK(fit.accuracy == 1.0);
  CHECK(fit.significant);
  CHECK(fit.permutation_mean < 0.9);
  for (std::size_t i = 1; i < 4; ++i) CHECK(fit.thresholds.cuts[i] > fit.thresholds.cuts[i - 1]);
  const auto refit = scored(s, fit.thresholds);
  CHECK(weighted_confusion(refit, labelled(lv)).accuracy == 1.0);
}

TEST_CASE("single label gives a degenerate fit warning") {
  const std::vector<double> s{1.2, 1.8, 2.4, 2.6, 1.1, 2.9};
  const auto preds = scored(s, LevelThresholds::urban());
  ThresholdFitOptions o;
  o.permutations = 0;
  const auto fit = fit_thresholds(preds, labelled({3, 3, 3, 3, 3, 3}), o);
  CHECK(fit.accuracy == 1.0);
  CHECK_FALSE(fit.warnings.empty());
}

TEST_CASE("shuffled labels are not significant") {
  std::mt19937_64 rng(4);
  std::vector<double> s;
  std::vector<int> lv;
  for (int i = 0; i < 60; ++i) {
    s.push_back(1.0 + 2.0 * uniform01(rng));
    lv.push_back(1 + static_cast<int>(rng() % 5));
  }
  ThresholdFitOptions o;
  o.permutations = 100;
  const auto fit = fit_thresholds(scored(s, LevelThresholds::urban()), labelled(lv), o);
  CHECK_FALSE(fit.significant);
  CHECK(fit.p_value > 0.01);
}

TEST_CASE("label and score csv round trips") {
  const auto labels = labelled({1, 4});
  const auto text = labels_csv(labels);
  CHECK(text == "driver_id,level,source\nd0,1,expert\nd1,4,expert\n");
  const auto back = read_labels_csv(text, "mem");
  REQUIRE(back.size() == 2);
  CHECK(back[1].level == 4);
  CHECK_THROWS(read_labels_csv("driver_id,level,source\na,6,expert\n", "mem"));
  CHECK(label_source_from_string("self_report") == LabelSource::kSelfReport);

  const auto preds = scored({1.25, 2.5}, LevelThresholds::urban());
  const auto back2 = read_scores_csv(scores_csv(preds), "mem");
  REQUIRE(back2.size() == 2);
  CHECK(back2[0].score == 1.25);
  CHECK(back2[1].level == 4);
}

TEST_CASE("group report") {
  StyleModel m;
  m.driver_ids = {"a", "b", "c", "d"};
  m.theta.resize(4, 2);
  m.theta << 0.9, 0.1,
             0.8, 0.2,
             0.2, 0.8,
             0.1, 0.9;
  m.phi = Eigen::MatrixXd::Constant(2, 2, 0.5);
  std::map<std::string, DriverAttributes> attrs{{"a", {"female", "18-25", "<3y"}},
                                                {"b", {"female", "18-25", "<3y"}},
                                                {"c", {"male", "18-25", "3-5y"}},
                                                {"d", {"male", "26-35", "3-5y"}}};
  GroupReportOptions o;
  o.permutations = 200;
  const auto r = group_report(m, StyleOrdering::identity(2), attrs, o);

  const GroupRow* all = nullptr;
  const GroupRow* female = nullptr;
  const GroupRow* older = nullptr;
  for (const auto& row : r.rows) {
    if (row.group == "all") all = &row;
    if (row.attribute == "gender" && row.group == "female") female = &row;
    if (row.attribute == "age_band" && row.group == "26-35") older = &row;
  }
  REQUIRE(all);
  REQUIRE(female);
  REQUIRE(older);
  CHECK(all->size == 4);
  CHECK(all->mean[0] == doctest::Approx(0.5));
  CHECK(female->mean[0] == doctest::Approx(0.85));
  CHECK(older->size == 1);
  CHECK(std::isnan(older->sd[0]));
  CHECK_FALSE(r.tests.empty());

  attrs.erase("d");
  CHECK_THROWS_AS(group_report(m, StyleOrdering::identity(2), attrs, o), DataError);
}

TEST_CASE("single group equals the overall mean") {
  StyleModel m;
  m.driver_ids = {"a", "b"};
  m.theta.resize(2, 2);
  m.theta << 0.3, 0.7,
             0.5, 0.5;
  m.phi = Eigen::MatrixXd::Constant(2, 2, 0.5);
  std::map<std::string, DriverAttributes> attrs{{"a", {"male", "46+", ">10y"}},
                                                {"b", {"male", "46+", ">10y"}}};
  GroupReportOptions o;
  o.permutations = 10;
  const auto r = group_report(m, StyleOrdering::identity(2), attrs, o);
  for (const auto& row : r.rows) CHECK(row.mean[0] == doctest::Approx(0.4));
}
