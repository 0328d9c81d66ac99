#include <doctest.h>

#include <cmath>

#include "drivestyle/fragmentation.hpp"

using namespace drivestyle;

namespace {

TelemetrySeries constant_series(std::size_t n, double rate, std::size_t channels = 1, double c = 2.5) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> data;
  const char* known[] = {"v", "a_x", "yaw_rate", "a_y"};
  for (std::size_t i = 0; i < channels; ++i) {
    names.push_back(known[i]);
    data.emplace_back(n, c);
  }
  return TelemetrySeries("d", rate, Scenario::kUrban, names, data);
}

}  // namespace

TEST_CASE("fragment counts at 100 Hz and tau 10 s") {
  FragmentConfig cfg;
  CHECK(samples_per_fragment(cfg, 100.0) == 1000);

  const auto three = segment(constant_series(3000, 100.0), cfg);
  REQUIRE(three.fragments.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(three.fragments[i].length == 1000);
    CHECK(three.fragments[i].begin == 1000 * i);
    CHECK(three.fragments[i].index == i);
  }

  CHECK(segment(constant_series(999, 100.0), cfg).fragments.empty());
  CHECK_FALSE(segment(constant_series(999, 100.0), cfg).warnings.empty());
  CHECK(segment(constant_series(1000, 100.0), cfg).fragments.size() == 1);
}

TEST_CASE("constant channel statistics") {
  for (auto st : {Statistic::kMax, Statistic::kMean, Statistic::kMin}) {
    const std::vector<double> w(17, 4.25);
    CHECK(compute_statistic(w, st) == 4.25);
  }
  const std::vector<double> w(17, 4.25);
  CHECK(compute_statistic(w, Statistic::kStd) == 0.0);
}

TEST_CASE("channel [0, 1] uses population std") {
  const std::vector<double> w{0.0, 1.0};
  CHECK(compute_statistic(w, Statistic::kMax) == 1.0);
  CHECK(compute_statistic(w, Statistic::kMean) == 0.5);
  CHECK(compute_statistic(w, Statistic::kStd) == 0.5);
  CHECK(compute_statistic(w, Statistic::kMin) == 0.0);
}

TEST_CASE("four channels by three statistics give twelve feature rows") {
  FragmentConfig cfg;
  const auto frags = segment(constant_series(2000, 100.0, 4), cfg);
  const auto y = fragment_stats(frags, cfg);
  CHECK(y.feature_count() == 12);
  CHECK(y.fragment_count() == 2);
  REQUIRE(y.feature_labels.size() == 12);
  CHECK(y.feature_labels[0] == feature_label("v", Statistic::kMax));
  CHECK(y.feature_labels[1] == feature_label("v", Statistic::kMean));
  CHECK(y.feature_labels[2] == feature_label("v", Statistic::kStd));
  CHECK(y.values(1, 0) == 2.5);
  CHECK(y.values(2, 1) == 0.0);
}

TEST_CASE("statistic names") {
  CHECK(statistic_from_string("avg") == Statistic::kMean);
  CHECK(statistic_from_string("std") == Statistic::kStd);
  CHECK_THROWS_AS(statistic_from_string("median"), ValidationError);
}

TEST_CASE("pool concatenates drivers with the same labels") {
  FragmentConfig cfg;
  std::vector<FragmentStatsMatrix> per;
  per.push_back(fragment_stats(segment(constant_series(2000, 100.0, 2, 1.0), cfg), cfg));
  per.push_back(fragment_stats(segment(constant_series(3000, 100.0, 2, 3.0), cfg), cfg));
  const auto p = pool(per);
  CHECK(p.fragment_count() == 5);
  CHECK(p.values(1, 0) == 1.0);
  CHECK(p.values(1, 4) == 3.0);

  per[1].feature_labels[0] = "other";
  CHECK_THROWS(pool(per));
}
