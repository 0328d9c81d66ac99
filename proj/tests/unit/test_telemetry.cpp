#include <doctest.h>

#include <cmath>
#include <sstream>

#include "drivestyle/csv.hpp"
#include "drivestyle/telemetry.hpp"

using namespace drivestyle;

namespace {

std::string make_csv(std::size_t drivers, std::size_t rows, double rate, bool with_yaw = true) {
  std::ostringstream os;
  os << "driver_id,timestamp_s,v,a_x,a_y" << (with_yaw ? ",yaw_rate" : "") << "\n";
  for (std::size_t d = 0; d < drivers; ++d)
    for (std::size_t i = 0; i < rows; ++i) {
      os << "d" << d << "," << format_double(static_cast<double>(i) / rate) << ",50,0.1,0.2";
      if (with_yaw) os << ",1.5";
      os << "\n";
    }
  return os.str();
}

IngestOptions at(double rate) {
  IngestOptions o;
  o.sample_rate_hz = rate;
  return o;
}

}  // namespace

TEST_CASE("two drivers of 3000 rows at 100 Hz give two full series") {
  const auto specs = default_channel_specs();
  const auto series = ingest_csv_text(make_csv(2, 3000, 100.0), specs, at(100.0));
  REQUIRE(series.size() == 2);
  CHECK(series[0].driver_id() == "d0");
  CHECK(series[1].driver_id() == "d1");
  CHECK(series[0].size() == 3000);
  CHECK(series[1].size() == 3000);
  CHECK(series[0].channel_count() == 4);
}

TEST_CASE("missing required yaw rate column is a schema error") {
  const auto specs = default_channel_specs();
  CHECK_THROWS_AS(ingest_csv_text(make_csv(1, 10, 100.0, false), specs, at(100.0)), SchemaError);
}

TEST_CASE("optional channel may be absent") {
  auto specs = default_channel_specs();
  specs.back().required = false;
  const auto series = ingest_csv_text(make_csv(1, 10, 100.0, false), specs, at(100.0));
  REQUIRE(series.size() == 1);
  CHECK(series[0].channel_count() == 3);
  CHECK_FALSE(series[0].channel_index("yaw_rate").has_value());
}

TEST_CASE("one 20 ms step among 10 ms steps is reported by row") {
  std::string text = "driver_id,timestamp_s,v,a_x,a_y,yaw_rate\n";
  const double ts[] = {0.0, 0.01, 0.02, 0.04, 0.05};
  for (double t : ts) text += "a," + format_double(t) + ",1,0,0,0\n";
  const auto specs = default_channel_specs();
  try {
    ingest_csv_text(text, specs, at(100.0));
    FAIL("expected a data error");
  } catch (const DataError& e) {
    REQUIRE(e.rows().size() == 1);
    CHECK(e.rows()[0] == 3);
  }
}

TEST_CASE("non-monotone timestamps are rejected") {
  std::string text = "driver_id,timestamp_s,v,a_x,a_y,yaw_rate\n";
  text += "a,0,1,0,0,0\na,0.01,1,0,0,0\na,0.01,1,0,0,0\n";
  const auto specs = default_channel_specs();
  CHECK_THROWS_AS(ingest_csv_text(text, specs, at(100.0)), DataError);
}

TEST_CASE("units are converted to canonical") {
  std::string text = "driver_id,timestamp_s,v,a_x,a_y,yaw_rate\n";
  text += "a,0,10,1,0,3.141592653589793\na,0.1,20,1,0,0\n";
  auto specs = default_channel_specs();
  specs[0].unit = "m/s";
  specs[1].unit = "g";
  specs[3].unit = "rad/s";
  const auto s = ingest_csv_text(text, specs, at(10.0)).at(0);
  CHECK(s.channel("v")[0] == doctest::Approx(36.0));
  CHECK(s.channel("v")[1] == doctest::Approx(72.0));
  CHECK(s.channel("a_x")[0] == doctest::Approx(9.80665));
  CHECK(s.channel("yaw_rate")[0] == doctest::Approx(180.0));
  CHECK_THROWS_AS(unit_factor("v", "furlong/fortnight"), SchemaError);
}

TEST_CASE("non-finite policy") {
  std::string text = "driver_id,timestamp_s,v,a_x,a_y,yaw_rate\n";
  text += "a,0,10,0,0,0\na,0.1,nan,0,0,0\na,0.2,30,0,0,0\n";
  const auto specs = default_channel_specs();

  SUBCASE("reject drops the row and counts it") {
    const auto s = ingest_csv_text(text, specs, at(10.0)).at(0);
    CHECK(s.size() == 2);
    const auto r = validate_series(s);
    CHECK(r.count_rejected == 1);
    CHECK(r.usable);
  }
  SUBCASE("interpolate fills a short gap") {
    auto o = at(10.0);
    o.policy = NonFinitePolicy::kInterpolate;
    const auto s = ingest_csv_text(text, specs, o).at(0);
    REQUIRE(s.size() == 3);
    CHECK(s.channel("v")[1] == doctest::Approx(20.0));
    CHECK(validate_series(s).count_interpolated == 1);
  }
}

TEST_CASE("clip limits clamp and count") {
  std::string text = "driver_id,timestamp_s,v,a_x,a_y,yaw_rate\n";
  text += "a,0,10,0,0,0\na,0.1,500,0,0,0\n";
  const auto specs = default_channel_specs();
  auto o = at(10.0);
  o.clip["v"] = {0.0, 250.0};
  const auto s = ingest_csv_text(text, specs, o).at(0);
  CHECK(s.channel("v")[1] == 250.0);
  CHECK(validate_series(s).count_clipped == 1);
}

TEST_CASE("constant speed report has mean equal to max and min") {
  const auto specs = default_channel_specs();
  const auto s = ingest_csv_text(make_csv(1, 100, 100.0), specs, at(100.0)).at(0);
  const auto r = validate_series(s);
  REQUIRE(r.channels.size() == 4);
  CHECK(r.channels[0].name == "v");
  CHECK(r.channels[0].mean == 50.0);
  CHECK(r.channels[0].max == 50.0);
  CHECK(r.channels[0].min == 50.0);
}

TEST_CASE("empty series is unusable") {
  const TelemetrySeries s("x", 100.0, Scenario::kOther, {"v"}, {{}});
  const auto r = validate_series(s);
  CHECK(r.sample_count == 0);
  CHECK_FALSE(r.usable);
}

TEST_CASE("export then ingest round-trips") {
  const auto specs = default_channel_specs();
  const auto a = ingest_csv_text(make_csv(2, 50, 10.0), specs, at(10.0));
  const auto b = ingest_csv_text(export_csv_text(a), specs, at(10.0));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].driver_id() == b[i].driver_id());
    for (std::size_t c = 0; c < a[i].channel_count(); ++c) {
      const auto x = a[i].channel(c);
      const auto y = b[i].channel(c);
      CHECK(std::equal(x.begin(), x.end(), y.begin(), y.end()));
    }
  }
}

TEST_CASE("scenario tags") {
  CHECK(scenario_from_string("Urban") == Scenario::kUrban);
  CHECK(std::string(to_string(Scenario::kHighway)) == "highway");
  CHECK_THROWS_AS(scenario_from_string("rural"), ValidationError);
}
