#include <doctest.h>

#include <json.hpp>

#include "drivestyle/serialize.hpp"
#include "drivestyle/synthgen.hpp"

using namespace drivestyle;

TEST_CASE("codebook round trip") {
  const std::vector<FittedDistribution> fits{make_gev(0.1, 1.2, 0.15), make_normal(-0.5, 2.0)};
  const auto cb = build_codebook(fits, 4, {"speed", "acceleration"});
  const auto text = codebook_to_json(cb);
  const auto back = codebook_from_json(text);
  CHECK(back.bins_per_factor == 4);
  CHECK(back.factor_labels == cb.factor_labels);
  CHECK(back.cuts == cb.cuts);
  CHECK(codebook_to_json(back) == text);
  const auto j = nlohmann::json::parse(text);
  CHECK(j["schema"] == "codebook");
  CHECK(j["schema_version"] == kSchemaVersion);
}

TEST_CASE("wrong schema is rejected") {
  const auto cb = build_codebook(std::vector<FittedDistribution>{make_normal(0.0, 1.0)}, 2, {"f"});
  CHECK_THROWS_AS(model_from_json(codebook_to_json(cb)), SchemaError);
  auto j = nlohmann::json::parse(codebook_to_json(cb));
  j["schema_version"] = 99;
  CHECK_THROWS_AS(codebook_from_json(j.dump()), SchemaError);
  CHECK_THROWS(codebook_from_json("{not json"));
}

TEST_CASE("model round trip is exact") {
  StyleModel m;
  m.driver_ids = {"a", "b"};
  m.theta.resize(2, 2);
  m.theta << 0.1, 0.9, 1.0 / 3.0, 2.0 / 3.0;
  m.phi.resize(2, 3);
  m.phi << 0.2, 0.3, 0.5, 0.7, 0.1, 0.2;
  m.hyper = Hyperparams::make_symmetric(2, 3, 0.1, 0.01);
  m.provenance = {100, 20, 5, 9, 2, 1, 16};
  const auto text = model_to_json(m);
  const auto back = model_from_json(text);
  CHECK(back.theta == m.theta);
  CHECK(back.phi == m.phi);
  CHECK(back.driver_ids == m.driver_ids);
  CHECK(back.provenance.samples_averaged == 16);
  CHECK(model_to_json(back) == text);
}

TEST_CASE("profiles and thresholds round trip") {
  const auto p = default_profile_set();
  CHECK(profiles_to_json(profiles_from_json(profiles_to_json(p))) == profiles_to_json(p));
  const auto t = LevelThresholds::highway();
  const auto back = thresholds_from_json(thresholds_to_json(t));
  CHECK(back.cuts == t.cuts);
  CHECK(back.scenario == Scenario::kHighway);
}

TEST_CASE("corpus csv round trip") {
  WordCorpus c;
  c.driver_ids = {"x", "y"};
  c.documents = {{3, 1, 0}, {2}};
  c.vocab_size = 4;
  c.scenario = Scenario::kUrban;
  const auto text = corpus_to_csv(c);
  const auto back = corpus_from_csv(text, "mem");
  CHECK(back.documents == c.documents);
  CHECK(back.driver_ids == c.driver_ids);
  CHECK(back.vocab_size == 4);
  CHECK(back.scenario == Scenario::kUrban);
}

TEST_CASE("confusion json records accuracy") {
  WeightedConfusion c;
  c.total = 2;
  c.accuracy = 0.9;
  const auto j = nlohmann::json::parse(confusion_to_json(c, LevelThresholds::urban()));
  CHECK(j["accuracy"] == 0.9);
  CHECK(j["schema_version"] == kSchemaVersion);
}
