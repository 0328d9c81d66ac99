#include <doctest.h>

#include <filesystem>

#include <json.hpp>

#include "drivestyle/csv.hpp"
#include "drivestyle/pipeline.hpp"
#include "drivestyle/synthgen.hpp"

using namespace drivestyle;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  fs::path root;
  PipelineConfig cfg;

  explicit Fixture(const std::string& name) : root(fs::temp_directory_path() / name) {
    fs::remove_all(root);
    CohortOptions o;
    o.drivers = 12;
    o.duration_s = 400.0;
    o.seed = 5;
    write_cohort(simulate_cohort(o, default_profile_set()), (root / "cohort").string());
    cfg.telemetry = (root / "cohort" / "telemetry.csv").string();
    cfg.labels = (root / "cohort" / "labels.csv").string();
    cfg.attributes = (root / "cohort" / "attributes.csv").string();
    cfg.output_dir = (root / "out").string();
    cfg.sample_rate_hz = 10.0;
    cfg.iterations = 60;
    cfg.burn_in = 20;
    cfg.thin = 5;
    cfg.alpha = 0.1;
    cfg.group_permutations = 50;
  }
  ~Fixture() { fs::remove_all(root); }
};

std::string slurp(const fs::path& p) { return read_text_file(p); }

}  // namespace

TEST_CASE("config json round trip and strict keys") {
  PipelineConfig c;
  c.K = 4;
  c.gamma = {1.0, 2.0, 3.0, 4.0};
  c.thresholds = std::array<double, 4>{1.5, 2.0, 2.5, 3.5};
  c.telemetry = "t.csv";
  const auto text = config_to_json(c);
  const auto back = config_from_json(text);
  CHECK(config_to_json(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  c.seed = 2;
  CHECK(config_hash(back) != config_hash(c));
  CHECK_THROWS_AS(config_from_json(R"({"model": {"KK": 3}})"), ValidationError);
  CHECK_THROWS_AS(config_from_json(R"({"colour": 1})"), ValidationError);
}

TEST_CASE("validation rejects bad settings") {
  PipelineConfig c;
  c.telemetry = "x.csv";
  CHECK_NOTHROW(c.validate());
  auto k0 = c;
  k0.K = 0;
  CHECK_THROWS_AS(k0.validate(), ValidationError);
  auto other = c;
  other.scenario = Scenario::kOther;
  CHECK_THROWS_AS(other.validate(), ValidationError);
  other.thresholds = std::array<double, 4>{1.2, 1.6, 2.0, 2.5};
  CHECK_NOTHROW(other.validate());
  auto k4 = c;
  k4.K = 4;
  CHECK_THROWS_AS(k4.validate(), ValidationError);
}

TEST_CASE("K = 0 fails before any work") {
  Fixture f("drivestyle_pipeline_k0");
  f.cfg.K = 0;
  CHECK_THROWS_AS(run_pipeline(f.cfg), ValidationError);
  CHECK_FALSE(fs::exists(f.cfg.output_dir));
}

TEST_CASE("missing input file is a validation error") {
  PipelineConfig c;
  c.telemetry = "/nonexistent/telemetry.csv";
  c.output_dir = (fs::temp_directory_path() / "drivestyle_missing").string();
  CHECK_THROWS_AS(run_pipeline(c), ValidationError);
}

TEST_CASE("pipeline writes artifacts deterministically") {
  Fixture f("drivestyle_pipeline_run");
  const auto r = run_pipeline(f.cfg);
  for (const char* name : {"codebook.json", "model.json", "metrics.csv", "scores.csv", "confusion.json",
                           "run-manifest.json", "corpus.csv", "trace.csv", "groups.csv"})
    CHECK(fs::exists(fs::path(f.cfg.output_dir) / name));
  REQUIRE(r.accuracy.has_value());

  const auto manifest = nlohmann::json::parse(slurp(fs::path(f.cfg.output_dir) / "run-manifest.json"));
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["config_hash"] == config_hash(f.cfg));

  const std::string first_model = slurp(fs::path(f.cfg.output_dir) / "model.json");
  const std::string first_codebook = slurp(fs::path(f.cfg.output_dir) / "codebook.json");
  const std::string first_manifest = slurp(fs::path(f.cfg.output_dir) / "run-manifest.json");

  auto again = config_from_manifest(first_manifest);
  run_pipeline(again);
  CHECK(slurp(fs::path(f.cfg.output_dir) / "model.json") == first_model);
  CHECK(slurp(fs::path(f.cfg.output_dir) / "run-manifest.json") == first_manifest);

  auto reseeded = f.cfg;
  reseeded.seed = 99;
  reseeded.output_dir = (f.root / "out2").string();
  run_pipeline(reseeded);
  CHECK(slurp(fs::path(reseeded.output_dir) / "model.json") != first_model);
  CHECK(slurp(fs::path(reseeded.output_dir) / "codebook.json") == first_codebook);
}

TEST_CASE("training resumes from a serialized corpus and codebook") {
  Fixture f("drivestyle_pipeline_resume");
  f.cfg.attributes.clear();
  run_pipeline(f.cfg);
  const fs::path out(f.cfg.output_dir);
  auto resumed = f.cfg;
  resumed.telemetry.clear();
  resumed.resume_corpus = (out / "corpus.csv").string();
  resumed.resume_codebook = (out / "codebook.json").string();
  resumed.output_dir = (f.root / "resumed").string();
  run_pipeline(resumed);
  CHECK(slurp(fs::path(resumed.output_dir) / "model.json") == slurp(out / "model.json"));
  CHECK(slurp(fs::path(resumed.output_dir) / "scores.csv") == slurp(out / "scores.csv"));
}

TEST_CASE("data errors name the failing stage") {
  Fixture f("drivestyle_pipeline_bad");
  write_text_file(f.cfg.telemetry, "driver_id,timestamp_s,v\na,0,1\n");
  try {
    run_pipeline(f.cfg);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("ingest") != std::string::npos);
    CHECK(e.kind() == ErrorKind::kSchema);
  }
  const auto manifest = nlohmann::json::parse(slurp(fs::path(f.cfg.output_dir) / "run-manifest.json"));
  CHECK(manifest["status"] == "failed");
}
