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

#include "drivestyle/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "drivestyle/csv.hpp"
#include "drivestyle/serialize.hpp"
#include "json_util.hpp"

#ifndef DRIVESTYLE_VERSION
#define DRIVESTYLE_VERSION "0.0.0"
#endif

namespace drivestyle {

using nlohmann::json;
namespace fs = std::filesystem;

const char* library_version() { return DRIVESTYLE_VERSION; }

namespace {

const char* policy_name(NonFinitePolicy p) {
  return p == NonFinitePolicy::kInterpolate ? "interpolate" : "reject_row";
}

NonFinitePolicy policy_from(const std::string& s) {
  if (s == "reject_row" || s == "reject") return NonFinitePolicy::kRejectRow;
  if (s == "interpolate") return NonFinitePolicy::kInterpolate;
  throw ValidationError("telemetry.nonfinite_policy must be 'reject_row' or 'interpolate', got '" + s + "'");
}

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError("config section '" + section + "' must be a mapping");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ValidationError("unknown config key '" + (section.empty() ? key : section + "." + key) + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, const std::string& section, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config key '" + section + "." + key + "' has the wrong type");
  }
}

std::pair<double, double> gamma_range(const PipelineConfig& c) {
  if (c.gamma.empty()) return {1.0, static_cast<double>(c.K)};
  return {*std::min_element(c.gamma.begin(), c.gamma.end()),
          *std::max_element(c.gamma.begin(), c.gamma.end())};
}

}  // namespace

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw ValidationError(m); };
  if (K < 1) fail("model.K must be at least 1, got " + std::to_string(K));
  if (bins < 2) fail("discretizer.bins must be at least 2, got " + std::to_string(bins));
  if (!(fragment.tau_s > 0.0)) fail("fragment.tau_s must be positive");
  if (fragment.stats.empty()) fail("fragment.stats must not be empty");
  if (!(sample_rate_hz > 0.0)) fail("telemetry.sample_rate_hz must be positive");
  if (!(max_gap_s >= 0.0)) fail("telemetry.max_gap_s must be non-negative");
  if (factor_count < 0) fail("factors.count must be non-negative (0 selects Kaiser's criterion)");
  if (alpha < 0.0) fail("model.alpha must be non-negative (0 selects 50/K)");
  if (!(beta > 0.0)) fail("model.beta must be positive");
  if (iterations < 1) fail("model.iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) fail("model.burn_in must satisfy 0 <= burn_in < iterations");
  if (thin < 1) fail("model.thin must be at least 1");
  if (chains < 1) fail("model.chains must be at least 1");
  if (!gamma.empty() && static_cast<int>(gamma.size()) != K)
    fail("scoring.gamma must have K = " + std::to_string(K) + " entries");
  if (!(grid_step > 0.0)) fail("scoring.grid_step must be positive");
  if (ordering != "bins" && ordering != "features") fail("scoring.ordering must be 'bins' or 'features'");
  if (group_permutations < 0) fail("report.group_permutations must be non-negative");
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0)) fail("sweep.heldout_fraction must lie in (0, 1)");
  for (int m : sweep_m)
    if (m < 2) fail("sweep.m_values entries must be at least 2");
  for (int k : sweep_k)
    if (k < 1) fail("sweep.k_values entries must be at least 1");
  if (!resume_corpus.empty() && resume_codebook.empty())
    fail("resume.corpus requires resume.codebook");
  if (!resume_factor_model.empty() && resume_codebook.empty())
    fail("resume.factor_model requires resume.codebook");
  if (resume_corpus.empty() && telemetry.empty()) fail("paths.telemetry is required");
  if (output_dir.empty()) fail("paths.output_dir must not be empty");
  if (!fit_thresholds) (void)level_thresholds();
}

Hyperparams PipelineConfig::hyperparams(int vocab_size) const {
  return Hyperparams::make_symmetric(K, vocab_size, alpha > 0.0 ? alpha : 50.0 / K, beta);
}

TrainOptions PipelineConfig::train_options() const {
  TrainOptions o;
  o.iterations = iterations;
  o.burn_in = burn_in;
  o.thin = thin;
  o.seed = seed;
  o.chains = chains;
  return o;
}

LevelThresholds PipelineConfig::level_thresholds() const {
  const auto [lo, hi] = gamma_range(*this);
  LevelThresholds t;
  if (thresholds) {
    t = {scenario, lo, hi, *thresholds};
  } else {
    if (scenario == Scenario::kOther)
      throw ValidationError("scenario 'other' has no preset thresholds; set scoring.thresholds");
    t = LevelThresholds::for_scenario(scenario);
    if (lo != t.lo || hi != t.hi)
      throw ValidationError("preset thresholds assume scores in [1, 3]; set scoring.thresholds for K = " +
                            std::to_string(K) + " or custom gamma");
  }
  t.validate();
  return t;
}

std::string config_to_json(const PipelineConfig& c) {
  json stats = json::array();
  for (auto s : c.fragment.stats) stats.push_back(to_string(s));
  json j;
  j["schema_version"] = kSchemaVersion;
  j["paths"] = {{"telemetry", c.telemetry}, {"labels", c.labels}, {"attributes", c.attributes},
                {"output_dir", c.output_dir}};
  j["resume"] = {{"corpus", c.resume_corpus}, {"codebook", c.resume_codebook},
                 {"factor_model", c.resume_factor_model}};
  j["scenario"] = to_string(c.scenario);
  j["telemetry"] = {{"sample_rate_hz", c.sample_rate_hz},
                    {"nonfinite_policy", policy_name(c.nonfinite_policy)},
                    {"max_gap_s", c.max_gap_s}};
  j["fragment"] = {{"tau_s", c.fragment.tau_s}, {"stats", stats}};
  j["factors"] = {{"count", c.factor_count}, {"rotate", c.rotate}};
  j["discretizer"] = {{"bins", c.bins}, {"prefer_gev", c.prefer_gev}};
  j["model"] = {{"K", c.K},           {"alpha", c.alpha}, {"beta", c.beta},
                {"iterations", c.iterations}, {"burn_in", c.burn_in}, {"thin", c.thin},
                {"seed", c.seed},     {"chains", c.chains}};
  j["scoring"] = {{"gamma", c.gamma},
                  {"thresholds", c.thresholds ? json(*c.thresholds) : json(nullptr)},
                  {"fit_thresholds", c.fit_thresholds},
                  {"grid_step", c.grid_step},
                  {"ordering", c.ordering}};
  j["report"] = {{"group_permutations", c.group_permutations}};
  j["sweep"] = {{"m_values", c.sweep_m}, {"k_values", c.sweep_k}, {"seeds", c.sweep_seeds},
                {"heldout_fraction", c.heldout_fraction}};
  return j.dump(2) + "\n";
}

PipelineConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("invalid config: ") + e.what());
  }
  check_keys(j, "", {"schema_version", "paths", "resume", "scenario", "telemetry", "fragment", "factors",
                     "discretizer", "model", "scoring", "report", "sweep"});
  PipelineConfig c;
  if (j.contains("schema_version") && j["schema_version"] != kSchemaVersion)
    throw ValidationError("unsupported config schema_version " + j["schema_version"].dump());
  if (j.contains("paths")) {
    const auto& s = j["paths"];
    check_keys(s, "paths", {"telemetry", "labels", "attributes", "output_dir"});
    read(s, "telemetry", "paths", c.telemetry);
    read(s, "labels", "paths", c.labels);
    read(s, "attributes", "paths", c.attributes);
    read(s, "output_dir", "paths", c.output_dir);
  }
  if (j.contains("resume")) {
    const auto& s = j["resume"];
    check_keys(s, "resume", {"corpus", "codebook", "factor_model"});
    read(s, "corpus", "resume", c.resume_corpus);
    read(s, "codebook", "resume", c.resume_codebook);
    read(s, "factor_model", "resume", c.resume_factor_model);
  }
  if (j.contains("scenario")) {
    std::string s;
    read(j, "scenario", "", s);
    try {
      c.scenario = scenario_from_string(s);
    } catch (const Error& e) {
      throw ValidationError(std::string("scenario: ") + e.what());
    }
  }
  if (j.contains("telemetry")) {
    const auto& s = j["telemetry"];
    check_keys(s, "telemetry", {"sample_rate_hz", "nonfinite_policy", "max_gap_s"});
    read(s, "sample_rate_hz", "telemetry", c.sample_rate_hz);
    std::string p = policy_name(c.nonfinite_policy);
    read(s, "nonfinite_policy", "telemetry", p);
    c.nonfinite_policy = policy_from(p);
    read(s, "max_gap_s", "telemetry", c.max_gap_s);
  }
  if (j.contains("fragment")) {
    const auto& s = j["fragment"];
    check_keys(s, "fragment", {"tau_s", "stats"});
    read(s, "tau_s", "fragment", c.fragment.tau_s);
    if (s.contains("stats")) {
      std::vector<std::string> names;
      read(s, "stats", "fragment", names);
      c.fragment.stats.clear();
      for (const auto& n : names) {
        try {
          c.fragment.stats.push_back(statistic_from_string(n));
        } catch (const Error& e) {
          throw ValidationError(std::string("fragment.stats: ") + e.what());
        }
      }
    }
  }
  if (j.contains("factors")) {
    const auto& s = j["factors"];
    check_keys(s, "factors", {"count", "rotate"});
    read(s, "count", "factors", c.factor_count);
    read(s, "rotate", "factors", c.rotate);
  }
  if (j.contains("discretizer")) {
    const auto& s = j["discretizer"];
    check_keys(s, "discretizer", {"bins", "prefer_gev"});
    read(s, "bins", "discretizer", c.bins);
    read(s, "prefer_gev", "discretizer", c.prefer_gev);
  }
  if (j.contains("model")) {
    const auto& s = j["model"];
    check_keys(s, "model", {"K", "alpha", "beta", "iterations", "burn_in", "thin", "seed", "chains"});
    read(s, "K", "model", c.K);
    read(s, "alpha", "model", c.alpha);
    read(s, "beta", "model", c.beta);
    read(s, "iterations", "model", c.iterations);
    read(s, "burn_in", "model", c.burn_in);
    read(s, "thin", "model", c.thin);
    read(s, "seed", "model", c.seed);
    read(s, "chains", "model", c.chains);
  }
  if (j.contains("scoring")) {
    const auto& s = j["scoring"];
    check_keys(s, "scoring", {"gamma", "thresholds", "fit_thresholds", "grid_step", "ordering"});
    read(s, "gamma", "scoring", c.gamma);
    if (s.contains("thresholds") && !s["thresholds"].is_null()) {
      std::vector<double> cuts;
      read(s, "thresholds", "scoring", cuts);
      if (cuts.size() != 4) throw ValidationError("scoring.thresholds needs exactly four cut points");
      c.thresholds = std::array<double, 4>{cuts[0], cuts[1], cuts[2], cuts[3]};
    }
    read(s, "fit_thresholds", "scoring", c.fit_thresholds);
    read(s, "grid_step", "scoring", c.grid_step);
    read(s, "ordering", "scoring", c.ordering);
  }
  if (j.contains("report")) {
    const auto& s = j["report"];
    check_keys(s, "report", {"group_permutations"});
    read(s, "group_permutations", "report", c.group_permutations);
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    check_keys(s, "sweep", {"m_values", "k_values", "seeds", "heldout_fraction"});
    read(s, "m_values", "sweep", c.sweep_m);
    read(s, "k_values", "sweep", c.sweep_k);
    read(s, "seeds", "sweep", c.sweep_seeds);
    read(s, "heldout_fraction", "sweep", c.heldout_fraction);
  }
  return c;
}

std::string config_hash(const PipelineConfig& config) {
  return hex64(fnv1a64(json::parse(config_to_json(config)).dump()));
}

FactorStage factor_stage(std::span<const TelemetrySeries> series, const PipelineConfig& config) {
  FactorStage st;
  for (const auto& s : series) {
    FragmentList fl = segment(s, config.fragment);
    for (const auto& w : fl.warnings) st.warnings.push_back(w);
    if (fl.fragments.empty()) {
      st.warnings.push_back("driver '" + s.driver_id() + "' dropped: no complete fragment");
      continue;
    }
    st.stats.push_back(fragment_stats(fl, config.fragment));
  }
  if (st.stats.empty()) throw DataError("no driver has a complete fragment");
  const FragmentStatsMatrix pooled = pool(st.stats);
  FactorOptions fo;
  if (config.factor_count > 0) fo.factor_count = config.factor_count;
  fo.rotate = config.rotate;
  st.model = fit_factor_model(pooled, fo);
  for (const auto& w : st.model.warnings) st.warnings.push_back(w);
  for (const auto& y : st.stats) st.scores.push_back(score_fragments(st.model, y));
  return st;
}

CorpusBuilder make_corpus_builder(std::vector<FactorScores> scores, bool prefer_gev, Scenario scenario) {
  return [scores = std::move(scores), prefer_gev, scenario](int M) {
    const auto cf = fit_codebook(scores, M, prefer_gev);
    return build_corpus(scores, cf.codebook, scenario);
  };
}

namespace {

void set_stage(std::string* stage, const char* name) {
  if (stage) *stage = name;
}

// Stages from training onwards; needs r.corpus and r.codebook.
void analyze_corpus(AnalysisResult& r, const PipelineConfig& c, const std::vector<SubjectiveLabel>* labels,
                    const std::map<std::string, DriverAttributes>* attributes, std::string* stage) {
  set_stage(stage, "train");
  if (r.corpus.vocab_size != r.codebook.word_count())
    throw SchemaError("corpus vocabulary does not match the codebook");
  const Hyperparams hyper = c.hyperparams(r.corpus.vocab_size);
  r.training = train(r.corpus, hyper, c.train_options());
  for (const auto& w : r.training.diagnostics.warnings) r.warnings.push_back(w);

  set_stage(stage, "metrics");
  r.metrics = evaluate(r.training.model, r.corpus);

  set_stage(stage, "score");
  if (c.ordering == "features") {
    if (r.stats.empty()) throw ValidationError("scoring.ordering 'features' needs telemetry, not a resumed corpus");
    r.ordering = order_by_word_severity(r.training.model.phi, raw_word_severity(r.corpus, r.stats));
  } else {
    r.ordering = order_styles(r.training.model, r.codebook);
  }
  for (const auto& w : r.ordering.warnings) r.warnings.push_back(w);

  if (c.fit_thresholds) {
    if (!labels) throw ValidationError("scoring.fit_thresholds requires paths.labels");
    const auto [lo, hi] = gamma_range(c);
    std::vector<DriverScore> raw;
    std::vector<double> theta(static_cast<std::size_t>(c.K));
    const auto& m = r.training.model;
    for (std::size_t d = 0; d < m.driver_count(); ++d) {
      for (int k = 0; k < c.K; ++k) theta[static_cast<std::size_t>(k)] = m.theta(static_cast<Eigen::Index>(d), k);
      raw.push_back({m.driver_ids[d], aggressive_score(theta, r.ordering, c.gamma), 0});
    }
    ThresholdFitOptions fo;
    fo.grid_step = c.grid_step;
    fo.lo = lo;
    fo.hi = hi;
    fo.scenario = c.scenario;
    fo.seed = c.seed;
    r.threshold_fit = fit_thresholds(raw, *labels, fo);
    for (const auto& w : r.threshold_fit->warnings) r.warnings.push_back(w);
    r.thresholds = r.threshold_fit->thresholds;
  } else {
    r.thresholds = c.level_thresholds();
  }
  r.driver_scores = score_drivers(r.training.model, r.ordering, r.thresholds, c.gamma);

  if (labels) {
    set_stage(stage, "evaluate");
    r.confusion = weighted_confusion(r.driver_scores, *labels);
  }
  if (attributes) {
    set_stage(stage, "report");
    GroupReportOptions go;
    go.permutations = c.group_permutations;
    go.seed = c.seed;
    r.groups = group_report(r.training.model, r.ordering, *attributes, go);
    for (const auto& w : r.groups->warnings) r.warnings.push_back(w);
  }
}

}  // namespace

AnalysisResult analyze(std::span<const TelemetrySeries> series, const PipelineConfig& c,
                       const std::vector<SubjectiveLabel>* labels,
                       const std::map<std::string, DriverAttributes>* attributes, std::string* stage) {
  set_stage(stage, "config");
  c.validate();
  AnalysisResult r;
  set_stage(stage, "factors");
  FactorStage fs = factor_stage(series, c);
  r.stats = std::move(fs.stats);
  r.factor_model = std::move(fs.model);
  r.scores = std::move(fs.scores);
  r.warnings = std::move(fs.warnings);

  set_stage(stage, "discretize");
  auto cf = fit_codebook(r.scores, c.bins, c.prefer_gev);
  r.codebook = std::move(cf.codebook);
  for (const auto& w : cf.warnings) r.warnings.push_back(w);
  r.corpus = build_corpus(r.scores, r.codebook, c.scenario);

  analyze_corpus(r, c, labels, attributes, stage);
  return r;
}

namespace {

struct ArtifactWriter {
  fs::path dir;
  json entries = json::array();
  std::vector<std::string> names;

  void write(const std::string& name, const std::string& content) {
    write_text_file(dir / name, content);
    entries.push_back({{"name", name}, {"bytes", content.size()}, {"fnv1a64", hex64(fnv1a64(content))}});
    names.push_back(name);
  }
};

void require_file(const std::string& path, const char* key) {
  if (!path.empty() && !fs::is_regular_file(path))
    throw ValidationError(std::string(key) + ": file '" + path + "' does not exist");
}

json schema_versions() {
  json s;
  for (const char* a : {"codebook", "factor_model", "style_model", "confusion", "run_manifest", "config"})
    s[a] = kSchemaVersion;
  return s;
}

}  // namespace

RunResult run_pipeline(const PipelineConfig& c) {
  c.validate();
  require_file(c.telemetry, "paths.telemetry");
  require_file(c.labels, "paths.labels");
  require_file(c.attributes, "paths.attributes");
  require_file(c.resume_corpus, "resume.corpus");
  require_file(c.resume_codebook, "resume.codebook");
  require_file(c.resume_factor_model, "resume.factor_model");

  ArtifactWriter out;
  out.dir = fs::path(c.output_dir);
  std::string stage = "ingest";
  RunResult result;
  const std::string manifest_name = "run-manifest.json";
  auto manifest = [&](const std::string& status, const std::string& error) {
    json m = {{"schema", "run_manifest"}, {"schema_version", kSchemaVersion}};
    m["status"] = status;
    m["stage"] = stage;
    if (!error.empty()) m["error"] = error;
    m["config"] = json::parse(config_to_json(c));
    m["config_hash"] = config_hash(c);
    m["seed"] = c.seed;
    m["versions"] = {{"drivestyle", library_version()}, {"schemas", schema_versions()}};
    m["artifacts"] = out.entries;
    m["warnings"] = result.warnings;
    const std::string text = m.dump(2) + "\n";
    write_text_file(out.dir / manifest_name, text);
    result.manifest_path = (out.dir / manifest_name).string();
  };

  try {
    std::vector<SubjectiveLabel> labels;
    std::map<std::string, DriverAttributes> attributes;
    if (!c.labels.empty()) labels = read_labels_csv(read_text_file(c.labels), c.labels);
    if (!c.attributes.empty()) attributes = read_attributes_csv(read_text_file(c.attributes), c.attributes);
    const auto* lp = c.labels.empty() ? nullptr : &labels;
    const auto* ap = c.attributes.empty() ? nullptr : &attributes;

    AnalysisResult r;
    if (!c.resume_corpus.empty()) {
      stage = "resume";
      r.codebook = codebook_from_json(read_text_file(c.resume_codebook));
      r.corpus = corpus_from_csv(read_text_file(c.resume_corpus), c.resume_corpus);
      out.write("codebook.json", codebook_to_json(r.codebook));
      out.write("corpus.csv", corpus_to_csv(r.corpus));
      analyze_corpus(r, c, lp, ap, &stage);
    } else {
      IngestOptions io;
      io.sample_rate_hz = c.sample_rate_hz;
      io.scenario = c.scenario;
      io.policy = c.nonfinite_policy;
      io.max_gap_s = c.max_gap_s;
      const auto specs = default_channel_specs();
      const auto series = ingest_csv(c.telemetry, specs, io);
      if (!c.resume_factor_model.empty()) {
        stage = "resume";
        r.factor_model = factor_model_from_json(read_text_file(c.resume_factor_model));
        r.codebook = codebook_from_json(read_text_file(c.resume_codebook));
        stage = "factors";
        for (const auto& s : series) {
          FragmentList fl = segment(s, c.fragment);
          for (const auto& w : fl.warnings) r.warnings.push_back(w);
          if (fl.fragments.empty()) continue;
          r.stats.push_back(fragment_stats(fl, c.fragment));
          r.scores.push_back(score_fragments(r.factor_model, r.stats.back()));
        }
        stage = "discretize";
        r.corpus = build_corpus(r.scores, r.codebook, c.scenario);
        analyze_corpus(r, c, lp, ap, &stage);
      } else {
        r = analyze(series, c, lp, ap, &stage);
      }
      stage = "write";
      out.write("factor_model.json", factor_model_to_json(r.factor_model));
      out.write("loadings.csv", loadings_csv(r.factor_model));
      out.write("factor_scores.csv", factor_scores_csv(r.scores));
      out.write("codebook.json", codebook_to_json(r.codebook));
      out.write("corpus.csv", corpus_to_csv(r.corpus));
    }
    stage = "write";
    out.write("model.json", model_to_json(r.training.model));
    out.write("trace.csv", trace_csv(r.training.diagnostics.trace));
    out.write("metrics.csv", metrics_csv(r.metrics));
    out.write("scores.csv", scores_csv(r.driver_scores));
    if (r.confusion) {
      out.write("confusion.json",
                confusion_to_json(*r.confusion, r.thresholds, r.threshold_fit ? &*r.threshold_fit : nullptr));
      result.accuracy = r.confusion->accuracy;
    }
    if (r.groups) {
      out.write("groups.csv", group_rows_csv(*r.groups));
      out.write("group_tests.csv", group_tests_csv(*r.groups));
    }
    result.warnings = r.warnings;
    stage = "complete";
    manifest("ok", "");
  } catch (const Error& e) {
    const std::string failed = stage;
    try {
      manifest("failed", e.what());
    } catch (...) {
    }
    throw Error(e.kind(), "stage '" + failed + "': " + e.what());
  } catch (const std::exception& e) {
    const std::string failed = stage;
    try {
      manifest("failed", e.what());
    } catch (...) {
    }
    throw InternalError("stage '" + failed + "': " + e.what());
  }
  result.artifacts = out.names;
  result.artifacts.push_back(manifest_name);
  return result;
}

PipelineConfig config_from_manifest(const std::string& manifest_text) {
  json m;
  try {
    m = json::parse(manifest_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid run manifest: ") + e.what());
  }
  if (!m.is_object() || m.value("schema", std::string()) != "run_manifest" || !m.contains("config"))
    throw SchemaError("not a run manifest");
  if (m.value("schema_version", 0) != kSchemaVersion) throw SchemaError("unsupported run manifest version");
  return config_from_json(m["config"].dump());
}

}  // namespace drivestyle
