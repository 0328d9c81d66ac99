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

// drivestyle: command-line front end. Exit codes: 0 success, 2 invalid
// configuration or arguments, 3 bad input data, 4 numerical failure.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config_loader.hpp"
#include "drivestyle/csv.hpp"
#include "drivestyle/pipeline.hpp"
#include "drivestyle/serialize.hpp"
#include "drivestyle/synthgen.hpp"

namespace ds = drivestyle;
using nlohmann::json;

namespace {

ds::PipelineConfig load_config(const std::string& config_path, const std::string& manifest_path,
                               const std::vector<std::string>& overrides) {
  json j = json::object();
  if (!manifest_path.empty()) {
    j = json::parse(ds::config_to_json(ds::config_from_manifest(ds::read_text_file(manifest_path))));
  } else if (!config_path.empty()) {
    j = ds::cli::yaml_to_json(ds::read_text_file(config_path));
  }
  ds::cli::apply_overrides(j, overrides);
  return ds::config_from_json(j.dump());
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    ds::write_text_file(path, content);
  }
}

json report_json(const ds::ValidationReport& r) {
  json channels = json::array();
  for (const auto& c : r.channels)
    channels.push_back({{"name", c.name}, {"min", c.min}, {"max", c.max}, {"mean", c.mean}});
  return {{"driver_id", r.driver_id},         {"sample_count", r.sample_count},
          {"channels", channels},             {"count_rejected", r.count_rejected},
          {"count_interpolated", r.count_interpolated}, {"count_clipped", r.count_clipped},
          {"usable", r.usable}};
}

void print_warnings(const ds::Warnings& w) {
  for (const auto& s : w) std::cerr << "warning: " << s << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drivestyle: shared driving styles from vehicle telemetry"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ds::library_version()));

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate a telemetry CSV and print per-driver summaries");
  std::string ingest_in, ingest_out, ingest_scenario = "other", ingest_policy = "reject_row";
  double ingest_rate = 100.0;
  ingest->add_option("--input,-i", ingest_in, "Telemetry CSV")->required();
  ingest->add_option("--rate", ingest_rate, "Nominal sample rate in Hz");
  ingest->add_option("--scenario", ingest_scenario, "urban, highway or other");
  ingest->add_option("--policy", ingest_policy, "reject_row or interpolate");
  ingest->add_option("--export", ingest_out, "Write the cleaned telemetry in canonical units");

  // run
  auto* run = app.add_subcommand("run", "Run the full pipeline");
  std::string run_config, run_manifest;
  std::vector<std::string> run_set;
  run->add_option("--config,-c", run_config, "YAML (or JSON) configuration");
  run->add_option("--manifest,-m", run_manifest, "Re-run the configuration stored in a run manifest");
  run->add_option("--set", run_set, "Override a config key: section.key=value");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate a labelled synthetic cohort");
  std::size_t sim_drivers = 100;
  double sim_duration = 1800.0;
  std::uint64_t sim_seed = 1;
  std::string sim_profiles, sim_out = "cohort", sim_scenario = "urban";
  simulate->add_option("--drivers", sim_drivers, "Number of drivers");
  simulate->add_option("--duration", sim_duration, "Seconds of driving per driver");
  simulate->add_option("--seed", sim_seed, "Random seed");
  simulate->add_option("--profiles", sim_profiles, "Profile set JSON (default: built-in)");
  simulate->add_option("--scenario", sim_scenario, "urban or highway (selects the label thresholds)");
  simulate->add_option("--out,-o", sim_out, "Output directory");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Sweep bins per factor M and style count K");
  std::string sweep_config, sweep_out;
  std::vector<std::string> sweep_set;
  bool sweep_cells = false;
  sweep->add_option("--config,-c", sweep_config, "YAML (or JSON) configuration");
  sweep->add_option("--set", sweep_set, "Override a config key: section.key=value");
  sweep->add_option("--out,-o", sweep_out, "Sweep table CSV (default: <output_dir>/sweep.csv)");
  sweep->add_flag("--synthetic-cells", sweep_cells, "Use synthetic factor scores with a 4-cell structure");

  // score-only
  auto* score = app.add_subcommand("score-only", "Score drivers from a trained model");
  std::string score_model, score_codebook, score_config, score_out;
  std::vector<std::string> score_set;
  score->add_option("--model", score_model, "model.json")->required();
  score->add_option("--codebook", score_codebook, "codebook.json")->required();
  score->add_option("--config,-c", score_config, "Configuration for gamma and thresholds");
  score->add_option("--set", score_set, "Override a config key");
  score->add_option("--out,-o", score_out, "scores.csv (default: stdout)");

  // eval-only
  auto* eval = app.add_subcommand("eval-only", "Compare scores with subjective labels");
  std::string eval_scores, eval_labels, eval_config, eval_out;
  std::vector<std::string> eval_set;
  bool eval_fit = false;
  eval->add_option("--scores", eval_scores, "scores.csv")->required();
  eval->add_option("--labels", eval_labels, "labels.csv")->required();
  eval->add_option("--config,-c", eval_config, "Configuration for thresholds");
  eval->add_option("--set", eval_set, "Override a config key");
  eval->add_flag("--fit-thresholds", eval_fit, "Fit the four cut points to the labels first");
  eval->add_option("--out,-o", eval_out, "confusion.json (default: stdout)");

  // report
  auto* report = app.add_subcommand("report", "Style mixtures grouped by driver attributes");
  std::string rep_model, rep_codebook, rep_attributes, rep_out = "report";
  int rep_permutations = 10000;
  std::uint64_t rep_seed = 1;
  report->add_option("--model", rep_model, "model.json")->required();
  report->add_option("--codebook", rep_codebook, "codebook.json")->required();
  report->add_option("--attributes", rep_attributes, "attributes.csv")->required();
  report->add_option("--permutations", rep_permutations, "Permutation resamples per test");
  report->add_option("--seed", rep_seed, "Seed for the permutation tests");
  report->add_option("--out,-o", rep_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ingest->parsed()) {
      ds::IngestOptions io;
      io.sample_rate_hz = ingest_rate;
      io.scenario = ds::scenario_from_string(ingest_scenario);
      if (ingest_policy == "interpolate") io.policy = ds::NonFinitePolicy::kInterpolate;
      else if (ingest_policy != "reject_row") throw ds::ValidationError("--policy must be reject_row or interpolate");
      const auto specs = ds::default_channel_specs();
      const auto series = ds::ingest_csv(ingest_in, specs, io);
      json out = json::array();
      for (const auto& s : series) out.push_back(report_json(ds::validate_series(s)));
      std::cout << out.dump(2) << "\n";
      if (!ingest_out.empty()) ds::export_csv(ingest_out, series);
    } else if (run->parsed()) {
      if (!run_config.empty() && !run_manifest.empty())
        throw ds::ValidationError("give either --config or --manifest, not both");
      const auto cfg = load_config(run_config, run_manifest, run_set);
      const auto result = ds::run_pipeline(cfg);
      print_warnings(result.warnings);
      std::cout << "wrote " << result.artifacts.size() << " artifacts to " << cfg.output_dir << "\n";
      if (result.accuracy) std::cout << "weighted accuracy " << ds::format_double(*result.accuracy) << "\n";
    } else if (simulate->parsed()) {
      const auto profiles = sim_profiles.empty() ? ds::default_profile_set()
                                                 : ds::profiles_from_json(ds::read_text_file(sim_profiles));
      ds::CohortOptions co;
      co.drivers = sim_drivers;
      co.duration_s = sim_duration;
      co.seed = sim_seed;
      co.scenario = ds::scenario_from_string(sim_scenario);
      co.thresholds = ds::LevelThresholds::for_scenario(co.scenario);
      const auto cohort = ds::simulate_cohort(co, profiles);
      ds::write_cohort(cohort, sim_out);
      std::cout << "simulated " << cohort.drivers.size() << " drivers into " << sim_out << "\n";
    } else if (sweep->parsed()) {
      const auto cfg = load_config(sweep_config, "", sweep_set);
      ds::SweepConfig sc;
      sc.m_values = cfg.sweep_m;
      sc.k_values = cfg.sweep_k;
      sc.seeds = cfg.sweep_seeds;
      sc.k_for_m_sweep = cfg.K;
      sc.m_for_k_sweep = cfg.bins;
      sc.alpha = cfg.alpha;
      sc.beta = cfg.beta;
      sc.heldout_fraction = cfg.heldout_fraction;
      sc.train = cfg.train_options();
      sc.train.trace_every = 0;
      std::vector<ds::FactorScores> scores;
      if (sweep_cells) {
        scores = ds::simulate_cell_scores({});
      } else {
        if (cfg.telemetry.empty()) throw ds::ValidationError("paths.telemetry is required");
        ds::IngestOptions io;
        io.sample_rate_hz = cfg.sample_rate_hz;
        io.scenario = cfg.scenario;
        io.policy = cfg.nonfinite_policy;
        io.max_gap_s = cfg.max_gap_s;
        const auto specs = ds::default_channel_specs();
        const auto series = ds::ingest_csv(cfg.telemetry, specs, io);
        auto fs = ds::factor_stage(series, cfg);
        print_warnings(fs.warnings);
        scores = std::move(fs.scores);
      }
      ds::Warnings w;
      const auto rows =
          ds::sweep_hyperparams(ds::make_corpus_builder(std::move(scores), cfg.prefer_gev, cfg.scenario), sc, &w);
      print_warnings(w);
      const std::string path =
          sweep_out.empty() ? (std::filesystem::path(cfg.output_dir) / "sweep.csv").string() : sweep_out;
      emit(path, ds::sweep_csv(rows));
    } else if (score->parsed()) {
      const auto cfg = load_config(score_config, "", score_set);
      const auto model = ds::model_from_json(ds::read_text_file(score_model));
      const auto cb = ds::codebook_from_json(ds::read_text_file(score_codebook));
      if (model.topic_count() != cfg.K)
        throw ds::ValidationError("model has K = " + std::to_string(model.topic_count()) +
                                  "; set model.K to match");
      const auto ordering = ds::order_styles(model, cb);
      print_warnings(ordering.warnings);
      const auto scores = ds::score_drivers(model, ordering, cfg.level_thresholds(), cfg.gamma);
      emit(score_out, ds::scores_csv(scores));
    } else if (eval->parsed()) {
      const auto cfg = load_config(eval_config, "", eval_set);
      auto scores = ds::read_scores_csv(ds::read_text_file(eval_scores), eval_scores);
      const auto labels = ds::read_labels_csv(ds::read_text_file(eval_labels), eval_labels);
      std::optional<ds::ThresholdFit> fit;
      ds::LevelThresholds thresholds;
      if (eval_fit || cfg.fit_thresholds) {
        ds::ThresholdFitOptions fo;
        fo.grid_step = cfg.grid_step;
        fo.scenario = cfg.scenario;
        fo.seed = cfg.seed;
        fit = ds::fit_thresholds(scores, labels, fo);
        print_warnings(fit->warnings);
        thresholds = fit->thresholds;
        for (auto& s : scores) s.level = ds::score_to_level(s.score, thresholds);
      } else {
        thresholds = cfg.level_thresholds();
      }
      const auto conf = ds::weighted_confusion(scores, labels);
      emit(eval_out, ds::confusion_to_json(conf, thresholds, fit ? &*fit : nullptr));
    } else if (report->parsed()) {
      const auto model = ds::model_from_json(ds::read_text_file(rep_model));
      const auto cb = ds::codebook_from_json(ds::read_text_file(rep_codebook));
      const auto attrs = ds::read_attributes_csv(ds::read_text_file(rep_attributes), rep_attributes);
      ds::GroupReportOptions go;
      go.permutations = rep_permutations;
      go.seed = rep_seed;
      const auto rep = ds::group_report(model, ds::order_styles(model, cb), attrs, go);
      print_warnings(rep.warnings);
      const std::filesystem::path dir(rep_out);
      ds::write_text_file(dir / "groups.csv", ds::group_rows_csv(rep));
      ds::write_text_file(dir / "group_tests.csv", ds::group_tests_csv(rep));
    }
  } catch (const ds::Error& e) {
    std::cerr << "error (" << ds::to_string(e.kind()) << "): " << e.what() << "\n";
    return ds::exit_code(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "error (validation): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error (internal): " << e.what() << "\n";
    return 1;
  }
  return 0;
}
