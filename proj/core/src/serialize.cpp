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

#include "drivestyle/serialize.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "drivestyle/csv.hpp"
#include "json_util.hpp"

namespace drivestyle {

using nlohmann::json;
using detail::get;
using detail::num;
using detail::parse_document;
using detail::real;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(num(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j, const std::string& what) {
  if (!j.is_array()) throw SchemaError(what + " must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw SchemaError(what + " rows have unequal lengths");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = real(row.at(static_cast<std::size_t>(c)));
  }
  return m;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

Eigen::VectorXd vector_from(const json& j, const std::string& what) {
  if (!j.is_array()) throw SchemaError(what + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = real(j[i]);
  return v;
}

std::vector<double> reals_from(const json& j, const std::string& what) {
  if (!j.is_array()) throw SchemaError(what + " must be an array");
  std::vector<double> v;
  for (const auto& x : j) v.push_back(real(x));
  return v;
}

json reals_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json header(const char* schema) { return json{{"schema", schema}, {"schema_version", kSchemaVersion}}; }

json fit_json(const FittedDistribution& f) {
  return json{{"family", to_string(f.family)},
              {"params", reals_json(f.params)},
              {"transform", {{"scale", num(f.transform.scale)}, {"offset", num(f.transform.offset)}}},
              {"log_likelihood", num(f.log_likelihood)},
              {"aic", num(f.aic)},
              {"support", {num(f.support_lo), num(f.support_hi)}},
              {"sample_count", f.sample_count}};
}

FittedDistribution fit_from(const json& j) {
  FittedDistribution f;
  f.family = family_from_string(get<std::string>(j, "family"));
  f.params = reals_from(j.at("params"), "params");
  f.transform.scale = real(j.at("transform").at("scale"));
  f.transform.offset = real(j.at("transform").at("offset"));
  f.log_likelihood = real(j.at("log_likelihood"));
  f.aic = real(j.at("aic"));
  f.support_lo = real(j.at("support").at(0));
  f.support_hi = real(j.at("support").at(1));
  f.sample_count = get<std::size_t>(j, "sample_count");
  return f;
}

}  // namespace

std::string codebook_to_json(const Codebook& cb) {
  json j = header("codebook");
  j["bins_per_factor"] = cb.bins_per_factor;
  j["vocab_size"] = cb.word_count();
  json factors = json::array();
  for (int l = 0; l < cb.factor_count(); ++l) {
    const auto i = static_cast<std::size_t>(l);
    factors.push_back({{"label", cb.factor_labels[i]},
                       {"fit", fit_json(cb.fits[i])},
                       {"cuts", reals_json(cb.cuts[i])}});
  }
  j["factors"] = std::move(factors);
  return j.dump(2) + "\n";
}

Codebook codebook_from_json(const std::string& text) {
  return detail::guarded([&] {
    const json j = parse_document(text, "codebook");
    Codebook cb;
    cb.bins_per_factor = get<int>(j, "bins_per_factor");
    for (const auto& f : j.at("factors")) {
      cb.factor_labels.push_back(get<std::string>(f, "label"));
      cb.fits.push_back(fit_from(f.at("fit")));
      cb.cuts.push_back(reals_from(f.at("cuts"), "cuts"));
      if (static_cast<int>(cb.cuts.back().size()) != cb.bins_per_factor - 1)
        throw SchemaError("codebook factor '" + cb.factor_labels.back() + "' has the wrong cut count");
    }
    if (get<int>(j, "vocab_size") != cb.word_count())
      throw SchemaError("codebook vocab_size disagrees with its factors");
    return cb;
  });
}

std::string model_to_json(const StyleModel& m) {
  json j = header("style_model");
  j["driver_ids"] = m.driver_ids;
  j["theta"] = matrix_json(m.theta);
  j["phi"] = matrix_json(m.phi);
  j["hyper"] = {{"alpha", reals_json(m.hyper.alpha)}, {"beta", reals_json(m.hyper.beta)}};
  const auto& p = m.provenance;
  j["provenance"] = {{"iterations", p.iterations}, {"burn_in", p.burn_in},
                     {"thin", p.thin},             {"seed", p.seed},
                     {"chains", p.chains},         {"selected_chain", p.selected_chain},
                     {"samples_averaged", p.samples_averaged}};
  return j.dump(2) + "\n";
}

StyleModel model_from_json(const std::string& text) {
  return detail::guarded([&] {
    const json j = parse_document(text, "style_model");
    StyleModel m;
    m.driver_ids = j.at("driver_ids").get<std::vector<std::string>>();
    m.theta = matrix_from(j.at("theta"), "theta");
    m.phi = matrix_from(j.at("phi"), "phi");
    m.hyper.alpha = reals_from(j.at("hyper").at("alpha"), "alpha");
    m.hyper.beta = reals_from(j.at("hyper").at("beta"), "beta");
    const auto& p = j.at("provenance");
    m.provenance = {get<int>(p, "iterations"), get<int>(p, "burn_in"),   get<int>(p, "thin"),
                    get<std::uint64_t>(p, "seed"), get<int>(p, "chains"),
                    get<int>(p, "selected_chain"), get<int>(p, "samples_averaged")};
    if (m.theta.rows() != static_cast<Eigen::Index>(m.driver_ids.size()) ||
        (m.theta.rows() > 0 && m.theta.cols() != m.phi.rows()) ||
        m.phi.rows() != m.hyper.topic_count() || m.phi.cols() != m.hyper.vocab_size())
      throw SchemaError("style model shapes are inconsistent");
    return m;
  });
}

std::string factor_model_to_json(const FactorModel& m) {
  json j = header("factor_model");
  j["feature_labels"] = m.feature_labels;
  j["factor_labels"] = m.factor_labels;
  j["feature_means"] = vector_json(m.feature_means);
  j["feature_stds"] = vector_json(m.feature_stds);
  j["eigenvalues"] = vector_json(m.eigenvalues);
  j["unrotated_loadings"] = matrix_json(m.unrotated_loadings);
  j["loadings"] = matrix_json(m.loadings);
  j["uniquenesses"] = vector_json(m.uniquenesses);
  j["rotation_iterations"] = m.rotation_iterations;
  j["warnings"] = m.warnings;
  return j.dump(2) + "\n";
}

FactorModel factor_model_from_json(const std::string& text) {
  return detail::guarded([&] {
    const json j = parse_document(text, "factor_model");
    FactorModel m;
    m.feature_labels = j.at("feature_labels").get<std::vector<std::string>>();
    m.factor_labels = j.at("factor_labels").get<std::vector<std::string>>();
    m.feature_means = vector_from(j.at("feature_means"), "feature_means");
    m.feature_stds = vector_from(j.at("feature_stds"), "feature_stds");
    m.eigenvalues = vector_from(j.at("eigenvalues"), "eigenvalues");
    m.unrotated_loadings = matrix_from(j.at("unrotated_loadings"), "unrotated_loadings");
    m.loadings = matrix_from(j.at("loadings"), "loadings");
    m.uniquenesses = vector_from(j.at("uniquenesses"), "uniquenesses");
    m.rotation_iterations = get<int>(j, "rotation_iterations");
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    const auto p = static_cast<Eigen::Index>(m.feature_labels.size());
    if (m.loadings.rows() != p || m.loadings.cols() != static_cast<Eigen::Index>(m.factor_labels.size()) ||
        m.feature_means.size() != p || m.feature_stds.size() != p)
      throw SchemaError("factor model shapes are inconsistent");
    return m;
  });
}

std::string profiles_to_json(const ProfileSet& p) {
  json j = {{"schema", "profile_set"}, {"schema_version", p.schema_version}};
  j["name"] = p.name;
  j["sample_rate_hz"] = p.sample_rate_hz;
  j["fragment_s"] = p.fragment_s;
  j["dwell_mean_fragments"] = p.dwell_mean_fragments;
  j["speed_reversion"] = p.speed_reversion;
  j["accel_reversion"] = p.accel_reversion;
  j["yaw_reversion"] = p.yaw_reversion;
  j["burst_duration_s"] = p.burst_duration_s;
  j["burst_positive_fraction"] = p.burst_positive_fraction;
  json styles = json::array();
  for (const auto& s : p.styles)
    styles.push_back({{"name", s.name},
                      {"speed_mean_kmh", s.speed_mean},
                      {"speed_sd_kmh", s.speed_sd},
                      {"accel_sd", s.accel_sd},
                      {"burst_rate_hz", s.burst_rate_hz},
                      {"burst_magnitude", s.burst_magnitude},
                      {"yaw_bias_deg_s", s.yaw_bias},
                      {"yaw_sd_deg_s", s.yaw_sd}});
  j["styles"] = std::move(styles);
  return j.dump(2) + "\n";
}

ProfileSet profiles_from_json(const std::string& text) {
  return detail::guarded([&] {
    const json j = parse_document(text, "profile_set");
    ProfileSet p;
    p.schema_version = get<int>(j, "schema_version");
    p.name = j.value("name", std::string());
    p.sample_rate_hz = j.value("sample_rate_hz", p.sample_rate_hz);
    p.fragment_s = j.value("fragment_s", p.fragment_s);
    p.dwell_mean_fragments = j.value("dwell_mean_fragments", p.dwell_mean_fragments);
    p.speed_reversion = j.value("speed_reversion", p.speed_reversion);
    p.accel_reversion = j.value("accel_reversion", p.accel_reversion);
    p.yaw_reversion = j.value("yaw_reversion", p.yaw_reversion);
    p.burst_duration_s = j.value("burst_duration_s", p.burst_duration_s);
    p.burst_positive_fraction = j.value("burst_positive_fraction", p.burst_positive_fraction);
    for (const auto& s : j.at("styles")) {
      RegimeProfile r;
      r.name = get<std::string>(s, "name");
      r.speed_mean = get<double>(s, "speed_mean_kmh");
      r.speed_sd = get<double>(s, "speed_sd_kmh");
      r.accel_sd = get<double>(s, "accel_sd");
      r.burst_rate_hz = get<double>(s, "burst_rate_hz");
      r.burst_magnitude = get<double>(s, "burst_magnitude");
      r.yaw_bias = get<double>(s, "yaw_bias_deg_s");
      r.yaw_sd = get<double>(s, "yaw_sd_deg_s");
      p.styles.push_back(std::move(r));
    }
    p.validate();
    return p;
  });
}

namespace detail {

json thresholds_json(const LevelThresholds& t) {
  return {{"scenario", to_string(t.scenario)},
          {"lo", num(t.lo)},
          {"hi", num(t.hi)},
          {"cuts", reals_json(t.cuts)}};
}

LevelThresholds thresholds_from(const json& j) {
  LevelThresholds t;
  t.scenario = scenario_from_string(get<std::string>(j, "scenario"));
  t.lo = real(j.at("lo"));
  t.hi = real(j.at("hi"));
  const auto cuts = reals_from(j.at("cuts"), "cuts");
  if (cuts.size() != 4) throw SchemaError("thresholds need exactly four cut points");
  std::copy(cuts.begin(), cuts.end(), t.cuts.begin());
  t.validate();
  return t;
}

}  // namespace detail

std::string thresholds_to_json(const LevelThresholds& t) {
  json j = header("level_thresholds");
  j.update(detail::thresholds_json(t));
  return j.dump(2) + "\n";
}

LevelThresholds thresholds_from_json(const std::string& text) {
  return detail::guarded([&] { return detail::thresholds_from(parse_document(text, "level_thresholds")); });
}

std::string confusion_to_json(const WeightedConfusion& c, const LevelThresholds& thresholds,
                              const ThresholdFit* fit) {
  json j = header("confusion");
  j["rows"] = "subjective level";
  j["columns"] = "objective level";
  j["weights"] = {{"exact", 1.0}, {"off_by_one", 0.8}, {"otherwise", 0.0}};
  json raw = json::array(), weighted = json::array();
  for (int r = 0; r < kLevelCount; ++r) {
    json rr = json::array(), wr = json::array();
    for (int k = 0; k < kLevelCount; ++k) {
      rr.push_back(c.raw[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)]);
      wr.push_back(num(c.weighted[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)]));
    }
    raw.push_back(std::move(rr));
    weighted.push_back(std::move(wr));
  }
  j["raw"] = std::move(raw);
  j["weighted"] = std::move(weighted);
  j["total"] = c.total;
  j["accuracy"] = num(c.accuracy);
  j["precision"] = reals_json(c.precision);
  j["recall"] = reals_json(c.recall);
  j["precision_definition"] = "weighted column mass / raw column count";
  j["recall_definition"] = "weighted row mass / raw row count";
  j["thresholds"] = detail::thresholds_json(thresholds);
  if (fit) {
    j["threshold_fit"] = {{"accuracy", num(fit->accuracy)},
                          {"permutation_mean", num(fit->permutation_mean)},
                          {"p_value", num(fit->p_value)},
                          {"significant", fit->significant},
                          {"warnings", fit->warnings}};
  }
  return j.dump(2) + "\n";
}

std::string corpus_to_csv(const WordCorpus& corpus) {
  std::string s = "# vocab_size=" + std::to_string(corpus.vocab_size) + "\n";
  s += std::string("# scenario=") + to_string(corpus.scenario) + "\n";
  s += "driver_id,fragment_index,word_id\n";
  for (std::size_t d = 0; d < corpus.documents.size(); ++d)
    for (std::size_t n = 0; n < corpus.documents[d].size(); ++n)
      s += corpus.driver_ids[d] + "," + std::to_string(n) + "," +
           std::to_string(corpus.documents[d][n]) + "\n";
  return s;
}

WordCorpus corpus_from_csv(const std::string& text, const std::string& source) {
  WordCorpus c;
  std::string body;
  bool have_vocab = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    const std::string line = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    pos = end == std::string::npos ? text.size() : end + 1;
    if (!line.empty() && line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      std::string value = line.substr(eq + 1);
      while (!value.empty() && (value.back() == '\r' || value.back() == ' ')) value.pop_back();
      if (key == "vocab_size") {
        c.vocab_size = static_cast<int>(parse_int(value));
        have_vocab = true;
      } else if (key == "scenario") {
        c.scenario = scenario_from_string(value);
      }
      continue;
    }
    body += line;
    body += '\n';
  }
  if (!have_vocab) throw SchemaError(source + ": missing '# vocab_size=' line");
  CsvReader r(body, source);
  const auto id = r.column("driver_id");
  const auto fi = r.column("fragment_index");
  const auto wi = r.column("word_id");
  std::map<std::string, std::size_t> index;
  std::vector<std::string> f;
  std::size_t row = 0;
  while (r.next(f)) {
    if (f.size() < r.header().size())
      throw DataError(source + ": row " + std::to_string(row) + " has too few fields", {row});
    auto [it, fresh] = index.emplace(f[id], c.documents.size());
    if (fresh) {
      c.driver_ids.push_back(f[id]);
      c.documents.emplace_back();
    }
    auto& doc = c.documents[it->second];
    if (parse_int(f[fi]) != static_cast<long long>(doc.size()))
      throw DataError(source + ": row " + std::to_string(row) + " fragment index out of sequence for driver '" +
                          f[id] + "'",
                      {row});
    doc.push_back(static_cast<int>(parse_int(f[wi])));
    ++row;
  }
  c.validate();
  return c;
}

std::string factor_scores_csv(std::span<const FactorScores> scores) {
  std::string s = "driver_id,fragment_index";
  if (!scores.empty())
    for (const auto& l : scores.front().factor_labels) s += "," + l;
  s += '\n';
  for (const auto& fs : scores)
    for (Eigen::Index i = 0; i < fs.scores.cols(); ++i) {
      s += fs.driver_id + "," + std::to_string(i);
      for (Eigen::Index l = 0; l < fs.scores.rows(); ++l) s += "," + format_double(fs.scores(l, i));
      s += '\n';
    }
  return s;
}

}  // namespace drivestyle
