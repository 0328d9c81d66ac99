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

#include "drivestyle/styleanalysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "drivestyle/csv.hpp"

namespace drivestyle {

namespace {

constexpr double kEdgeSlack = 1e-9;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

// Integer credits (1.0 -> 5, 0.8 -> 4) keep the grid search exact.
int credit(int truth, int predicted) {
  const int diff = std::abs(truth - predicted);
  return diff == 0 ? 5 : diff == 1 ? 4 : 0;
}

void check_level(int level, const std::string& what) {
  if (level < 1 || level > kLevelCount)
    throw DataError(what + " level " + std::to_string(level) + " outside [1, 5]");
}

struct GridFit {
  std::array<int, 4> cut_index{};
  long long credits = -1;
};

GridFit grid_search(const std::vector<double>& s, const std::vector<int>& truth,
                    const std::vector<double>& grid) {
  const std::size_t G = grid.size();
  // below[l][j]: credit of drivers with s < grid[j] if they were given level l.
  std::array<std::vector<long long>, kLevelCount> below;
  for (auto& b : below) b.assign(G, 0);
  std::array<long long, kLevelCount> all{};
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int l = 0; l < kLevelCount; ++l) {
      const int c = credit(truth[i], l + 1);
      all[static_cast<std::size_t>(l)] += c;
      for (std::size_t j = 0; j < G; ++j)
        if (s[i] < grid[j]) below[static_cast<std::size_t>(l)][j] += c;
    }
  }
  // Total = sum_l f_l(j_l) + all[4], f_l(j) = below[l][j] - below[l+1][j].
  auto f = [&](int l, std::size_t j) {
    return below[static_cast<std::size_t>(l)][j] - below[static_cast<std::size_t>(l + 1)][j];
  };
  std::vector<long long> best1(G, std::numeric_limits<long long>::min());
  std::vector<std::size_t> arg1(G, 0);
  for (std::size_t j = 1; j < G; ++j) {
    best1[j] = best1[j - 1];
    arg1[j] = arg1[j - 1];
    if (f(0, j - 1) > best1[j]) {
      best1[j] = f(0, j - 1);
      arg1[j] = j - 1;
    }
  }
  std::vector<long long> best4(G, std::numeric_limits<long long>::min());
  std::vector<std::size_t> arg4(G, 0);
  for (std::size_t j = G - 1; j-- > 0;) {
    best4[j] = best4[j + 1];
    arg4[j] = arg4[j + 1];
    if (f(3, j + 1) >= best4[j]) {  // >= keeps the smallest index
      best4[j] = f(3, j + 1);
      arg4[j] = j + 1;
    }
  }
  GridFit best;
  std::size_t best_width = 0;
  for (std::size_t j2 = 1; j2 + 2 < G; ++j2) {
    for (std::size_t j3 = j2 + 1; j3 + 1 < G; ++j3) {
      const long long total = best1[j2] + f(1, j2) + f(2, j3) + best4[j3] + all[4];
      const std::size_t width = j3 - j2;
      if (total > best.credits || (total == best.credits && width > best_width)) {
        best.credits = total;
        best.cut_index = {static_cast<int>(arg1[j2]), static_cast<int>(j2), static_cast<int>(j3),
                          static_cast<int>(arg4[j3])};
        best_width = width;
      }
    }
  }
  return best;
}

}  // namespace

std::vector<int> StyleOrdering::calmest_first() const {
  std::vector<int> order(rank.size());
  for (std::size_t k = 0; k < rank.size(); ++k)
    order[static_cast<std::size_t>(rank[k] - 1)] = static_cast<int>(k);
  return order;
}

StyleOrdering StyleOrdering::identity(int K) {
  StyleOrdering o;
  for (int k = 0; k < K; ++k) o.rank.push_back(k + 1);
  o.severity.assign(static_cast<std::size_t>(K), 0.0);
  return o;
}

StyleOrdering order_by_word_severity(const Eigen::MatrixXd& phi, std::span<const double> severity) {
  if (static_cast<Eigen::Index>(severity.size()) != phi.cols())
    throw ValidationError("word severity length does not match the vocabulary");
  const int K = static_cast<int>(phi.rows());
  StyleOrdering o;
  for (int k = 0; k < K; ++k) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < phi.cols(); ++i) s += phi(k, i) * severity[static_cast<std::size_t>(i)];
    o.severity.push_back(s);
  }
  std::vector<int> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return o.severity[static_cast<std::size_t>(a)] < o.severity[static_cast<std::size_t>(b)];
  });
  o.rank.assign(static_cast<std::size_t>(K), 0);
  for (int r = 0; r < K; ++r) o.rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r + 1;
  for (int r = 1; r < K; ++r) {
    const double a = o.severity[static_cast<std::size_t>(order[static_cast<std::size_t>(r - 1)])];
    const double b = o.severity[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
    if (std::abs(b - a) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))
      o.warnings.push_back("styles " + std::to_string(order[static_cast<std::size_t>(r - 1)]) +
                           " and " + std::to_string(order[static_cast<std::size_t>(r)]) +
                           " have equal severity; ordered by index");
  }
  return o;
}

std::vector<double> bin_severity(const Codebook& cb) {
  std::vector<double> s(static_cast<std::size_t>(cb.word_count()));
  for (int w = 0; w < cb.word_count(); ++w) {
    const auto bins = cb.decode(w);
    s[static_cast<std::size_t>(w)] = std::accumulate(bins.begin(), bins.end(), 0);
  }
  return s;
}

StyleOrdering order_styles(const StyleModel& model, const Codebook& cb) {
  if (model.vocab_size() != cb.word_count())
    throw ValidationError("model vocabulary does not match the codebook");
  const auto sev = bin_severity(cb);
  return order_by_word_severity(model.phi, sev);
}

std::vector<double> raw_word_severity(const WordCorpus& corpus,
                                      std::span<const FragmentStatsMatrix> stats) {
  if (stats.size() != corpus.document_count())
    throw SchemaError("one statistics matrix per corpus document is required");
  if (stats.empty()) return std::vector<double>(static_cast<std::size_t>(corpus.vocab_size), 0.0);
  const Eigen::Index p = static_cast<Eigen::Index>(stats.front().feature_count());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(p), sq = Eigen::VectorXd::Zero(p);
  double n = 0.0;
  for (std::size_t d = 0; d < stats.size(); ++d) {
    const auto& m = stats[d];
    if (m.driver_id != corpus.driver_ids[d] ||
        m.fragment_count() != corpus.documents[d].size() ||
        static_cast<Eigen::Index>(m.feature_count()) != p)
      throw SchemaError("statistics of driver '" + m.driver_id + "' do not align with the corpus");
    sum += m.values.rowwise().sum();
    sq += m.values.array().square().matrix().rowwise().sum();
    n += static_cast<double>(m.values.cols());
  }
  const Eigen::VectorXd mean = sum / n;
  Eigen::VectorXd sd = (sq / n - mean.cwiseProduct(mean)).cwiseMax(0.0).cwiseSqrt();
  for (Eigen::Index j = 0; j < p; ++j)
    if (!(sd(j) > 0.0)) sd(j) = 1.0;
  std::vector<double> total(static_cast<std::size_t>(corpus.vocab_size), 0.0);
  std::vector<double> count(total.size(), 0.0);
  for (std::size_t d = 0; d < stats.size(); ++d) {
    const auto& m = stats[d];
    for (Eigen::Index i = 0; i < m.values.cols(); ++i) {
      const double z = ((m.values.col(i) - mean).cwiseQuotient(sd)).mean();
      const auto w = static_cast<std::size_t>(corpus.documents[d][static_cast<std::size_t>(i)]);
      total[w] += z;
      count[w] += 1.0;
    }
  }
  for (std::size_t w = 0; w < total.size(); ++w) total[w] = count[w] > 0 ? total[w] / count[w] : 0.0;
  return total;
}

double aggressive_score(std::span<const double> theta, const StyleOrdering& ordering,
                        std::span<const double> gamma) {
  const int K = ordering.style_count();
  if (static_cast<int>(theta.size()) != K)
    throw ValidationError("mixture length does not match the style ordering");
  if (!gamma.empty() && static_cast<int>(gamma.size()) != K)
    throw ValidationError("gamma length does not match the style count");
  double s = 0.0;
  for (int k = 0; k < K; ++k) {
    const int r = ordering.rank[static_cast<std::size_t>(k)];
    const double g = gamma.empty() ? static_cast<double>(r) : gamma[static_cast<std::size_t>(r - 1)];
    s += g * theta[static_cast<std::size_t>(k)];
  }
  return s;
}

void LevelThresholds::validate() const {
  if (!(lo < hi)) throw ValidationError("threshold range must satisfy lo < hi");
  double prev = lo;
  for (double c : cuts) {
    if (!std::isfinite(c) || c < prev) throw ValidationError("threshold cuts must ascend within [lo, hi]");
    prev = c;
  }
  if (prev > hi) throw ValidationError("threshold cuts must ascend within [lo, hi]");
}

LevelThresholds LevelThresholds::urban() {
  return {Scenario::kUrban, 1.0, 3.0, {1.01, 1.37, 1.99, 2.97}};
}

LevelThresholds LevelThresholds::highway() {
  return {Scenario::kHighway, 1.0, 3.0, {1.03, 1.57, 2.19, 2.96}};
}

LevelThresholds LevelThresholds::for_scenario(Scenario s) {
  switch (s) {
    case Scenario::kUrban: return urban();
    case Scenario::kHighway: return highway();
    case Scenario::kOther: break;
  }
  throw ValidationError("no preset thresholds for scenario 'other'; supply cut points");
}

int score_to_level(double s, const LevelThresholds& t) {
  if (!(s >= t.lo - kEdgeSlack && s <= t.hi + kEdgeSlack))
    throw RangeError("score " + format_double(s) + " outside [" + format_double(t.lo) + ", " +
                     format_double(t.hi) + "]");
  int level = 1;
  for (double c : t.cuts)
    if (c <= s) ++level;
  return level;
}

const char* to_string(LabelSource s) {
  return s == LabelSource::kSelfReport ? "self_report" : "expert";
}

LabelSource label_source_from_string(const std::string& s) {
  if (s == "self_report") return LabelSource::kSelfReport;
  if (s == "expert") return LabelSource::kExpert;
  throw DataError("unknown label source '" + s + "'");
}

std::vector<SubjectiveLabel> read_labels_csv(const std::string& text, const std::string& source) {
  CsvReader r(text, source);
  const auto id = r.column("driver_id");
  const auto lv = r.column("level");
  const bool has_src = r.has_column("source");
  const auto src = has_src ? r.column("source") : 0;
  std::vector<SubjectiveLabel> out;
  std::vector<std::string> f;
  std::size_t row = 0;
  while (r.next(f)) {
    if (f.size() < r.header().size())
      throw DataError(source + ": row " + std::to_string(row) + " has too few fields", {row});
    SubjectiveLabel l;
    l.driver_id = f[id];
    const long long level = parse_int(f[lv]);
    if (level < 1 || level > kLevelCount)
      throw DataError(source + ": row " + std::to_string(row) + " level outside [1, 5]", {row});
    l.level = static_cast<int>(level);
    if (has_src) l.source = label_source_from_string(f[src]);
    out.push_back(std::move(l));
    ++row;
  }
  return out;
}

std::string labels_csv(std::span<const SubjectiveLabel> labels) {
  std::string s = "driver_id,level,source\n";
  for (const auto& l : labels)
    s += l.driver_id + "," + std::to_string(l.level) + "," + to_string(l.source) + "\n";
  return s;
}

std::vector<DriverScore> score_drivers(const StyleModel& model, const StyleOrdering& ordering,
                                       const LevelThresholds& thresholds,
                                       std::span<const double> gamma) {
  thresholds.validate();
  std::vector<DriverScore> out;
  std::vector<double> theta(static_cast<std::size_t>(model.topic_count()));
  for (std::size_t d = 0; d < model.driver_count(); ++d) {
    for (int k = 0; k < model.topic_count(); ++k)
      theta[static_cast<std::size_t>(k)] = model.theta(static_cast<Eigen::Index>(d), k);
    DriverScore s;
    s.driver_id = model.driver_ids[d];
    s.score = aggressive_score(theta, ordering, gamma);
    s.level = score_to_level(s.score, thresholds);
    out.push_back(std::move(s));
  }
  return out;
}

std::string scores_csv(std::span<const DriverScore> scores) {
  std::string s = "driver_id,score,level\n";
  for (const auto& d : scores)
    s += d.driver_id + "," + format_double(d.score) + "," + std::to_string(d.level) + "\n";
  return s;
}

std::vector<DriverScore> read_scores_csv(const std::string& text, const std::string& source) {
  CsvReader r(text, source);
  const auto id = r.column("driver_id");
  const auto sc = r.column("score");
  const auto lv = r.column("level");
  std::vector<DriverScore> out;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() < r.header().size()) throw DataError(source + ": short row");
    out.push_back({f[id], parse_double(f[sc]), static_cast<int>(parse_int(f[lv]))});
  }
  return out;
}

double consistency_weight(int truth, int predicted) { return credit(truth, predicted) / 5.0; }

WeightedConfusion weighted_confusion(std::span<const DriverScore> predicted,
                                     std::span<const SubjectiveLabel> truth) {
  std::map<std::string, int> pred;
  for (const auto& p : predicted) {
    check_level(p.level, "predicted");
    if (!pred.emplace(p.driver_id, p.level).second)
      throw DataError("duplicate prediction for driver '" + p.driver_id + "'");
  }
  std::set<std::string> seen;
  std::vector<std::string> missing;
  WeightedConfusion c;
  for (const auto& t : truth) {
    check_level(t.level, "subjective");
    if (!seen.insert(t.driver_id).second)
      throw DataError("duplicate label for driver '" + t.driver_id + "'");
    auto it = pred.find(t.driver_id);
    if (it == pred.end()) {
      missing.push_back(t.driver_id);
      continue;
    }
    ++c.raw[static_cast<std::size_t>(t.level - 1)][static_cast<std::size_t>(it->second - 1)];
  }
  for (const auto& [id, level] : pred)
    if (!seen.count(id)) missing.push_back(id);
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DataError("driver ids without a matching prediction or label: " + list);
  }
  double mass = 0.0;
  for (int r = 0; r < kLevelCount; ++r)
    for (int k = 0; k < kLevelCount; ++k) {
      const int n = c.raw[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)];
      const double w = n * consistency_weight(r + 1, k + 1);
      c.weighted[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] = w;
      c.total += static_cast<std::size_t>(n);
      mass += w;
    }
  c.accuracy = c.total ? mass / static_cast<double>(c.total) : kNaN;
  for (int l = 0; l < kLevelCount; ++l) {
    double col_w = 0, row_w = 0;
    int col_n = 0, row_n = 0;
    for (int o = 0; o < kLevelCount; ++o) {
      col_w += c.weighted[static_cast<std::size_t>(o)][static_cast<std::size_t>(l)];
      col_n += c.raw[static_cast<std::size_t>(o)][static_cast<std::size_t>(l)];
      row_w += c.weighted[static_cast<std::size_t>(l)][static_cast<std::size_t>(o)];
      row_n += c.raw[static_cast<std::size_t>(l)][static_cast<std::size_t>(o)];
    }
    c.precision[static_cast<std::size_t>(l)] = col_n ? col_w / col_n : kNaN;
    c.recall[static_cast<std::size_t>(l)] = row_n ? row_w / row_n : kNaN;
  }
  return c;
}

ThresholdFit fit_thresholds(std::span<const DriverScore> scores,
                            std::span<const SubjectiveLabel> truth,
                            const ThresholdFitOptions& o) {
  if (truth.empty()) throw ValidationError("threshold fitting needs subjective labels");
  if (!(o.grid_step > 0.0)) throw ValidationError("grid step must be positive");
  if (!(o.lo < o.hi)) throw ValidationError("threshold range must satisfy lo < hi");
  std::map<std::string, double> by_id;
  for (const auto& s : scores) by_id[s.driver_id] = s.score;
  std::vector<double> s;
  std::vector<int> t;
  std::vector<std::string> missing;
  for (const auto& l : truth) {
    check_level(l.level, "subjective");
    auto it = by_id.find(l.driver_id);
    if (it == by_id.end()) {
      missing.push_back(l.driver_id);
      continue;
    }
    s.push_back(it->second);
    t.push_back(l.level);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DataError("labelled drivers without a score: " + list);
  }
  const auto G = static_cast<std::size_t>(std::llround((o.hi - o.lo) / o.grid_step)) + 1;
  if (G < 4) throw ValidationError("grid too coarse for four cut points");
  std::vector<double> grid(G);
  for (std::size_t j = 0; j < G; ++j) grid[j] = j + 1 == G ? o.hi : o.lo + static_cast<double>(j) * o.grid_step;

  ThresholdFit fit;
  std::array<int, kLevelCount> per_level{};
  for (int l : t) ++per_level[static_cast<std::size_t>(l - 1)];
  int represented = 0;
  for (int l = 0; l < kLevelCount; ++l) {
    if (per_level[static_cast<std::size_t>(l)] == 0) continue;
    ++represented;
    if (per_level[static_cast<std::size_t>(l)] < 5)
      fit.warnings.push_back("level " + std::to_string(l + 1) + " has only " +
                             std::to_string(per_level[static_cast<std::size_t>(l)]) +
                             " labelled drivers (fewer than 5)");
  }
  if (represented == 1)
    fit.warnings.push_back("all drivers share one subjective level; thresholds are degenerate");

  const GridFit g = grid_search(s, t, grid);
  fit.thresholds.scenario = o.scenario;
  fit.thresholds.lo = o.lo;
  fit.thresholds.hi = o.hi;
  for (int i = 0; i < 4; ++i)
    fit.thresholds.cuts[static_cast<std::size_t>(i)] = grid[static_cast<std::size_t>(g.cut_index[static_cast<std::size_t>(i)])];
  const double denom = 5.0 * static_cast<double>(s.size());
  fit.accuracy = static_cast<double>(g.credits) / denom;

  if (o.permutations > 0) {
    std::mt19937_64 rng(o.seed);
    std::vector<int> shuffled = t;
    int at_least = 0;
    double sum = 0.0;
    for (int r = 0; r < o.permutations; ++r) {
      shuffle_in_place(shuffled, rng);
      const double acc = static_cast<double>(grid_search(s, shuffled, grid).credits) / denom;
      sum += acc;
      if (acc >= fit.accuracy - 1e-12) ++at_least;
    }
    fit.permutation_mean = sum / o.permutations;
    fit.p_value = (1.0 + at_least) / (1.0 + o.permutations);
    fit.significant = fit.p_value <= 0.01;
    if (!fit.significant)
      fit.warnings.push_back("fitted accuracy " + format_double(fit.accuracy) +
                             " is not distinguishable from shuffled labels (mean " +
                             format_double(fit.permutation_mean) + ", p = " +
                             format_double(fit.p_value) + ")");
  }
  return fit;
}

std::map<std::string, DriverAttributes> read_attributes_csv(const std::string& text,
                                                            const std::string& source) {
  CsvReader r(text, source);
  const auto id = r.column("driver_id");
  const auto g = r.column("gender");
  const auto a = r.column("age_band");
  const auto e = r.column("experience_band");
  std::map<std::string, DriverAttributes> out;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() < r.header().size()) throw DataError(source + ": short row");
    out[f[id]] = {f[g], f[a], f[e]};
  }
  return out;
}

std::string attributes_csv(const std::vector<std::string>& driver_ids,
                           const std::map<std::string, DriverAttributes>& attributes) {
  std::string s = "driver_id,gender,age_band,experience_band\n";
  for (const auto& id : driver_ids) {
    const auto& a = attributes.at(id);
    s += id + "," + a.gender + "," + a.age_band + "," + a.experience_band + "\n";
  }
  return s;
}

GroupReport group_report(const StyleModel& model, const StyleOrdering& ordering,
                         const std::map<std::string, DriverAttributes>& attributes,
                         const GroupReportOptions& o) {
  const int K = model.topic_count();
  if (ordering.style_count() != K) throw ValidationError("ordering does not match the model");
  const std::size_t D = model.driver_count();
  std::vector<std::string> missing;
  for (const auto& id : model.driver_ids)
    if (!attributes.count(id)) missing.push_back(id);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DataError("drivers without attributes: " + list);
  }
  const auto order = ordering.calmest_first();
  Eigen::MatrixXd ranked(static_cast<Eigen::Index>(D), K);
  for (std::size_t d = 0; d < D; ++d)
    for (int r = 0; r < K; ++r)
      ranked(static_cast<Eigen::Index>(d), r) =
          model.theta(static_cast<Eigen::Index>(d), order[static_cast<std::size_t>(r)]);

  GroupReport rep;
  auto summarize = [&](const std::string& attr, const std::string& group,
                       const std::vector<std::size_t>& members) {
    GroupRow row;
    row.attribute = attr;
    row.group = group;
    row.size = members.size();
    for (int r = 0; r < K; ++r) {
      double m = 0.0;
      for (auto d : members) m += ranked(static_cast<Eigen::Index>(d), r);
      m /= static_cast<double>(members.size());
      double v = 0.0;
      for (auto d : members) v += std::pow(ranked(static_cast<Eigen::Index>(d), r) - m, 2);
      row.mean.push_back(m);
      row.sd.push_back(members.size() > 1 ? std::sqrt(v / static_cast<double>(members.size() - 1)) : kNaN);
    }
    if (members.size() == 1)
      rep.warnings.push_back(attr + "=" + group + " has a single driver; dispersion undefined");
    rep.rows.push_back(std::move(row));
  };

  if (D > 0) {
    std::vector<std::size_t> everyone(D);
    std::iota(everyone.begin(), everyone.end(), 0);
    summarize("all", "all", everyone);
  }
  std::mt19937_64 rng(o.seed);
  const std::vector<std::pair<std::string, std::string DriverAttributes::*>> attrs = {
      {"gender", &DriverAttributes::gender},
      {"age_band", &DriverAttributes::age_band},
      {"experience_band", &DriverAttributes::experience_band}};
  for (const auto& [name, field] : attrs) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t d = 0; d < D; ++d) groups[attributes.at(model.driver_ids[d]).*field].push_back(d);
    if (auto it = o.expected_groups.find(name); it != o.expected_groups.end())
      for (const auto& g : it->second)
        if (!groups.count(g)) rep.warnings.push_back(name + "=" + g + " is empty; omitted");
    for (const auto& [g, members] : groups) summarize(name, g, members);
    if (groups.size() < 2 || o.permutations <= 0) continue;

    std::vector<int> label(D);
    std::vector<std::size_t> sizes;
    int gi = 0;
    for (const auto& [g, members] : groups) {
      for (auto d : members) label[d] = gi;
      sizes.push_back(members.size());
      ++gi;
    }
    const Eigen::RowVectorXd grand = ranked.colwise().mean();
    auto statistic = [&](const std::vector<int>& lab) {
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(gi, K);
      for (std::size_t d = 0; d < D; ++d) sums.row(lab[d]) += ranked.row(static_cast<Eigen::Index>(d));
      Eigen::RowVectorXd ss = Eigen::RowVectorXd::Zero(K);
      for (int g = 0; g < gi; ++g) {
        const double n = static_cast<double>(sizes[static_cast<std::size_t>(g)]);
        ss += n * (sums.row(g) / n - grand).array().square().matrix();
      }
      return ss;
    };
    const Eigen::RowVectorXd observed = statistic(label);
    Eigen::RowVectorXd exceed = Eigen::RowVectorXd::Zero(K);
    std::vector<int> perm = label;
    for (int r = 0; r < o.permutations; ++r) {
      shuffle_in_place(perm, rng);
      const Eigen::RowVectorXd st = statistic(perm);
      for (int k = 0; k < K; ++k)
        if (st(k) >= observed(k) * (1.0 - 1e-12)) exceed(k) += 1.0;
    }
    for (int k = 0; k < K; ++k)
      rep.tests.push_back({name, k + 1, observed(k), (1.0 + exceed(k)) / (1.0 + o.permutations)});
  }
  return rep;
}

std::string group_rows_csv(const GroupReport& report) {
  std::string s = "attribute,group,n,style_rank,mean,sd\n";
  for (const auto& r : report.rows)
    for (std::size_t k = 0; k < r.mean.size(); ++k)
      s += r.attribute + "," + r.group + "," + std::to_string(r.size) + "," + std::to_string(k + 1) +
           "," + format_double(r.mean[k]) + "," + (std::isnan(r.sd[k]) ? "" : format_double(r.sd[k])) + "\n";
  return s;
}

std::string group_tests_csv(const GroupReport& report) {
  std::string s = "attribute,style_rank,statistic,p_value\n";
  for (const auto& t : report.tests)
    s += t.attribute + "," + std::to_string(t.style_rank) + "," + format_double(t.statistic) + "," +
         format_double(t.p_value) + "\n";
  return s;
}

}  // namespace drivestyle
