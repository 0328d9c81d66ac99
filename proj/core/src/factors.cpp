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

#include "drivestyle/factors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "drivestyle/csv.hpp"

namespace drivestyle {

namespace {

// Eigenvalues within this margin of 1 are treated as exactly 1.
constexpr double kKaiserMargin = 1e-10;

}  // namespace

Eigen::VectorXd FactorModel::explained_variance() const {
  if (loadings.size() == 0) return {};
  return loadings.colwise().squaredNorm().transpose() / static_cast<double>(loadings.rows());
}

VarimaxResult varimax(const Eigen::MatrixXd& loadings, int max_iterations, double tolerance) {
  const Eigen::Index p = loadings.rows();
  const Eigen::Index m = loadings.cols();
  VarimaxResult out;
  out.rotation = Eigen::MatrixXd::Identity(m, m);
  if (m < 2) {
    out.loadings = loadings;
    return out;
  }
  Eigen::VectorXd norms = loadings.rowwise().norm();
  for (Eigen::Index i = 0; i < p; ++i)
    if (norms(i) <= 0.0) norms(i) = 1.0;
  const Eigen::MatrixXd x = norms.asDiagonal().inverse() * loadings;

  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(m, m);
  double d = 0.0;
  bool converged = false;
  int it = 0;
  for (it = 1; it <= max_iterations; ++it) {
    const Eigen::MatrixXd z = x * rot;
    const Eigen::MatrixXd z3 = z.array().cube().matrix();
    const Eigen::RowVectorXd col_ss = z.array().square().colwise().sum();
    const Eigen::MatrixXd target = z3 - z * (col_ss / static_cast<double>(p)).asDiagonal();
    const Eigen::MatrixXd b = x.transpose() * target;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    rot = svd.matrixU() * svd.matrixV().transpose();
    const double previous = d;
    d = svd.singularValues().sum();
    if (it > 1 && d < previous * (1.0 + tolerance)) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericalError("varimax rotation did not converge after " +
                         std::to_string(max_iterations) + " iterations");
  out.rotation = rot;
  out.loadings = norms.asDiagonal() * (x * rot);
  out.iterations = it;
  return out;
}

std::string feature_channel(const std::string& feature_label) {
  const auto pos = feature_label.rfind('_');
  if (pos == std::string::npos) return feature_label;
  return feature_label.substr(0, pos);
}

std::string channel_group(const std::string& channel) {
  if (channel == "v") return "speed";
  if (channel == "a_x") return "acceleration";
  if (channel == "a_y" || channel == "yaw_rate") return "lateral";
  return channel;
}

std::vector<std::string> label_factors(const Eigen::MatrixXd& loadings,
                                       const std::vector<std::string>& feature_labels) {
  const Eigen::Index m = loadings.cols();
  std::vector<std::string> groups;  // in first-appearance order
  std::vector<int> feature_group(feature_labels.size());
  for (std::size_t j = 0; j < feature_labels.size(); ++j) {
    const std::string g = channel_group(feature_channel(feature_labels[j]));
    auto it = std::find(groups.begin(), groups.end(), g);
    if (it == groups.end()) {
      groups.push_back(g);
      it = groups.end() - 1;
    }
    feature_group[j] = static_cast<int>(it - groups.begin());
  }
  // Mean |loading| of every group on every factor.
  struct Cell {
    double score;
    Eigen::Index factor;
    int group;
  };
  std::vector<Cell> cells;
  for (Eigen::Index l = 0; l < m; ++l) {
    for (int g = 0; g < static_cast<int>(groups.size()); ++g) {
      double sum = 0.0;
      int n = 0;
      for (std::size_t j = 0; j < feature_labels.size(); ++j) {
        if (feature_group[j] != g) continue;
        sum += std::abs(loadings(static_cast<Eigen::Index>(j), l));
        ++n;
      }
      cells.push_back({n ? sum / n : 0.0, l, g});
    }
  }
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.group != b.group) return a.group < b.group;
    return a.factor < b.factor;
  });
  std::vector<std::string> labels(static_cast<std::size_t>(m));
  std::set<int> used_groups;
  for (const auto& c : cells) {
    auto& label = labels[static_cast<std::size_t>(c.factor)];
    if (!label.empty() || used_groups.count(c.group)) continue;
    label = groups[static_cast<std::size_t>(c.group)];
    used_groups.insert(c.group);
  }
  for (Eigen::Index l = 0; l < m; ++l) {
    auto& label = labels[static_cast<std::size_t>(l)];
    if (label.empty()) label = "factor" + std::to_string(l + 1);
  }
  return labels;
}

FactorModel fit_factor_model(const FragmentStatsMatrix& pooled, const FactorOptions& options) {
  const Eigen::Index p = pooled.values.rows();
  const Eigen::Index n = pooled.values.cols();
  if (p < 2) throw ValidationError("factor analysis needs at least two features");
  if (n < 2) throw ValidationError("factor analysis needs at least two fragments");
  if (static_cast<Eigen::Index>(pooled.feature_labels.size()) != p)
    throw SchemaError("feature label count does not match the statistics matrix");

  FactorModel model;
  model.feature_labels = pooled.feature_labels;
  if (n < 10 * p)
    model.warnings.push_back("only " + std::to_string(n) + " fragments for " +
                             std::to_string(p) + " features (fewer than 10 per feature)");

  model.feature_means = pooled.values.rowwise().mean();
  const Eigen::MatrixXd centered = pooled.values.colwise() - model.feature_means;
  model.feature_stds =
      (centered.array().square().rowwise().sum() / static_cast<double>(n)).sqrt().matrix();
  for (Eigen::Index j = 0; j < p; ++j) {
    const double scale = std::max(1.0, std::abs(model.feature_means(j)));
    if (!(model.feature_stds(j) > 1e-12 * scale))
      throw DataError("feature '" + pooled.feature_labels[static_cast<std::size_t>(j)] +
                           "' has zero variance");
  }
  const Eigen::MatrixXd z = model.feature_stds.cwiseInverse().asDiagonal() * centered;
  Eigen::MatrixXd corr = (z * z.transpose()) / static_cast<double>(n);
  corr = 0.5 * (corr + corr.transpose());
  corr.diagonal().setOnes();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  if (eig.info() != Eigen::Success)
    throw NumericalError("eigendecomposition of the correlation matrix failed");
  // Eigen returns ascending order.
  model.eigenvalues = eig.eigenvalues().reverse();
  const Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();

  int m = 0;
  if (options.factor_count) {
    m = *options.factor_count;
    if (m < 1 || m > p)
      throw ValidationError("factor count must be in [1, " + std::to_string(p) + "], got " +
                            std::to_string(m));
  } else {
    for (Eigen::Index i = 0; i < p; ++i)
      if (model.eigenvalues(i) > 1.0 + kKaiserMargin) ++m;
    if (m == 0)
      throw NumericalError(
          "Kaiser's criterion retains no factor (no eigenvalue exceeds 1); set the factor "
          "count explicitly");
  }

  Eigen::MatrixXd a(p, m);
  for (int l = 0; l < m; ++l)
    a.col(l) = vectors.col(l) * std::sqrt(std::max(0.0, model.eigenvalues(l)));
  model.unrotated_loadings = a;

  if (options.rotate && m > 1) {
    auto r = varimax(a, options.max_rotation_iterations, options.rotation_tolerance);
    a = r.loadings;
    model.rotation_iterations = r.iterations;
  }

  // Order by explained variance, then make each column's dominant entry positive.
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXd ss = a.colwise().squaredNorm().transpose();
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return ss(x) > ss(y); });
  Eigen::MatrixXd sorted(p, m);
  for (int l = 0; l < m; ++l) {
    Eigen::VectorXd col = a.col(order[static_cast<std::size_t>(l)]);
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col(arg) < 0.0) col = -col;
    sorted.col(l) = col;
  }
  model.loadings = sorted;
  model.uniquenesses =
      (Eigen::VectorXd::Ones(p) - model.loadings.rowwise().squaredNorm()).cwiseMax(0.0).cwiseMin(1.0);
  model.factor_labels = label_factors(model.loadings, model.feature_labels);
  return model;
}

FactorScores score_fragments(const FactorModel& model, const FragmentStatsMatrix& y) {
  if (y.feature_labels != model.feature_labels)
    throw SchemaError("feature labels of driver '" + y.driver_id +
                      "' do not match the factor model");
  const Eigen::MatrixXd& a = model.loadings;
  const Eigen::MatrixXd normal = a.transpose() * a;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("loadings Gram matrix is singular");
  const Eigen::MatrixXd weights = ldlt.solve(a.transpose());  // m x p
  const Eigen::MatrixXd z = model.feature_stds.cwiseInverse().asDiagonal() *
                            (y.values.colwise() - model.feature_means);
  FactorScores out;
  out.driver_id = y.driver_id;
  out.factor_labels = model.factor_labels;
  out.scores = weights * z;
  return out;
}

std::string loadings_csv(const FactorModel& model) {
  std::string s = "feature";
  for (const auto& l : model.factor_labels) s += "," + l;
  s += '\n';
  for (Eigen::Index j = 0; j < model.loadings.rows(); ++j) {
    s += model.feature_labels[static_cast<std::size_t>(j)];
    for (Eigen::Index l = 0; l < model.loadings.cols(); ++l)
      s += "," + format_double(model.loadings(j, l));
    s += '\n';
  }
  return s;
}

}  // namespace drivestyle
