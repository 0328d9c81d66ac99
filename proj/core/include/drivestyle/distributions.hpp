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

#pragma once

#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "drivestyle/errors.hpp"

namespace drivestyle {

enum class Family { kNormal, kBeta, kGamma, kGEV };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

/// Affine map x' = scale * x + offset applied to the data before fitting a
/// family with restricted support (Beta on (0,1), Gamma on (0,inf)).
struct AffineTransform {
  double scale = 1.0;
  double offset = 0.0;

  double forward(double x) const noexcept { return scale * x + offset; }
  double inverse(double y) const noexcept { return (y - offset) / scale; }
  friend bool operator==(const AffineTransform&, const AffineTransform&) = default;
};

/// A parametric law over raw factor-score units.
///
/// Parameters, in order: Normal (mean, sd); Beta (a, b); Gamma (shape, scale);
/// GEV (location, scale, shape). Beta and Gamma parameters refer to the
/// transformed variable; `log_likelihood` and `aic` include the Jacobian of
/// the transform, so all four families are comparable on the raw data.
struct FittedDistribution {
  Family family = Family::kNormal;
  std::vector<double> params;
  AffineTransform transform;
  double log_likelihood = 0.0;
  double aic = 0.0;
  double support_lo = 0.0;  // raw units, may be -inf
  double support_hi = 0.0;  // raw units, may be +inf
  std::size_t sample_count = 0;

  int parameter_count() const noexcept { return static_cast<int>(params.size()); }
};

FittedDistribution make_normal(double mean, double sd);
FittedDistribution make_beta(double a, double b, AffineTransform t = {});
FittedDistribution make_gamma(double shape, double scale, AffineTransform t = {});
FittedDistribution make_gev(double location, double scale, double shape);

double log_pdf(const FittedDistribution& d, double x);
double cdf(const FittedDistribution& d, double x);
/// Inverse CDF at probability p in (0,1). Throws RangeError otherwise.
double quantile(const FittedDistribution& d, double p);
double sample(const FittedDistribution& d, std::mt19937_64& rng);

/// Sum of log_pdf over `data` in raw units.
double log_likelihood(const FittedDistribution& d, std::span<const double> data);

FittedDistribution fit_normal(std::span<const double> data);
FittedDistribution fit_beta(std::span<const double> data);
FittedDistribution fit_gamma(std::span<const double> data);
FittedDistribution fit_gev(std::span<const double> data);

/// Hosking (1985) probability-weighted-moment estimates (location, scale, shape).
std::vector<double> gev_pwm_estimate(std::span<const double> data);

struct CandidateFits {
  std::vector<FittedDistribution> fits;  // ascending AIC
  Warnings warnings;
};

/// Fits all four families by maximum likelihood. A family whose optimizer
/// fails is dropped with a warning. Throws NumericalError if all fail,
/// ValidationError for fewer than 50 samples, DataError for zero variance.
CandidateFits fit_candidates(std::span<const double> data);

/// GEV when `prefer_gev` and it was fitted, otherwise the lowest-AIC fit.
const FittedDistribution& select_fit(const CandidateFits& candidates, bool prefer_gev);

/// Margin used when mapping data into the open support of Beta and Gamma.
inline constexpr double kSupportEpsilon = 1e-6;

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimization. Converges when the spread of
/// simplex values falls below `ftol * (|f_best| + ftol)`.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, std::vector<double> step,
                             double ftol = 1e-8, int max_evaluations = 2000);

}  // namespace drivestyle
