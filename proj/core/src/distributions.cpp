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

#include "drivestyle/distributions.hpp"

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace drivestyle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// |shape| below this is evaluated as the Gumbel limit.
constexpr double kGumbelThreshold = 1e-9;

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x, double mean) {
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size());
}

void finish(FittedDistribution& d, std::span<const double> data) {
  d.sample_count = data.size();
  d.log_likelihood = log_likelihood(d, data);
  d.aic = 2.0 * d.parameter_count() - 2.0 * d.log_likelihood;
}

double gev_log_pdf(double mu, double sigma, double xi, double x) {
  if (!(sigma > 0.0)) return -kInf;
  const double y = (x - mu) / sigma;
  if (std::abs(xi) < kGumbelThreshold) return -std::log(sigma) - y - std::exp(-y);
  const double t = 1.0 + xi * y;
  if (!(t > 0.0)) return -kInf;
  const double lt = std::log(t);
  return -std::log(sigma) - (1.0 + 1.0 / xi) * lt - std::exp(-lt / xi);
}

}  // namespace

const char* to_string(Family f) {
  switch (f) {
    case Family::kNormal: return "normal";
    case Family::kBeta: return "beta";
    case Family::kGamma: return "gamma";
    case Family::kGEV: return "gev";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "normal") return Family::kNormal;
  if (s == "beta") return Family::kBeta;
  if (s == "gamma") return Family::kGamma;
  if (s == "gev") return Family::kGEV;
  throw ValidationError("unknown distribution family '" + s + "'");
}

FittedDistribution make_normal(double mean, double sd) {
  if (!(sd > 0.0)) throw ValidationError("normal sd must be positive");
  FittedDistribution d;
  d.family = Family::kNormal;
  d.params = {mean, sd};
  d.support_lo = -kInf;
  d.support_hi = kInf;
  return d;
}

FittedDistribution make_beta(double a, double b, AffineTransform t) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("beta parameters must be positive");
  if (!(t.scale > 0.0)) throw ValidationError("transform scale must be positive");
  FittedDistribution d;
  d.family = Family::kBeta;
  d.params = {a, b};
  d.transform = t;
  d.support_lo = t.inverse(0.0);
  d.support_hi = t.inverse(1.0);
  return d;
}

FittedDistribution make_gamma(double shape, double scale, AffineTransform t) {
  if (!(shape > 0.0) || !(scale > 0.0)) throw ValidationError("gamma parameters must be positive");
  if (!(t.scale > 0.0)) throw ValidationError("transform scale must be positive");
  FittedDistribution d;
  d.family = Family::kGamma;
  d.params = {shape, scale};
  d.transform = t;
  d.support_lo = t.inverse(0.0);
  d.support_hi = kInf;
  return d;
}

FittedDistribution make_gev(double location, double scale, double shape) {
  if (!(scale > 0.0)) throw ValidationError("GEV scale must be positive");
  FittedDistribution d;
  d.family = Family::kGEV;
  d.params = {location, scale, shape};
  d.support_lo = -kInf;
  d.support_hi = kInf;
  if (shape > kGumbelThreshold) d.support_lo = location - scale / shape;
  if (shape < -kGumbelThreshold) d.support_hi = location - scale / shape;
  return d;
}

double log_pdf(const FittedDistribution& d, double x) {
  const auto& p = d.params;
  switch (d.family) {
    case Family::kNormal: {
      const double z = (x - p[0]) / p[1];
      return -0.5 * z * z - std::log(p[1]) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    case Family::kBeta: {
      const double y = d.transform.forward(x);
      if (!(y > 0.0 && y < 1.0)) return -kInf;
      return (p[0] - 1.0) * std::log(y) + (p[1] - 1.0) * std::log1p(-y) -
             (std::lgamma(p[0]) + std::lgamma(p[1]) - std::lgamma(p[0] + p[1])) +
             std::log(d.transform.scale);
    }
    case Family::kGamma: {
      const double y = d.transform.forward(x);
      if (!(y > 0.0)) return -kInf;
      return (p[0] - 1.0) * std::log(y) - y / p[1] - std::lgamma(p[0]) - p[0] * std::log(p[1]) +
             std::log(d.transform.scale);
    }
    case Family::kGEV:
      return gev_log_pdf(p[0], p[1], p[2], x);
  }
  return -kInf;
}

double log_likelihood(const FittedDistribution& d, std::span<const double> data) {
  double s = 0.0;
  for (double x : data) s += log_pdf(d, x);
  return s;
}

double cdf(const FittedDistribution& d, double x) {
  const auto& p = d.params;
  switch (d.family) {
    case Family::kNormal:
      return boost::math::cdf(boost::math::normal_distribution<>(p[0], p[1]), x);
    case Family::kBeta: {
      const double y = d.transform.forward(x);
      if (y <= 0.0) return 0.0;
      if (y >= 1.0) return 1.0;
      return boost::math::cdf(boost::math::beta_distribution<>(p[0], p[1]), y);
    }
    case Family::kGamma: {
      const double y = d.transform.forward(x);
      if (y <= 0.0) return 0.0;
      return boost::math::cdf(boost::math::gamma_distribution<>(p[0], p[1]), y);
    }
    case Family::kGEV: {
      const double y = (x - p[0]) / p[1];
      if (std::abs(p[2]) < kGumbelThreshold) return std::exp(-std::exp(-y));
      const double t = 1.0 + p[2] * y;
      if (t <= 0.0) return p[2] > 0.0 ? 0.0 : 1.0;
      return std::exp(-std::pow(t, -1.0 / p[2]));
    }
  }
  return 0.0;
}

double quantile(const FittedDistribution& d, double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw RangeError("quantile probability must lie in (0, 1)");
  const auto& p = d.params;
  switch (d.family) {
    case Family::kNormal:
      return boost::math::quantile(boost::math::normal_distribution<>(p[0], p[1]), prob);
    case Family::kBeta:
      return d.transform.inverse(
          boost::math::quantile(boost::math::beta_distribution<>(p[0], p[1]), prob));
    case Family::kGamma:
      return d.transform.inverse(
          boost::math::quantile(boost::math::gamma_distribution<>(p[0], p[1]), prob));
    case Family::kGEV: {
      const double l = -std::log(prob);
      if (std::abs(p[2]) < kGumbelThreshold) return p[0] - p[1] * std::log(l);
      return p[0] + p[1] * (std::pow(l, -p[2]) - 1.0) / p[2];
    }
  }
  return 0.0;
}

double sample(const FittedDistribution& d, std::mt19937_64& rng) {
  const auto& p = d.params;
  switch (d.family) {
    case Family::kNormal:
      return std::normal_distribution<double>(p[0], p[1])(rng);
    case Family::kBeta: {
      const double x = std::gamma_distribution<double>(p[0], 1.0)(rng);
      const double y = std::gamma_distribution<double>(p[1], 1.0)(rng);
      return d.transform.inverse(x / (x + y));
    }
    case Family::kGamma:
      return d.transform.inverse(std::gamma_distribution<double>(p[0], p[1])(rng));
    case Family::kGEV: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      double v = 0.0;
      do {
        v = u(rng);
      } while (v <= 0.0);
      return quantile(d, v);
    }
  }
  return 0.0;
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, std::vector<double> step, double ftol,
                             int max_evaluations) {
  const std::size_t n = x0.size();
  NelderMeadResult res;
  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step[i];
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  };
  for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> idx(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  while (true) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return values[a] < values[b];
    });
    const std::size_t best = idx.front();
    const std::size_t worst = idx.back();
    const std::size_t second = idx[n - 1];
    if (std::isfinite(values[worst]) &&
        values[worst] - values[best] <= ftol * (std::abs(values[best]) + ftol)) {
      res.converged = true;
      break;
    }
    if (evals >= max_evaluations) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
    }
    for (std::size_t j = 0; j < n; ++j) xr[j] = centroid[j] + (centroid[j] - simplex[worst][j]);
    const double fr = eval(xr);
    if (fr < values[best]) {
      for (std::size_t j = 0; j < n; ++j)
        xe[j] = centroid[j] + 2.0 * (centroid[j] - simplex[worst][j]);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        values[worst] = fe;
      } else {
        simplex[worst] = xr;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = xr;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    for (std::size_t j = 0; j < n; ++j) {
      xc[j] = outside ? centroid[j] + 0.5 * (xr[j] - centroid[j])
                      : centroid[j] + 0.5 * (simplex[worst][j] - centroid[j]);
    }
    const double fc = eval(xc);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = xc;
      values[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j)
        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      values[i] = eval(simplex[i]);
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  res.x = simplex[static_cast<std::size_t>(it - values.begin())];
  res.value = *it;
  res.evaluations = evals;
  return res;
}

FittedDistribution fit_normal(std::span<const double> data) {
  const double m = mean_of(data);
  const double v = variance_of(data, m);
  if (!(v > 0.0)) throw DataError("normal fit: zero variance");
  auto d = make_normal(m, std::sqrt(v));
  finish(d, data);
  return d;
}

FittedDistribution fit_beta(std::span<const double> data) {
  const auto [mn, mx] = std::minmax_element(data.begin(), data.end());
  const double range = *mx - *mn;
  if (!(range > 0.0)) throw DataError("beta fit: zero range");
  AffineTransform t;
  t.scale = (1.0 - 2.0 * kSupportEpsilon) / range;
  t.offset = kSupportEpsilon - t.scale * *mn;

  double s1 = 0.0, s2 = 0.0, sum = 0.0, sq = 0.0;
  for (double x : data) {
    const double y = t.forward(x);
    s1 += std::log(y);
    s2 += std::log1p(-y);
    sum += y;
    sq += y * y;
  }
  const double n = static_cast<double>(data.size());
  const double m = sum / n;
  const double v = std::max(sq / n - m * m, 1e-12);
  const double common = std::max(m * (1.0 - m) / v - 1.0, 1e-3);
  const std::vector<double> x0 = {std::log(m * common), std::log((1.0 - m) * common)};

  auto nll = [&](const std::vector<double>& lp) {
    const double a = std::exp(lp[0]);
    const double b = std::exp(lp[1]);
    if (!std::isfinite(a) || !std::isfinite(b)) return kInf;
    return -((a - 1.0) * s1 + (b - 1.0) * s2 -
             n * (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)));
  };
  auto r = nelder_mead(nll, x0, {0.5, 0.5});
  r = nelder_mead(nll, r.x, {0.05, 0.05});
  if (!r.converged || !std::isfinite(r.value))
    throw NumericalError("beta fit: optimizer did not converge");
  auto d = make_beta(std::exp(r.x[0]), std::exp(r.x[1]), t);
  finish(d, data);
  return d;
}

FittedDistribution fit_gamma(std::span<const double> data) {
  const double mn = *std::min_element(data.begin(), data.end());
  AffineTransform t;
  t.scale = 1.0;
  t.offset = kSupportEpsilon - mn;
  double sum = 0.0, slog = 0.0;
  for (double x : data) {
    const double y = t.forward(x);
    sum += y;
    slog += std::log(y);
  }
  const double n = static_cast<double>(data.size());
  const double mean = sum / n;
  const double s = std::log(mean) - slog / n;
  if (!(s > 0.0) || !std::isfinite(s)) throw NumericalError("gamma fit: degenerate data");
  // Minka's starting point, then Newton on the profile likelihood of the shape.
  double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    const double g = std::log(k) - boost::math::digamma(k) - s;
    const double h = 1.0 / k - boost::math::trigamma(k);
    double next = k - g / h;
    if (!(next > 0.0)) next = 0.5 * k;
    if (std::abs(next - k) <= 1e-12 * k) {
      k = next;
      converged = true;
      break;
    }
    k = next;
  }
  if (!converged || !std::isfinite(k)) throw NumericalError("gamma fit: Newton iteration failed");
  auto d = make_gamma(k, mean / k, t);
  finish(d, data);
  return d;
}

std::vector<double> gev_pwm_estimate(std::span<const double> data) {
  std::vector<double> x(data.begin(), data.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double j = static_cast<double>(i);
    b0 += x[i];
    b1 += x[i] * j / (n - 1.0);
    b2 += x[i] * j * (j - 1.0) / ((n - 1.0) * (n - 2.0));
  }
  b0 /= n;
  b1 /= n;
  b2 /= n;
  const double c = (2.0 * b1 - b0) / (3.0 * b2 - b0) - std::log(2.0) / std::log(3.0);
  const double k = 7.8590 * c + 2.9554 * c * c;  // Hosking's k = -shape
  double sigma = 0.0;
  double mu = 0.0;
  if (std::abs(k) < 1e-6) {
    sigma = (2.0 * b1 - b0) / std::log(2.0);
    mu = b0 - 0.5772156649015329 * sigma;
  } else {
    const double g = std::tgamma(1.0 + k);
    sigma = (2.0 * b1 - b0) * k / (g * (1.0 - std::pow(2.0, -k)));
    mu = b0 + sigma * (g - 1.0) / k;
  }
  return {mu, sigma, -k};
}

FittedDistribution fit_gev(std::span<const double> data) {
  auto init = gev_pwm_estimate(data);
  if (!(init[1] > 0.0) || !std::isfinite(init[0]) || !std::isfinite(init[2])) {
    const double m = mean_of(data);
    const double sd = std::sqrt(variance_of(data, m));
    init = {m - 0.45 * sd, 0.78 * sd, 0.0};
  }
  auto nll = [&](const std::vector<double>& q) {
    const double sigma = std::exp(q[1]);
    double s = 0.0;
    for (double x : data) {
      const double l = gev_log_pdf(q[0], sigma, q[2], x);
      if (!std::isfinite(l)) return kInf;
      s += l;
    }
    return -s;
  };
  std::vector<double> x0 = {init[0], std::log(init[1]), init[2]};
  if (!std::isfinite(nll(x0))) x0[2] = 0.0;  // Gumbel start is feasible everywhere
  const double sigma0 = init[1];
  auto r = nelder_mead(nll, x0, {0.1 * sigma0, 0.1, 0.05});
  r = nelder_mead(nll, r.x, {0.01 * sigma0, 0.01, 0.01});
  if (!r.converged || !std::isfinite(r.value))
    throw NumericalError("GEV fit: optimizer did not converge");
  auto d = make_gev(r.x[0], std::exp(r.x[1]), r.x[2]);
  finish(d, data);
  return d;
}

CandidateFits fit_candidates(std::span<const double> data) {
  if (data.size() < 50)
    throw ValidationError("distribution fitting needs at least 50 samples, got " +
                          std::to_string(data.size()));
  for (double x : data)
    if (!std::isfinite(x)) throw DataError("distribution fitting: non-finite sample");
  const double m = mean_of(data);
  if (!(variance_of(data, m) > 0.0))
    throw DataError("distribution fitting: zero variance, no maximum-likelihood estimate");

  CandidateFits out;
  using Fitter = FittedDistribution (*)(std::span<const double>);
  const std::pair<Family, Fitter> fitters[] = {{Family::kNormal, &fit_normal},
                                               {Family::kBeta, &fit_beta},
                                               {Family::kGamma, &fit_gamma},
                                               {Family::kGEV, &fit_gev}};
  for (const auto& [family, fitter] : fitters) {
    try {
      auto d = fitter(data);
      if (!std::isfinite(d.log_likelihood))
        throw NumericalError(std::string(to_string(family)) + " fit: non-finite log-likelihood");
      out.fits.push_back(std::move(d));
    } catch (const Error& e) {
      out.warnings.push_back(std::string(to_string(family)) + " omitted: " + e.what());
    }
  }
  if (out.fits.empty()) throw NumericalError("no distribution family could be fitted");
  std::stable_sort(out.fits.begin(), out.fits.end(),
                   [](const auto& a, const auto& b) { return a.aic < b.aic; });
  return out;
}

const FittedDistribution& select_fit(const CandidateFits& candidates, bool prefer_gev) {
  if (candidates.fits.empty()) throw ValidationError("no fitted candidates to select from");
  if (prefer_gev) {
    for (const auto& f : candidates.fits)
      if (f.family == Family::kGEV) return f;
  }
  return candidates.fits.front();
}

}  // namespace drivestyle
