#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "drivestyle/distributions.hpp"

using namespace drivestyle;

namespace {

std::vector<double> draw(const FittedDistribution& d, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = sample(d, rng);
  return x;
}

}  // namespace

TEST_CASE("quantile inverts cdf for every family") {
  const FittedDistribution ds[] = {make_normal(1.0, 2.0), make_beta(2.0, 5.0, {0.5, 1.0}),
                                   make_gamma(3.0, 0.5), make_gev(0.0, 1.0, 0.2),
                                   make_gev(1.0, 0.5, -0.3), make_gev(0.0, 1.0, 0.0)};
  for (const auto& d : ds) {
    for (double p : {0.01, 0.2, 0.5, 0.8, 0.99}) {
      const double x = quantile(d, p);
      CHECK(cdf(d, x) == doctest::Approx(p).epsilon(1e-8));
    }
  }
}

TEST_CASE("GEV maximum likelihood on its own samples") {
  const auto truth = make_gev(0.0, 1.0, 0.2);
  const auto x = draw(truth, 10000, 42);
  const auto fits = fit_candidates(x);
  REQUIRE_FALSE(fits.fits.empty());
  CHECK(fits.fits.front().family == Family::kGEV);
  const auto& g = select_fit(fits, true);
  REQUIRE(g.family == Family::kGEV);
  CHECK(std::abs(g.params[0] - 0.0) <= 0.1);
  CHECK(std::abs(g.params[1] - 1.0) <= 0.1);
  CHECK(std::abs(g.params[2] - 0.2) <= 0.02);
}

TEST_CASE("normal samples select the normal family") {
  const auto x = draw(make_normal(0.0, 1.0), 10000, 9);
  const auto fits = fit_candidates(x);
  CHECK(fits.fits.front().family == Family::kNormal);
  CHECK(select_fit(fits, false).family == Family::kNormal);
  for (std::size_t i = 1; i < fits.fits.size(); ++i) CHECK(fits.fits[i - 1].aic <= fits.fits[i].aic);
}

TEST_CASE("AIC is 2k minus twice the log-likelihood") {
  const auto x = draw(make_gamma(2.0, 1.5), 2000, 4);
  for (const auto& f : fit_candidates(x).fits) {
    CHECK(f.aic == doctest::Approx(2.0 * f.parameter_count() - 2.0 * f.log_likelihood));
    CHECK(f.log_likelihood == doctest::Approx(log_likelihood(f, x)));
  }
}

TEST_CASE("constant input has no MLE") {
  const std::vector<double> x(100, 3.0);
  CHECK_THROWS_AS(fit_candidates(x), DataError);
}

TEST_CASE("too few samples") {
  const std::vector<double> x{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(fit_candidates(x), ValidationError);
}

TEST_CASE("GEV support follows the shape sign") {
  const auto heavy = make_gev(0.0, 1.0, 0.5);
  CHECK(heavy.support_lo == doctest::Approx(-2.0));
  CHECK(std::isinf(heavy.support_hi));
  const auto bounded = make_gev(0.0, 1.0, -0.5);
  CHECK(bounded.support_hi == doctest::Approx(2.0));
  CHECK(log_pdf(bounded, 3.0) == -INFINITY);
}

TEST_CASE("nelder-mead finds a quadratic minimum") {
  const auto r = nelder_mead(
      [](const std::vector<double>& v) { return (v[0] - 1.0) * (v[0] - 1.0) + 4.0 * (v[1] + 2.0) * (v[1] + 2.0); },
      {0.0, 0.0}, {0.5, 0.5}, 1e-14, 5000);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(-2.0).epsilon(1e-4));
}
