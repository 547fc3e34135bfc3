#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "indexins/errors.hpp"
#include "indexins/utility.hpp"
#include "synthetic.hpp"

using namespace indexins;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const ClaimDataset& data() {
  static const ClaimDataset ds = fixtures::synthetic_claims({.claims = 800, .seed = 41});
  return ds;
}

const PayoutModel& tree_model() {
  static const PayoutModel m =
      fit_conditional_mean(data(), Method::tree, Hyperparameters::defaults(Method::tree), 4);
  return m;
}

// long double reference, no shared code with the library
long double ref_expect(const ClaimDataset& ds, double alpha, bool with_y, ExpectationMode mode) {
  long double s = 0.0L;
  for (const auto& r : ds.records()) {
    const long double e = std::exp(static_cast<long double>(alpha) * r.loss);
    s += with_y ? r.loss * e : e;
  }
  s /= ds.size();
  if (mode == ExpectationMode::claims_only) return s;
  const long double p = ds.claim_frequency();
  return (1.0L - p) * (with_y ? 0.0L : 1.0L) + p * s;
}

constexpr ExpectationMode kModes[] = {ExpectationMode::annual_mixture,
                                      ExpectationMode::claims_only};

}  // namespace

TEST_CASE("aversion distribution", "[utility]") {
  const AversionDistribution mu(0.05, 40.0);
  CHECK(mu.cdf(0.05) == 0.0);
  CHECK(mu.cdf(0.01) == 0.0);
  CHECK_THAT(mu.cdf(0.1), WithinRel(1.0 - std::exp(-2.0), 1e-14));
  CHECK_THAT(mu.cdf(0.1) + mu.survival(0.1), WithinAbs(1.0, 1e-15));
  CHECK_THAT(mu.mean(), WithinRel(0.075, 1e-15));
  CHECK_THAT(mu.with_mean_shift(0.1).alpha_minus(), WithinRel(0.075, 1e-14));
  CHECK_THAT(mu.with_mean_rate(0.1).lambda(), WithinRel(20.0, 1e-12));
  // density integrates to the cdf (trapezoid)
  double s = 0.0;
  const int n = 20000;
  const double h = 0.05 / n;
  for (int i = 0; i < n; ++i) s += 0.5 * h * (mu.density(0.05 + i * h) + mu.density(0.05 + (i + 1) * h));
  CHECK_THAT(s, WithinAbs(mu.cdf(0.1), 1e-7));
  CHECK_THROWS_AS(AversionDistribution(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(AversionDistribution(0.1, -1.0), DomainError);
  CHECK_THROWS_AS(mu.with_mean_rate(0.04), DomainError);
}

TEST_CASE("pricing parameters", "[utility]") {
  CHECK_NOTHROW(PricingParams{}.validate());
  CHECK_THROWS_AS((PricingParams{0.0, 0.0, 0.9, 0.0}.validate()), DomainError);
  CHECK_THROWS_AS((PricingParams{0.4, -0.1, 0.9, 0.0}.validate()), DomainError);
  CHECK_THROWS_AS((PricingParams{0.4, 0.0, 1.2, 0.0}.validate()), DomainError);
  CHECK_THROWS_AS((PricingParams{0.4, 0.0, 0.9, -1.0}.validate()), DomainError);
  const Prices p = prices(data(), {0.4, 0.1, 0.8, 0.0}, ExpectationMode::claims_only);
  CHECK_THAT(p.pi_Y, WithinRel(1.4 * p.pure, 1e-15));
  CHECK_THAT(p.pi_phi, WithinRel(1.1 * 0.8 * p.pure, 1e-15));
}

TEST_CASE("Laplace transform against a long double reference", "[utility][property]") {
  for (ExpectationMode mode : kModes) {
    CHECK(laplace_psi(data(), 0.0, mode) == 1.0);
    for (double a : {0.001, 0.01, 0.05, 0.1}) {
      CHECK_THAT(laplace_psi(data(), a, mode),
                 WithinRel(static_cast<double>(ref_expect(data(), a, false, mode)), 1e-12));
      CHECK_THAT(laplace_F(data(), a, mode),
                 WithinRel(static_cast<double>(ref_expect(data(), a, true, mode)), 1e-12));
    }
  }
  CHECK_THROWS_AS(laplace_psi(data(), -0.1), DomainError);
  CHECK_THROWS_AS(laplace_psi(data(), 2.0 * alpha_guard(data())), AlphaTooLargeError);
}

TEST_CASE("F is increasing and F_inverse inverts it", "[utility][property]") {
  for (ExpectationMode mode : kModes) {
    const double guard = alpha_guard(data());
    double prev = laplace_F(data(), 0.0, mode);
    for (int k = 1; k <= 40; ++k) {
      const double a = guard * k / 41.0;
      const double f = laplace_F(data(), a, mode);
      CHECK(f > prev);
      prev = f;
      CHECK_THAT(laplace_F(data(), F_inverse(data(), f, mode), mode), WithinRel(f, 1e-8));
      CHECK_THAT(F_inverse(data(), f, mode), WithinRel(a, 1e-8));
    }
    CHECK(F_inverse(data(), laplace_F(data(), 0.0, mode), mode) == 0.0);
    CHECK_THROWS_AS(F_inverse(data(), 0.5 * laplace_F(data(), 0.0, mode), mode), DomainError);
    CHECK_THROWS_AS(F_inverse(data(), 2.0 * laplace_F(data(), guard, mode), mode), DomainError);
  }
}

TEST_CASE("exponential premium", "[utility][property]") {
  for (ExpectationMode mode : kModes) {
    const double pure = prices(data(), {}, mode).pure;
    double prev = pure;
    for (double a = 0.002; a < 0.2; a += 0.01) {
      const double pi = exponential_premium(data(), a, mode);
      CHECK(pi >= pure);
      CHECK(pi >= prev);
      prev = pi;
      const double ref = static_cast<double>(std::log(ref_expect(data(), a, false, mode)) / a);
      CHECK_THAT(pi, WithinRel(ref, 1e-10));
    }
    CHECK_THAT(exponential_premium(data(), 1e-12, mode), WithinRel(pure, 1e-8));
  }
  CHECK_THROWS_AS(exponential_premium(data(), 0.0), DomainError);
}

TEST_CASE("calibration round trips", "[utility]") {
  for (ExpectationMode mode : kModes) {
    const double pure = prices(data(), {}, mode).pure;
    const double a = calibrate_alpha_minus(data(), 1.4 * pure, mode);
    CHECK(a > 0.0);
    CHECK_THAT(exponential_premium(data(), a, mode), WithinRel(1.4 * pure, 1e-9));

    const double lambda = calibrate_lambda(data(), a, 1.2, 0.2, mode);
    const AversionDistribution mu(a, lambda);
    const double a_star =
        calibrate_alpha_minus(data(), 1.2 * exponential_premium(data(), a, mode), mode);
    CHECK_THAT(mu.survival(a_star), WithinRel(0.2, 1e-9));

    CHECK_THROWS_AS(calibrate_alpha_minus(data(), pure, mode), NoRootError);
    CHECK_THROWS_AS(calibrate_alpha_minus(data(), 1e6 * pure, mode), NoRootError);
    CHECK_THROWS_AS(calibrate_lambda(data(), a, 1.0, 0.2, mode), DomainError);
    CHECK_THROWS_AS(calibrate_lambda(data(), a, 1.2, 1.0, mode), DomainError);
  }
}

TEST_CASE("purchase condition properties", "[utility][property]") {
  const ClaimDataset& ds = data();
  for (ExpectationMode mode : kModes) {
    for (double a : {0.01, 0.05, 0.1}) {
      const CondLaplaceModel lap = fit_cond_laplace(ds, a, tree_model());

      {  // monotone in tau, antitone in theta
        for (double theta : {0.0, 0.1, 0.3}) {
          bool prev = false;
          double prev_rhs = 0.0;
          for (double tau : {0.0, 0.1, 0.5, 1.0, 3.0}) {
            const auto t = preference_terms(ds, tree_model(), lap, {0.4, theta, 0.9, tau}, mode);
            CHECK(t.rhs >= prev_rhs);
            prev_rhs = t.rhs;
            if (prev) CHECK(t.prefers_index());
            prev = t.prefers_index();
          }
        }
        for (double tau : {0.0, 0.5}) {
          bool prev = true;
          for (double theta = 0.0; theta < 1.0; theta += 0.05) {
            const bool now = prefers_index(ds, tree_model(), lap, {0.4, theta, 0.9, tau}, mode);
            if (!prev) CHECK_FALSE(now);
            prev = now;
          }
        }
      }

      {  // mean gap is at least 1 - beta
        for (double beta : {0.5, 0.8, 1.0}) {
          const EtaReport r = eta(ds, tree_model(), lap, beta, 0.4, mode);
          CHECK(r.mean_ratio >= 1.0 - beta - 1e-12);
          CHECK(r.sup_ratio >= r.mean_ratio);
          CHECK_THAT(r.eta, WithinAbs(1.0 - beta + 0.4 - r.sup_ratio, 1e-15));
        }
      }

      {  // expected utilities mirror the condition
        const PricingParams pp{0.4, 0.05, 0.9, 0.3};
        const auto u = expected_utility(ds, tree_model(), lap, pp, mode);
        CHECK(u.index < 0.0);
        CHECK(u.indemnity < 0.0);
        CHECK((u.index > u.indemnity) == prefers_index(ds, tree_model(), lap, pp, mode));
      }
    }
  }
}

TEST_CASE("sufficient condition implies purchase on an aversion grid", "[utility][property]") {
  const ClaimDataset& ds = data();
  int checked = 0;
  for (ExpectationMode mode : kModes) {
    for (int k = 0; k < 20; ++k) {
      const double a = 0.0005 + 0.0025 * k;
      const CondLaplaceModel lap = fit_cond_laplace(ds, a, tree_model());
      for (double beta : {0.6, 0.9, 0.97, 1.0}) {
        const EtaReport r = eta(ds, tree_model(), lap, beta, 0.4, mode);
        if (!(r.eta > 0.0)) continue;
        for (double frac : {0.0, 0.5, 0.999}) {
          const PricingParams pp{0.4, frac * r.eta / beta, beta, 0.0};
          CHECK(prefers_index(ds, tree_model(), lap, pp, mode));
          ++checked;
        }
      }
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("extension of the aversion range", "[utility]") {
  const ClaimDataset& ds = data();
  for (ExpectationMode mode : kModes) {
    // pi_Y = pi_phi: (1 + 0.4) = (1 + theta) * 1
    const PricingParams equal{0.4, 0.4, 1.0, 0.0};
    for (auto v : {ExtensionVariant::as_stated, ExtensionVariant::proof_derived}) {
      CHECK_THAT(h_beta_tau(ds, 0.05, equal, v, mode), WithinAbs(0.0, 1e-9));
    }
    // as stated: the extension only exists when the index is dearer
    CHECK(h_beta_tau(ds, 0.05, {0.4, 0.0, 0.9, 1.0}, ExtensionVariant::as_stated, mode) == 0.0);
    const double h_as = h_beta_tau(ds, 0.05, {0.4, 0.6, 1.0, 0.0}, ExtensionVariant::as_stated, mode);
    CHECK(h_as > 0.0);
    const double target = laplace_F(ds, 0.05, mode) *
                          std::exp(-0.05 * (prices(ds, {0.4, 0.6, 1.0, 0.0}, mode).pi_Y -
                                            prices(ds, {0.4, 0.6, 1.0, 0.0}, mode).pi_phi));
    CHECK_THAT(laplace_F(ds, 0.05 + h_as, mode), WithinRel(target, 1e-9));

    // proof-derived grows with tau
    double prev = -1.0;
    for (double tau : {0.1, 0.5, 2.0}) {
      const double h = h_beta_tau(ds, 0.02, {0.4, 0.0, 0.9, tau}, ExtensionVariant::proof_derived, mode);
      CHECK(h >= prev);
      prev = h;
    }
  }
  CHECK(extension_variant_from_string("as-stated") == ExtensionVariant::as_stated);
  CHECK(extension_variant_from_string("proof_derived") == ExtensionVariant::proof_derived);
  CHECK_THROWS_AS(extension_variant_from_string("other"), ConfigError);
  CHECK_THROWS_AS(h_beta_tau(ds, 0.0, {}, ExtensionVariant::as_stated), DomainError);
}

TEST_CASE("demand counts", "[utility]") {
  const AversionDistribution mu(0.05, 40.0);
  CHECK_THAT(demand_count(1000.0, mu, 0.1), WithinRel(1000.0 * (1.0 - std::exp(-2.0)), 1e-14));
  CHECK(demand_count(1000.0, mu, 0.04) == 0.0);
  CHECK_THROWS_AS(demand_count(0.0, mu, 0.1), DomainError);

  const auto grid = default_alpha_grid(mu, 11);
  REQUIRE(grid.size() == 11);
  CHECK(grid.front() == 0.05);
  CHECK_THAT(grid.back(), WithinRel(0.25, 1e-15));
  CHECK_THROWS_AS(default_alpha_grid(mu, 1), ConfigError);
}

TEST_CASE("preference curve", "[utility]") {
  const ClaimDataset& ds = data();
  const AversionDistribution mu(0.01, 50.0);
  const auto grid = default_alpha_grid(mu, 17);
  for (ExpectationMode mode : kModes) {
    const PreferenceCurve curve(ds, tree_model(), grid, 0.9, mode);
    {  // agrees with the direct condition
      for (const PricingParams& pp : {PricingParams{0.4, 0.0, 0.9, 0.0},
                                      PricingParams{0.4, 0.3, 0.9, 0.5}}) {
        for (std::size_t i = 0; i < grid.size(); i += 4) {
          const CondLaplaceModel lap = fit_cond_laplace(ds, grid[i], tree_model());
          CHECK(curve.prefers(i, pp) == prefers_index(ds, tree_model(), lap, pp, mode));
        }
      }
    }
    {  // direct demand between the extremes
      CHECK(demand_count_direct(curve, 1000.0, mu, {0.4, 50.0, 0.9, 0.0}) == 0.0);
      double prev = 1e300;
      for (double theta : {0.0, 0.1, 0.2, 0.4, 0.8}) {
        const double d = demand_count_direct(curve, 1000.0, mu, {0.4, theta, 0.9, 0.0});
        CHECK(d >= 0.0);
        CHECK(d <= 1000.0);
        CHECK(d <= prev);
        prev = d;
      }
    }
    {  // direct demand integrates the indicator mass
      const PricingParams pp{0.4, 0.1, 0.9, 0.0};
      const auto ind = curve.indicators(pp);
      double mass = mu.cdf(grid.front()) * ind.front() + mu.survival(grid.back()) * ind.back();
      for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        mass += (mu.cdf(grid[k + 1]) - mu.cdf(grid[k])) * 0.5 * (ind[k] + ind[k + 1]);
      }
      CHECK_THAT(demand_count_direct(curve, 1000.0, mu, pp), WithinAbs(1000.0 * mass, 1e-9));
    }
    {  // misuse
      CHECK_THROWS_AS(curve.prefers(0, {0.4, 0.0, 0.8, 0.0}), DomainError);
      const AversionDistribution wide(0.01, 5.0);
      CHECK_THROWS_AS(demand_count_direct(curve, 1000.0, wide, {}), ConfigError);
    }
  }
  const std::vector<double> bad{0.02, 0.01};
  CHECK_THROWS_AS(PreferenceCurve(ds, tree_model(), bad, 0.9), ConfigError);
}
