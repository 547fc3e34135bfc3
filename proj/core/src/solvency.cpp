#include "indexins/solvency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "indexins/errors.hpp"
#include "indexins/random.hpp"

namespace indexins {

namespace {

std::int64_t ceil_count(double x) {
  if (!std::isfinite(x) || x > 9.0e18) throw InfeasibleError("minimum count overflows");
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(x)));
}

void check_theta(double theta) {
  if (!(theta > 0.0)) throw DomainError("loading theta must be > 0");
}

}  // namespace

void SolvencyParams::validate() const {
  if (!(eps > 0.0 && eps < 0.5)) throw DomainError("eps must lie in (0, 0.5)");
  if (!(eps_prime >= 0.0 && split() < eps)) throw DomainError("eps' must lie in (0, eps)");
  if (!(a > 1.0)) throw DomainError("a must exceed 1");
  GpdTail(gpd_shape, gpd_scale);
}

PortfolioMoments portfolio_moments(const ClaimDataset& ds, const PayoutModel& mean_model,
                                   double beta, ExpectationMode mode) {
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  std::vector<double> m;
  m.reserve(ds.size());
  for (const auto& r : ds.records()) m.push_back(mean_model.conditional_mean(IndexFeatures::of(r)));
  const double p = ds.claim_frequency();
  PortfolioMoments out;
  out.mean_loss = expectation(ds, [](double y) { return y; }, mode);
  if (mode == ExpectationMode::claims_only) {
    out.sigma = std::sqrt(population_variance(m));
  } else {
    const double mm = mean(m);
    CompensatedSum sq;
    for (double v : m) sq.add(v * v);
    const double second = p * sq.value() / static_cast<double>(m.size());
    out.sigma = std::sqrt(std::max(0.0, second - (p * mm) * (p * mm)));
  }
  out.pure_payout = beta * out.mean_loss;
  out.sigma_phi = beta * out.sigma;
  return out;
}

std::int64_t n_min_gaussian(const PortfolioMoments& m, double theta, double eps) {
  check_theta(theta);
  if (!(eps > 0.0 && eps < 0.5)) throw DomainError("eps must lie in (0, 0.5)");
  if (!(m.pure_payout > 0.0)) throw DomainError("pure payout must be > 0");
  if (m.sigma_phi == 0.0) return 1;
  const double r = m.sigma_phi * std_normal_survival_inv(eps) / (theta * m.pure_payout);
  return ceil_count(r * r);
}

AWindow a_window(double theta, const GpdTail& tail, double eps_level) {
  if (!(eps_level > 0.0 && eps_level < 1.0)) throw DomainError("tolerance must lie in (0, 1)");
  AWindow w;
  if (!(theta > 0.0)) return w;
  const double g = std::pow(eps_level, tail.shape());
  w.a_max = tail.shape() * theta * g / (tail.scale() * (1.0 - g));
  return w;
}

std::int64_t n_min_accumulation(const PortfolioMoments& m, double theta,
                                const SolvencyParams& params) {
  check_theta(theta);
  params.validate();
  if (!(m.pure_payout > 0.0)) throw DomainError("pure payout must be > 0");
  const GpdTail tail = params.tail();
  const AWindow w = a_window(theta, tail, params.eps);
  if (!w.contains(params.a)) {
    throw InfeasibleError("a = " + std::to_string(params.a) + " is outside the window (1, " +
                          std::to_string(w.a_max) + ") at theta = " + std::to_string(theta) +
                          "; the shock probability exceeds eps");
  }
  const double shock = gpd_exceedance(theta / params.a, tail, 1);
  const double level = params.eps - shock;
  if (!(level > 0.0 && level < 1.0)) {
    throw InfeasibleError("tolerance left after the shock is not in (0, 1)");
  }
  if (m.sigma_phi == 0.0) return 1;
  const double r = params.a / (params.a - 1.0) * m.sigma_phi * std_normal_survival_inv(level) /
                   (theta * m.pure_payout);
  return ceil_count(r * r);
}

FeasibilityReport prop2_condition(double eta, double beta, double sigma, double mean_loss,
                                  double population, double demand_mass, double eps) {
  if (!(demand_mass > 0.0)) {
    throw DegenerateDemandError("no policyholder falls in the preferring aversion range");
  }
  if (!(mean_loss > 0.0)) throw DomainError("E[Y] must be > 0");
  if (!(population >= 1.0)) throw DomainError("population size must be >= 1");
  FeasibilityReport r;
  r.eta = eta;
  r.demand_mass = demand_mass;
  r.rhs_gaussian = sigma * beta * std_normal_survival_inv(eps) /
                   (std::sqrt(population) * mean_loss * std::sqrt(demand_mass));
  r.rhs = r.rhs_gaussian;
  r.feasible = eta >= r.rhs;
  r.theta_low = r.rhs / beta;
  r.theta_high = eta / beta;
  return r;
}

FeasibilityReport prop3_condition(double eta, double beta, double sigma, double mean_loss,
                                  double population, double demand_mass,
                                  const SolvencyParams& params) {
  params.validate();
  const double ep = params.split();
  FeasibilityReport r =
      prop2_condition(eta, beta, sigma, mean_loss, population, demand_mass, params.eps - ep);
  r.rhs_gaussian *= params.a / (params.a - 1.0);
  const double g = std::pow(ep, params.gpd_shape);
  r.rhs_accumulation = params.a * beta * params.gpd_scale * (1.0 - g) / (params.gpd_shape * g);
  r.rhs = std::max(r.rhs_gaussian, r.rhs_accumulation);
  r.feasible = eta >= r.rhs;
  r.theta_low = r.rhs / beta;
  return r;
}

namespace {

struct Ingredients {
  double eta;
  double sigma;
  double mean_loss;
  double alpha_bound;
  double mass;
};

Ingredients gather(const ClaimDataset& ds, const PayoutModel& mean_model,
                   const CondLaplaceModel& lap, const PricingParams& params,
                   const AversionDistribution& mu, ExtensionVariant variant,
                   ExpectationMode mode) {
  const EtaReport e = eta(ds, mean_model, lap, params.beta, params.theta_Y, mode);
  PricingParams priced = params;
  priced.theta = std::max(0.0, e.eta / params.beta);
  const double h = h_beta_tau(ds, lap.alpha(), priced, variant, mode);
  const PortfolioMoments m = portfolio_moments(ds, mean_model, params.beta, mode);
  Ingredients g{};
  g.eta = e.eta;
  g.sigma = m.sigma;
  g.mean_loss = m.mean_loss;
  g.alpha_bound = lap.alpha() + h;
  g.mass = mu.cdf(g.alpha_bound);
  return g;
}

}  // namespace

FeasibilityReport check_prop2(const ClaimDataset& ds, const PayoutModel& mean_model,
                              const CondLaplaceModel& lap, const PricingParams& params,
                              double population, const AversionDistribution& mu, double eps,
                              ExtensionVariant variant, ExpectationMode mode) {
  const Ingredients g = gather(ds, mean_model, lap, params, mu, variant, mode);
  FeasibilityReport r =
      prop2_condition(g.eta, params.beta, g.sigma, g.mean_loss, population, g.mass, eps);
  r.alpha_bound = g.alpha_bound;
  return r;
}

FeasibilityReport check_prop3(const ClaimDataset& ds, const PayoutModel& mean_model,
                              const CondLaplaceModel& lap, const PricingParams& params,
                              double population, const AversionDistribution& mu,
                              const SolvencyParams& solvency, ExtensionVariant variant,
                              ExpectationMode mode) {
  const Ingredients g = gather(ds, mean_model, lap, params, mu, variant, mode);
  FeasibilityReport r =
      prop3_condition(g.eta, params.beta, g.sigma, g.mean_loss, population, g.mass, solvency);
  r.alpha_bound = g.alpha_bound;
  return r;
}

ThetaMinResult theta_min_search(const std::function<double(double)>& demand,
                                const std::function<double(double)>& threshold,
                                std::span<const double> theta_grid, double tol) {
  if (theta_grid.empty()) throw ConfigError("theta grid is empty");
  for (std::size_t i = 1; i < theta_grid.size(); ++i) {
    if (!(theta_grid[i] > theta_grid[i - 1])) throw ConfigError("theta grid must be increasing");
  }
  ThetaMinResult res;
  res.closest_gap = -std::numeric_limits<double>::infinity();
  const auto ok = [&](double t, double& d, double& th) {
    d = demand(t);
    th = threshold(t);
    return d >= th;
  };
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    double d = 0.0;
    double th = 0.0;
    const bool feasible = ok(theta_grid[i], d, th);
    if (d - th > res.closest_gap) {
      res.closest_gap = d - th;
      res.closest_theta = theta_grid[i];
    }
    if (!feasible) continue;
    res.feasible = true;
    res.grid_index = i;
    res.theta = theta_grid[i];
    res.demand = d;
    res.threshold = th;
    if (i == 0) return res;
    double lo = theta_grid[i - 1];
    double hi = theta_grid[i];
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      double dm = 0.0;
      double tm = 0.0;
      if (ok(mid, dm, tm)) {
        hi = mid;
        res.demand = dm;
        res.threshold = tm;
      } else {
        lo = mid;
      }
    }
    res.theta = hi;
    return res;
  }
  return res;
}

RuinEstimate wilson_estimate(std::int64_t ruined, std::int64_t trials) {
  if (trials <= 0) throw DomainError("trials must be > 0");
  if (ruined < 0 || ruined > trials) throw DomainError("ruined count out of range");
  constexpr double z = 1.959963984540054;
  const auto n = static_cast<double>(trials);
  const double ph = static_cast<double>(ruined) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (ph + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z * z / (4.0 * n * n)) / denom;
  RuinEstimate e;
  e.trials = trials;
  e.ruined = ruined;
  e.probability = ph;
  e.ci_low = std::max(0.0, centre - half);
  e.ci_high = std::min(1.0, centre + half);
  return e;
}

RuinEstimate simulate_ruin(const ClaimDataset& ds, const PayoutModel& mean_model,
                           const RuinScenario& sc) {
  if (sc.n <= 0) throw DomainError("portfolio size must be > 0");
  if (sc.trials <= 0) throw DomainError("trials must be > 0");
  if (!(sc.theta >= 0.0)) throw DomainError("theta must be >= 0");
  if (!(sc.claim_probability > 0.0 && sc.claim_probability <= 1.0)) {
    throw DomainError("claim probability must lie in (0, 1]");
  }
  const std::vector<double> phi = payouts(mean_model, ds, sc.beta);
  const double mean_y = mean(ds.losses());
  const double pure = sc.claim_probability * sc.beta * mean_y;
  const double premium = (1.0 + sc.theta) * pure;
  const double total_premium = static_cast<double>(sc.n) * premium;
  const double log_q = std::log1p(-sc.claim_probability);
  const auto m = static_cast<std::uint64_t>(phi.size());

  std::int64_t ruined = 0;
  for (std::int64_t k = 0; k < sc.trials; ++k) {
    Rng rng(sc.seed, static_cast<std::uint64_t>(k));
    double paid = 0.0;
    if (sc.claim_probability >= 1.0) {
      for (std::int64_t i = 0; i < sc.n; ++i) paid += phi[rng.below(m)];
    } else {
      // next claimant after a geometric gap
      double pos = -1.0;
      for (;;) {
        pos += 1.0 + std::floor(std::log(rng.uniform_open0()) / log_q);
        if (pos >= static_cast<double>(sc.n)) break;
        paid += phi[rng.below(m)];
      }
    }
    if (sc.accumulation) {
      const double g = sc.accumulation->shape();
      // s is in units of the pure payout, as in the analytic threshold
      const double scale = static_cast<double>(sc.n) * sc.accumulation->scale() * pure;
      paid += scale / g * (std::pow(rng.uniform_open0(), -g) - 1.0);
    }
    if (paid - total_premium >= 0.0) ++ruined;
  }
  return wilson_estimate(ruined, sc.trials);
}

}  // namespace indexins
