#ifndef INDEXINS_SOLVENCY_HPP
#define INDEXINS_SOLVENCY_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "indexins/claims.hpp"
#include "indexins/numerics.hpp"
#include "indexins/payout.hpp"
#include "indexins/utility.hpp"

namespace indexins {

struct SolvencyParams {
  double eps = 0.005;        // ruin tolerance, (0, 0.5)
  double eps_prime = 0.0;    // Proposition-3 split; 0 selects eps / 2
  double a = 2.4;            // margin split, > 1
  double gpd_shape = 0.5;    // gamma, (0, 1)
  double gpd_scale = 0.003;  // s, > 0

  double split() const noexcept { return eps_prime > 0.0 ? eps_prime : 0.5 * eps; }
  GpdTail tail() const { return GpdTail(gpd_shape, gpd_scale); }
  /// Throws DomainError naming the first parameter out of range.
  void validate() const;
};

struct PortfolioMoments {
  double pure_payout = 0.0;  // pi*_phi = beta E[Y]
  double sigma = 0.0;        // sd of E[Y|W]
  double sigma_phi = 0.0;    // beta * sigma
  double mean_loss = 0.0;    // E[Y]
};

/// Moments of the payout under the expectation mode. In annual mode the
/// no-claim year is a point mass at 0 for E[Y|W].
PortfolioMoments portfolio_moments(const ClaimDataset& ds, const PayoutModel& mean_model,
                                   double beta,
                                   ExpectationMode mode = ExpectationMode::annual_mixture);

/// ceil((sigma_phi S^-1(eps) / (theta pi*))^2), at least 1.
std::int64_t n_min_gaussian(const PortfolioMoments& m, double theta, double eps);

struct AWindow {
  double a_max = 0.0;
  bool empty() const noexcept { return !(a_max > 1.0); }
  bool contains(double a) const noexcept { return a > 1.0 && a < a_max; }
};

/// (1, gamma theta e^gamma / (s (1 - e^gamma))).
AWindow a_window(double theta, const GpdTail& tail, double eps_level);

/// Minimum count when an accumulation shock with GPD tail of scale n s may
/// hit the portfolio. Throws InfeasibleError when params.a is outside the
/// window at level eps.
std::int64_t n_min_accumulation(const PortfolioMoments& m, double theta,
                                 const SolvencyParams& params);

struct FeasibilityReport {
  double eta = 0.0;
  double rhs = 0.0;               // max of the terms below
  double rhs_gaussian = 0.0;      // sigma-based term
  double rhs_accumulation = 0.0;  // shock term (0 without accumulation)
  bool feasible = false;          // eta >= rhs
  double theta_low = 0.0;         // rhs / beta
  double theta_high = 0.0;        // eta / beta
  double alpha_bound = 0.0;       // alpha0 + h_beta(tau)
  double demand_mass = 0.0;       // mu((0, alpha_bound])
};

/// Proposition-2 inequality from its ingredients. Throws
/// DegenerateDemandError when demand_mass is 0.
FeasibilityReport prop2_condition(double eta, double beta, double sigma, double mean_loss,
                                  double population, double demand_mass, double eps);

/// Proposition-3 inequality from its ingredients.
FeasibilityReport prop3_condition(double eta, double beta, double sigma, double mean_loss,
                                  double population, double demand_mass,
                                  const SolvencyParams& params);

/// Full pipeline: eta at the Laplace model's alpha0, the extension h_beta(tau)
/// priced at the largest admissible loading theta = eta / beta, and the
/// Proposition-2 check. params.theta is ignored.
FeasibilityReport check_prop2(const ClaimDataset& ds, const PayoutModel& mean_model,
                              const CondLaplaceModel& lap, const PricingParams& params,
                              double population, const AversionDistribution& mu, double eps,
                              ExtensionVariant variant = ExtensionVariant::as_stated,
                              ExpectationMode mode = ExpectationMode::annual_mixture);

FeasibilityReport check_prop3(const ClaimDataset& ds, const PayoutModel& mean_model,
                              const CondLaplaceModel& lap, const PricingParams& params,
                              double population, const AversionDistribution& mu,
                              const SolvencyParams& solvency,
                              ExtensionVariant variant = ExtensionVariant::as_stated,
                              ExpectationMode mode = ExpectationMode::annual_mixture);

struct ThetaMinResult {
  bool feasible = false;
  double theta = 0.0;           // refined minimal loading (feasible side)
  std::size_t grid_index = 0;   // first feasible grid point
  double demand = 0.0;          // at theta
  double threshold = 0.0;       // at theta
  double closest_gap = 0.0;     // max over the grid of demand - threshold
  double closest_theta = 0.0;
};

/// Smallest theta on an increasing grid with demand(theta) >= threshold(theta),
/// refined by bisection against the preceding infeasible grid point.
ThetaMinResult theta_min_search(const std::function<double(double)>& demand,
                                const std::function<double(double)>& threshold,
                                std::span<const double> theta_grid, double tol = 1e-6);

struct RuinEstimate {
  std::int64_t trials = 0;
  std::int64_t ruined = 0;
  double probability = 0.0;
  double ci_low = 0.0;  // 95% Wilson interval
  double ci_high = 0.0;
  double half_width() const noexcept { return 0.5 * (ci_high - ci_low); }
};

/// Wilson score interval at 95%.
RuinEstimate wilson_estimate(std::int64_t ruined, std::int64_t trials);

struct RuinScenario {
  std::int64_t n = 0;             // policyholders
  double theta = 0.0;             // index loading
  double beta = 0.9;
  double claim_probability = 0.06;
  std::int64_t trials = 100000;
  std::uint64_t seed = 1;
  std::optional<GpdTail> accumulation;
};

/// Monte Carlo one-year ruin frequency of a portfolio selling the index
/// product at (1 + theta) p beta E[Y]. Each trial draws claims with
/// probability p, severities with replacement from the sample (paid phi_beta),
/// and an optional shock with GPD scale n s pi*, pi* = p beta E[Y] (s is
/// measured in pure-payout units); ruin is payouts >= premiums.
/// Trial k uses its own counter-based stream, so results do not depend on
/// evaluation order.
RuinEstimate simulate_ruin(const ClaimDataset& ds, const PayoutModel& mean_model,
                           const RuinScenario& scenario);

}  // namespace indexins

#endif  // INDEXINS_SOLVENCY_HPP
