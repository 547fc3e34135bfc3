#ifndef INDEXINS_UTILITY_HPP
#define INDEXINS_UTILITY_HPP

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "indexins/claims.hpp"
#include "indexins/numerics.hpp"
#include "indexins/payout.hpp"

namespace indexins {

/// Shifted exponential law of risk aversion across the population.
class AversionDistribution {
 public:
  /// Throws DomainError unless alpha_minus > 0 and lambda > 0.
  AversionDistribution(double alpha_minus, double lambda);

  double alpha_minus() const noexcept { return alpha_minus_; }
  double lambda() const noexcept { return lambda_; }
  double mean() const noexcept { return alpha_minus_ + 1.0 / lambda_; }

  /// mu((0, x])
  double cdf(double x) const noexcept;
  /// mu([x, inf))
  double survival(double x) const noexcept;
  double density(double x) const noexcept;

  /// Same lambda, shift moved so that the mean is `mean_alpha`.
  AversionDistribution with_mean_shift(double mean_alpha) const;
  /// Same shift, lambda rescaled so that the mean is `mean_alpha`.
  AversionDistribution with_mean_rate(double mean_alpha) const;

 private:
  double alpha_minus_;
  double lambda_;
};

struct PricingParams {
  double theta_Y = 0.4;  // indemnity loading, > 0
  double theta = 0.0;    // index loading, >= 0
  double beta = 0.9;     // payout scale, (0, 1]
  double tau = 0.0;      // delay discount exponent, >= 0

  /// Throws DomainError naming the first parameter out of range.
  void validate() const;
};

struct Prices {
  double pure = 0.0;    // E[Y]
  double pi_Y = 0.0;    // (1 + theta_Y) E[Y]
  double pi_phi = 0.0;  // (1 + theta) beta E[Y]
};

Prices prices(const ClaimDataset& ds, const PricingParams& params,
              ExpectationMode mode = ExpectationMode::annual_mixture);

/// Psi_Y(alpha) = E[exp(alpha Y)].
double laplace_psi(const ClaimDataset& ds, double alpha,
                   ExpectationMode mode = ExpectationMode::annual_mixture);

/// F(alpha) = Psi'(alpha) = E[Y exp(alpha Y)].
double laplace_F(const ClaimDataset& ds, double alpha,
                 ExpectationMode mode = ExpectationMode::annual_mixture);

/// alpha with F(alpha) = target, by bisection on [0, alpha_guard] run down
/// to adjacent doubles unless a coarser tolerance is given. Throws
/// DomainError when target lies outside [F(0), F(guard)].
double F_inverse(const ClaimDataset& ds, double target,
                 ExpectationMode mode = ExpectationMode::annual_mixture,
                 RootOptions options = {0.0, 4000});

/// log Psi_Y(alpha) / alpha. Throws DomainError for alpha <= 0.
double exponential_premium(const ClaimDataset& ds, double alpha,
                           ExpectationMode mode = ExpectationMode::annual_mixture);

/// alpha_- solving exponential_premium(alpha) = pi_Y. Throws NoRootError when
/// pi_Y does not exceed the pure premium or the root lies past the guard.
double calibrate_alpha_minus(const ClaimDataset& ds, double pi_Y,
                             ExpectationMode mode = ExpectationMode::annual_mixture,
                             RootOptions options = {});

/// lambda such that a share `acceptance_share` of the population accepts a
/// premium `premium_multiplier` times the one priced at alpha_minus.
double calibrate_lambda(const ClaimDataset& ds, double alpha_minus, double premium_multiplier,
                        double acceptance_share,
                        ExpectationMode mode = ExpectationMode::annual_mixture,
                        RootOptions options = {});

/// Both sides of the exponential-utility purchase condition at the Laplace
/// model's alpha: index preferred iff lhs < rhs.
struct PreferenceTerms {
  double lhs = 0.0;  // E[psi(alpha | W) exp(-alpha phi(W))]
  double rhs = 0.0;  // Psi(alpha') exp(alpha (pi_Y - pi_phi))
  bool prefers_index() const noexcept { return lhs < rhs; }
};

PreferenceTerms preference_terms(const ClaimDataset& ds, const PayoutModel& mean_model,
                                 const CondLaplaceModel& lap, const PricingParams& params,
                                 ExpectationMode mode = ExpectationMode::annual_mixture);

bool prefers_index(const ClaimDataset& ds, const PayoutModel& mean_model,
                   const CondLaplaceModel& lap, const PricingParams& params,
                   ExpectationMode mode = ExpectationMode::annual_mixture);

struct EtaReport {
  double eta = 0.0;
  double sup_ratio = 0.0;   // sup_w (m_Y(alpha|w) - phi(w)) / E[Y]
  double mean_ratio = 0.0;  // E[m_Y(alpha|W) - phi(W)] / E[Y], >= 1 - beta under Jensen
  std::size_t argmax = 0;   // claim attaining the sup (size() for the no-claim atom)
};

/// Slack of the sufficient condition theta <= eta / beta. The sup runs over
/// the observed claims (plus the no-claim point in annual mode).
EtaReport eta(const ClaimDataset& ds, const PayoutModel& mean_model, const CondLaplaceModel& lap,
              double beta, double theta_Y,
              ExpectationMode mode = ExpectationMode::annual_mixture);

enum class ExtensionVariant {
  as_stated,       // printed formula with alpha := alpha0
  proof_derived,   // largest alpha with F(alpha) = (1-e^-tau) e^{alpha(pi_Y-pi_phi)} F(alpha0(1-e^-tau))
};

std::string_view to_string(ExtensionVariant v) noexcept;
/// Throws ConfigError on an unknown tag.
ExtensionVariant extension_variant_from_string(std::string_view tag);

/// Extension h_beta(tau) >= 0 of the range of aversions known to prefer the
/// index product.
double h_beta_tau(const ClaimDataset& ds, double alpha0, const PricingParams& params,
                  ExtensionVariant variant,
                  ExpectationMode mode = ExpectationMode::annual_mixture);

/// N mu((0, alpha_bound]).
double demand_count(double population, const AversionDistribution& mu, double alpha_bound);

/// Purchase-condition left side precomputed on an aversion grid, so that
/// demand can be evaluated for many (theta, tau) pairs. The left side does not
/// depend on theta or tau; the right side is recomputed on demand.
class PreferenceCurve {
 public:
  /// Fits one conditional Laplace model per grid point. The grid must be
  /// strictly increasing and positive (ConfigError otherwise).
  PreferenceCurve(const ClaimDataset& ds, const PayoutModel& mean_model,
                  std::span<const double> alpha_grid, double beta,
                  ExpectationMode mode = ExpectationMode::annual_mixture);

  std::span<const double> alphas() const noexcept { return alphas_; }
  std::span<const double> log_lhs() const noexcept { return log_lhs_; }
  double beta() const noexcept { return beta_; }
  ExpectationMode mode() const noexcept { return mode_; }
  double pure_premium() const noexcept { return pure_; }

  /// Indicator of the purchase condition at grid point i (params.beta must
  /// match the curve's beta).
  bool prefers(std::size_t i, const PricingParams& params) const;
  std::vector<bool> indicators(const PricingParams& params) const;

  /// Unconditional log Psi(alpha) of the losses the curve was built on.
  double log_psi(double alpha) const;

 private:
  std::vector<double> alphas_;
  std::vector<double> log_lhs_;
  std::vector<double> losses_;
  double claim_frequency_;
  double beta_;
  ExpectationMode mode_;
  double pure_;
};

/// N times the mu-mass of the aversions preferring the index product. Each
/// grid interval contributes its mu-mass times the mean of its endpoint
/// indicators; mass before the first point follows the first indicator and
/// mass past the last point follows the last one. The grid must cover
/// [alpha_-, alpha_- + 8 / lambda] (ConfigError otherwise).
double demand_count_direct(const PreferenceCurve& curve, double population,
                           const AversionDistribution& mu, const PricingParams& params);

/// Uniform grid on [alpha_-, alpha_- + 8 / lambda].
std::vector<double> default_alpha_grid(const AversionDistribution& mu, std::size_t points = 81);

struct ExpectedUtilities {
  double index = 0.0;      // E[U_alpha(phi(W) - Y - pi_phi)]
  double indemnity = 0.0;  // E[U_alpha((e^-tau - 1) Y - pi_Y)]
};

/// Exponential utility U(x) = -exp(-alpha x) / alpha of both contracts at the
/// Laplace model's alpha.
ExpectedUtilities expected_utility(const ClaimDataset& ds, const PayoutModel& mean_model,
                                   const CondLaplaceModel& lap, const PricingParams& params,
                                   ExpectationMode mode = ExpectationMode::annual_mixture);

}  // namespace indexins

#endif  // INDEXINS_UTILITY_HPP
