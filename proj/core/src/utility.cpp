#include "indexins/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "indexins/errors.hpp"

namespace indexins {

namespace {

double annual_mean_loss(const ClaimDataset& ds, ExpectationMode mode) {
  return expectation(ds, [](double y) { return y; }, mode);
}

// log E[exp(t)] where claim i contributes t_i; annual mode adds the no-claim
// point with t = 0
double log_mean_exp(std::span<const double> t, double p, ExpectationMode mode) {
  double top = *std::max_element(t.begin(), t.end());
  if (mode == ExpectationMode::annual_mixture) top = std::max(top, 0.0);
  CompensatedSum s;
  for (double v : t) s.add(std::exp(v - top));
  const double claims = s.value() / static_cast<double>(t.size());
  if (mode == ExpectationMode::claims_only) return top + std::log(claims);
  return top + std::log((1.0 - p) * std::exp(-top) + p * claims);
}

// log Psi(alpha) computed through expm1 so that small alpha keeps precision
double log_psi_of(std::span<const double> losses, double p, double alpha, ExpectationMode mode) {
  if (alpha == 0.0) return 0.0;
  CompensatedSum s;
  for (double y : losses) s.add(std::expm1(alpha * y));
  double m = s.value() / static_cast<double>(losses.size());
  if (mode == ExpectationMode::annual_mixture) m *= p;
  return std::log1p(m);
}

}  // namespace

AversionDistribution::AversionDistribution(double alpha_minus, double lambda)
    : alpha_minus_(alpha_minus), lambda_(lambda) {
  if (!(alpha_minus > 0.0) || !std::isfinite(alpha_minus)) {
    throw DomainError("aversion shift alpha_- must be > 0");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("aversion rate lambda must be > 0");
}

double AversionDistribution::cdf(double x) const noexcept {
  if (x <= alpha_minus_) return 0.0;
  return -std::expm1(-lambda_ * (x - alpha_minus_));
}

double AversionDistribution::survival(double x) const noexcept {
  if (x <= alpha_minus_) return 1.0;
  return std::exp(-lambda_ * (x - alpha_minus_));
}

double AversionDistribution::density(double x) const noexcept {
  if (x < alpha_minus_) return 0.0;
  return lambda_ * std::exp(-lambda_ * (x - alpha_minus_));
}

AversionDistribution AversionDistribution::with_mean_shift(double mean_alpha) const {
  return AversionDistribution(mean_alpha - 1.0 / lambda_, lambda_);
}

AversionDistribution AversionDistribution::with_mean_rate(double mean_alpha) const {
  if (!(mean_alpha > alpha_minus_)) throw DomainError("mean aversion must exceed alpha_-");
  return AversionDistribution(alpha_minus_, 1.0 / (mean_alpha - alpha_minus_));
}

void PricingParams::validate() const {
  if (!(theta_Y > 0.0)) throw DomainError("theta_Y must be > 0");
  if (!(theta >= 0.0)) throw DomainError("theta must be >= 0");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  if (!(tau >= 0.0)) throw DomainError("tau must be >= 0");
}

Prices prices(const ClaimDataset& ds, const PricingParams& params, ExpectationMode mode) {
  params.validate();
  Prices p;
  p.pure = annual_mean_loss(ds, mode);
  p.pi_Y = (1.0 + params.theta_Y) * p.pure;
  p.pi_phi = (1.0 + params.theta) * params.beta * p.pure;
  return p;
}

double laplace_psi(const ClaimDataset& ds, double alpha, ExpectationMode mode) {
  check_alpha(ds, alpha);
  return expectation(ds, [alpha](double y) { return std::exp(alpha * y); }, mode);
}

double laplace_F(const ClaimDataset& ds, double alpha, ExpectationMode mode) {
  check_alpha(ds, alpha);
  return expectation(ds, [alpha](double y) { return y * std::exp(alpha * y); }, mode);
}

double F_inverse(const ClaimDataset& ds, double target, ExpectationMode mode,
                 RootOptions options) {
  const double f0 = laplace_F(ds, 0.0, mode);
  if (!(target >= f0)) {
    throw DomainError("F^-1: target " + std::to_string(target) + " is below F(0) = " +
                      std::to_string(f0));
  }
  if (target == f0) return 0.0;
  const double guard = alpha_guard(ds);
  if (!std::isfinite(guard)) throw DomainError("F^-1: F is constant on an all-zero sample");
  const double fmax = laplace_F(ds, guard, mode);
  if (target > fmax) {
    throw DomainError("F^-1: target exceeds F at the overflow guard alpha = " +
                      std::to_string(guard));
  }
  return find_root_bracketed([&](double a) { return laplace_F(ds, a, mode) - target; }, 0.0,
                             guard, options);
}

double exponential_premium(const ClaimDataset& ds, double alpha, ExpectationMode mode) {
  if (!(alpha > 0.0)) throw DomainError("exponential premium needs alpha > 0");
  check_alpha(ds, alpha);
  const auto y = ds.losses();
  return log_psi_of(y, ds.claim_frequency(), alpha, mode) / alpha;
}

double calibrate_alpha_minus(const ClaimDataset& ds, double pi_Y, ExpectationMode mode,
                             RootOptions options) {
  const double pure = annual_mean_loss(ds, mode);
  if (!(pi_Y > pure)) {
    throw NoRootError("premium " + std::to_string(pi_Y) +
                      " does not exceed the pure premium " + std::to_string(pure));
  }
  const double guard = alpha_guard(ds);
  if (!std::isfinite(guard)) throw NoRootError("all losses are zero");
  const auto f = [&](double a) { return exponential_premium(ds, a, mode) - pi_Y; };
  if (f(guard) < 0.0) {
    throw NoRootError("premium " + std::to_string(pi_Y) +
                      " is not reached below the overflow guard alpha = " +
                      std::to_string(guard));
  }
  // premium(alpha) -> pure as alpha -> 0, so a tiny positive alpha brackets
  const double lo = guard * 1e-12;
  if (f(lo) >= 0.0) return lo;
  return find_root_bracketed(f, lo, guard, options);
}

double calibrate_lambda(const ClaimDataset& ds, double alpha_minus, double premium_multiplier,
                        double acceptance_share, ExpectationMode mode, RootOptions options) {
  if (!(premium_multiplier > 1.0)) throw DomainError("premium multiplier must exceed 1");
  if (!(acceptance_share > 0.0 && acceptance_share < 1.0)) {
    throw DomainError("acceptance share must lie in (0, 1)");
  }
  const double pi = exponential_premium(ds, alpha_minus, mode);
  const double alpha_star = calibrate_alpha_minus(ds, premium_multiplier * pi, mode, options);
  if (!(alpha_star > alpha_minus)) {
    throw InfeasibleError("raised premium is matched at alpha* = " + std::to_string(alpha_star) +
                          " <= alpha_- = " + std::to_string(alpha_minus));
  }
  return -std::log(acceptance_share) / (alpha_star - alpha_minus);
}

PreferenceTerms preference_terms(const ClaimDataset& ds, const PayoutModel& mean_model,
                                 const CondLaplaceModel& lap, const PricingParams& params,
                                 ExpectationMode mode) {
  const double alpha = lap.alpha();
  check_alpha(ds, alpha);
  const Prices pr = prices(ds, params, mode);
  std::vector<double> t;
  t.reserve(ds.size());
  for (const auto& r : ds.records()) {
    const FeatureRow x = encode(IndexFeatures::of(r));
    t.push_back(std::log(lap.psi(x)) - alpha * predict_phi(mean_model, x, params.beta));
  }
  const auto y = ds.losses();
  const double a_prime = -std::expm1(-params.tau) * alpha;
  PreferenceTerms out;
  out.lhs = std::exp(log_mean_exp(t, ds.claim_frequency(), mode));
  out.rhs = std::exp(log_psi_of(y, ds.claim_frequency(), a_prime, mode) +
                     alpha * (pr.pi_Y - pr.pi_phi));
  return out;
}

bool prefers_index(const ClaimDataset& ds, const PayoutModel& mean_model,
                   const CondLaplaceModel& lap, const PricingParams& params,
                   ExpectationMode mode) {
  return preference_terms(ds, mean_model, lap, params, mode).prefers_index();
}

EtaReport eta(const ClaimDataset& ds, const PayoutModel& mean_model, const CondLaplaceModel& lap,
              double beta, double theta_Y, ExpectationMode mode) {
  const double ey = annual_mean_loss(ds, mode);
  if (!(ey > 0.0)) throw DomainError("eta needs E[Y] > 0");
  EtaReport rep;
  double sup = -std::numeric_limits<double>::infinity();
  CompensatedSum total;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const FeatureRow x = encode(IndexFeatures::of(ds[i]));
    const double d = lap.exponential_premium(x) - predict_phi(mean_model, x, beta);
    total.add(d);
    if (d > sup) {
      sup = d;
      rep.argmax = i;
    }
  }
  if (mode == ExpectationMode::annual_mixture && sup < 0.0) {
    sup = 0.0;
    rep.argmax = ds.size();
  }
  double mean_d = total.value() / static_cast<double>(ds.size());
  if (mode == ExpectationMode::annual_mixture) mean_d *= ds.claim_frequency();
  rep.sup_ratio = sup / ey;
  rep.mean_ratio = mean_d / ey;
  rep.eta = 1.0 - beta + theta_Y - rep.sup_ratio;
  return rep;
}

std::string_view to_string(ExtensionVariant v) noexcept {
  return v == ExtensionVariant::as_stated ? "as-stated" : "proof-derived";
}

ExtensionVariant extension_variant_from_string(std::string_view tag) {
  if (tag == "as-stated" || tag == "as_stated") return ExtensionVariant::as_stated;
  if (tag == "proof-derived" || tag == "proof_derived") return ExtensionVariant::proof_derived;
  throw ConfigError("unknown extension variant '" + std::string(tag) +
                    "' (expected as-stated or proof-derived)");
}

double h_beta_tau(const ClaimDataset& ds, double alpha0, const PricingParams& params,
                  ExtensionVariant variant, ExpectationMode mode) {
  if (!(alpha0 > 0.0)) throw DomainError("alpha0 must be > 0");
  check_alpha(ds, alpha0);
  const Prices pr = prices(ds, params, mode);
  const double gap = pr.pi_Y - pr.pi_phi;

  if (variant == ExtensionVariant::as_stated) {
    const double target =
        laplace_F(ds, alpha0, mode) * std::exp(-params.tau) * std::exp(-alpha0 * gap);
    if (target <= laplace_F(ds, 0.0, mode)) return 0.0;
    return std::max(0.0, F_inverse(ds, target, mode) - alpha0);
  }

  const double c = -std::expm1(-params.tau);
  if (c <= 0.0) return 0.0;
  const double log_k = std::log(c) + std::log(laplace_F(ds, alpha0 * c, mode));
  const auto g = [&](double a) { return std::log(laplace_F(ds, a, mode)) - log_k - a * gap; };
  const double guard = alpha_guard(ds);
  if (!std::isfinite(guard)) return 0.0;
  if (g(guard) <= 0.0) return std::max(0.0, guard - alpha0);  // crossing past the guard
  constexpr int kScan = 512;
  double hi = guard;
  for (int k = kScan - 1; k >= 0; --k) {
    const double lo = guard * k / kScan;
    if (g(lo) <= 0.0) {
      const double root = find_root_bracketed(g, lo, hi, RootOptions{0.0, 4000});
      return std::max(0.0, root - alpha0);
    }
    hi = lo;
  }
  return 0.0;
}

double demand_count(double population, const AversionDistribution& mu, double alpha_bound) {
  if (!(population >= 1.0)) throw DomainError("population size must be >= 1");
  return population * mu.cdf(alpha_bound);
}

PreferenceCurve::PreferenceCurve(const ClaimDataset& ds, const PayoutModel& mean_model,
                                 std::span<const double> alpha_grid, double beta,
                                 ExpectationMode mode)
    : alphas_(alpha_grid.begin(), alpha_grid.end()),
      losses_(ds.losses()),
      claim_frequency_(ds.claim_frequency()),
      beta_(beta),
      mode_(mode),
      pure_(annual_mean_loss(ds, mode)) {
  if (alphas_.empty()) throw ConfigError("aversion grid is empty");
  for (std::size_t i = 0; i < alphas_.size(); ++i) {
    if (!(alphas_[i] > 0.0)) throw ConfigError("aversion grid must be positive");
    if (i > 0 && !(alphas_[i] > alphas_[i - 1])) {
      throw ConfigError("aversion grid must be strictly increasing");
    }
  }
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  check_alpha(ds, alphas_.back());

  const DesignMatrix x(ds);
  std::vector<double> phi(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) phi[i] = predict_phi(mean_model, x.row(i), beta);

  log_lhs_.reserve(alphas_.size());
  std::vector<double> t(ds.size());
  for (double a : alphas_) {
    const CondLaplaceModel lap = fit_cond_laplace(ds, a, mean_model);
    for (std::size_t i = 0; i < ds.size(); ++i) t[i] = std::log(lap.psi(x.row(i))) - a * phi[i];
    log_lhs_.push_back(log_mean_exp(t, claim_frequency_, mode_));
  }
}

double PreferenceCurve::log_psi(double alpha) const {
  return log_psi_of(losses_, claim_frequency_, alpha, mode_);
}

bool PreferenceCurve::prefers(std::size_t i, const PricingParams& params) const {
  params.validate();
  if (std::abs(params.beta - beta_) > 1e-12) {
    throw DomainError("pricing beta differs from the preference curve's beta");
  }
  const double a = alphas_.at(i);
  const double pi_Y = (1.0 + params.theta_Y) * pure_;
  const double pi_phi = (1.0 + params.theta) * params.beta * pure_;
  const double a_prime = -std::expm1(-params.tau) * a;
  return log_lhs_[i] < log_psi(a_prime) + a * (pi_Y - pi_phi);
}

std::vector<bool> PreferenceCurve::indicators(const PricingParams& params) const {
  std::vector<bool> out(alphas_.size());
  for (std::size_t i = 0; i < alphas_.size(); ++i) out[i] = prefers(i, params);
  return out;
}

double demand_count_direct(const PreferenceCurve& curve, double population,
                           const AversionDistribution& mu, const PricingParams& params) {
  if (!(population >= 1.0)) throw DomainError("population size must be >= 1");
  const auto a = curve.alphas();
  const double lo = mu.alpha_minus();
  const double hi = mu.alpha_minus() + 8.0 / mu.lambda();
  const double slack = 1e-12 * hi;
  if (a.front() > lo + slack || a.back() < hi - slack) {
    throw ConfigError("aversion grid must cover [alpha_-, alpha_- + 8/lambda] = [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  const auto ind = curve.indicators(params);
  const auto v = [&](std::size_t k) { return ind[k] ? 1.0 : 0.0; };
  CompensatedSum mass;
  mass.add(mu.cdf(a.front()) * v(0));
  for (std::size_t k = 0; k + 1 < a.size(); ++k) {
    mass.add((mu.cdf(a[k + 1]) - mu.cdf(a[k])) * 0.5 * (v(k) + v(k + 1)));
  }
  mass.add(mu.survival(a.back()) * v(a.size() - 1));
  return population * std::clamp(mass.value(), 0.0, 1.0);
}

std::vector<double> default_alpha_grid(const AversionDistribution& mu, std::size_t points) {
  if (points < 2) throw ConfigError("aversion grid needs at least two points");
  const double lo = mu.alpha_minus();
  const double hi = lo + 8.0 / mu.lambda();
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  g.back() = hi;
  return g;
}

ExpectedUtilities expected_utility(const ClaimDataset& ds, const PayoutModel& mean_model,
                                   const CondLaplaceModel& lap, const PricingParams& params,
                                   ExpectationMode mode) {
  const PreferenceTerms t = preference_terms(ds, mean_model, lap, params, mode);
  const Prices pr = prices(ds, params, mode);
  const double a = lap.alpha();
  ExpectedUtilities u;
  u.index = -t.lhs * std::exp(a * pr.pi_phi) / a;
  u.indemnity = -t.rhs * std::exp(a * pr.pi_phi) / a;
  return u;
}

}  // namespace indexins
