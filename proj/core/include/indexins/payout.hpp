#ifndef INDEXINS_PAYOUT_HPP
#define INDEXINS_PAYOUT_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "indexins/claims.hpp"
#include "indexins/features.hpp"
#include "indexins/regression_tree.hpp"

namespace indexins {

enum class Method { linear, tree, forest, boosted };

std::string_view to_string(Method m) noexcept;
/// Throws ConfigError on an unknown tag.
Method method_from_string(std::string_view tag);

struct Hyperparameters {
  std::size_t n_trees = 1;
  int max_depth = 4;
  double learning_rate = 0.1;
  double subsample = 1.0;
  std::size_t features_per_split = 0;  // 0 = all columns
  std::size_t min_samples_leaf = 5;
  // Linear model only: add t2..t5 indicators (t1 is the reference level).
  bool linear_service_type = false;

  static Hyperparameters defaults(Method m);
  /// Throws ConfigError when a value is outside its documented range.
  void validate(Method m) const;
};

/// Ordinary least squares on an intercept plus the listed encoded columns.
struct LinearFit {
  std::vector<std::size_t> columns;
  std::vector<double> coefficients;  // intercept first, then one per column
};

/// prediction = base + weight * sum_t tree_t(x)
struct TreeEnsemble {
  double base = 0.0;
  double weight = 1.0;
  std::vector<RegressionTree> trees;
  // Per-tree key of the row sample (forest bootstrap); empty otherwise.
  std::vector<std::uint64_t> sample_keys;
};

using Regressor = std::variant<LinearFit, TreeEnsemble>;

double predict(const Regressor& f, const FeatureRow& x) noexcept;

/// Fits `method` on an arbitrary per-row target. Deterministic given seed.
Regressor fit_regressor(const PresortedDesign& design, std::span<const double> target,
                        Method method, const Hyperparameters& hyper, std::uint64_t seed);

/// Rows drawn with replacement for forest tree `tree` (reproducible).
std::vector<std::uint32_t> bootstrap_rows(std::size_t n, std::uint64_t key);

/// Fitted estimator of w -> E[Y | W = w]; immutable once fitted.
class PayoutModel {
 public:
  PayoutModel() = default;  // unfitted
  PayoutModel(Method method, Hyperparameters hyper, std::uint64_t seed, Regressor regressor,
              std::size_t training_rows);

  bool fitted() const noexcept { return fitted_; }
  Method method() const noexcept { return method_; }
  const Hyperparameters& hyperparameters() const noexcept { return hyper_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t training_rows() const noexcept { return training_rows_; }
  /// Throws StateError when unfitted.
  const Regressor& regressor() const;

  /// Unclamped prediction.
  double raw_prediction(const FeatureRow& x) const;
  /// Prediction clamped below at 0.
  double conditional_mean(const FeatureRow& x) const;
  double conditional_mean(const IndexFeatures& w) const { return conditional_mean(encode(w)); }

 private:
  bool fitted_ = false;
  Method method_ = Method::linear;
  Hyperparameters hyper_{};
  std::uint64_t seed_ = 0;
  Regressor regressor_{};
  std::size_t training_rows_ = 0;
};

/// Requires >= 30 records and a non-constant loss (DegenerateFitError).
PayoutModel fit_conditional_mean(const ClaimDataset& ds, Method method,
                                 const Hyperparameters& hyper, std::uint64_t seed);

/// Index payout beta * E[Y | W = w], with negative predictions clamped to 0
/// before scaling. beta in (0, 1].
double predict_phi(const PayoutModel& model, const IndexFeatures& w, double beta);
double predict_phi(const PayoutModel& model, const FeatureRow& x, double beta);

/// Payouts of every record of `ds`, in record order.
std::vector<double> payouts(const PayoutModel& model, const ClaimDataset& ds, double beta);

struct ModelMetrics {
  double rmse = 0.0;
  double r_squared = 0.0;
  double mae = 0.0;
  double correlation = 0.0;  // NaN when a side is constant
};

ModelMetrics metrics(std::span<const double> predicted, std::span<const double> actual);

/// In-sample metrics of the unclamped predictions.
ModelMetrics evaluate(const PayoutModel& model, const ClaimDataset& ds);

/// Bound used to reject risk aversions for which exp(alpha * Y) would
/// overflow: alpha * max(Y) <= 700.
inline constexpr double kExpArgumentGuard = 700.0;
double alpha_guard(const ClaimDataset& ds) noexcept;
/// Throws DomainError for alpha < 0 and AlphaTooLargeError above the guard.
void check_alpha(const ClaimDataset& ds, double alpha);

/// Estimate of psi_Y(alpha | w) = E[exp(alpha Y) | W = w], obtained by
/// regressing exp(alpha Y) on W.
///
/// Tree and forest estimators reuse the partition of the conditional-mean
/// model they were derived from, so each leaf holds the empirical Laplace
/// transform of its own sample. Linear and boosted estimators are refitted
/// on the transformed target and may break Jensen's inequality pointwise;
/// jensen_violations() counts the training rows where they do.
class CondLaplaceModel {
 public:
  CondLaplaceModel(double alpha, Method method, Regressor regressor, bool shared_partition,
                   std::size_t jensen_violations);

  double alpha() const noexcept { return alpha_; }
  Method method() const noexcept { return method_; }
  bool shared_partition() const noexcept { return shared_partition_; }
  std::size_t jensen_violations() const noexcept { return jensen_violations_; }
  const Regressor& regressor() const noexcept { return regressor_; }

  /// Prediction clamped to stay strictly positive.
  double psi(const FeatureRow& x) const noexcept;
  double psi(const IndexFeatures& w) const noexcept { return psi(encode(w)); }

  /// Conditional exponential premium m_Y(alpha | w) = log psi / alpha.
  double exponential_premium(const FeatureRow& x) const noexcept;
  double exponential_premium(const IndexFeatures& w) const noexcept {
    return exponential_premium(encode(w));
  }

 private:
  double alpha_;
  Method method_;
  Regressor regressor_;
  bool shared_partition_;
  std::size_t jensen_violations_;
};

/// `mean_model` must have been fitted on `ds`.
CondLaplaceModel fit_cond_laplace(const ClaimDataset& ds, double alpha,
                                  const PayoutModel& mean_model);

/// Fits the conditional-mean model first when the method shares its partition.
CondLaplaceModel fit_cond_laplace(const ClaimDataset& ds, double alpha, Method method,
                                  const Hyperparameters& hyper, std::uint64_t seed);

struct OvercompensationBound {
  double raw = 0.0;    // min over the grid, before clamping
  double bound = 0.0;  // min(raw, 1)
  double rho = 0.0;    // grid point attaining the minimum
};

/// Chernoff-type bound min_rho psi(rho|w) exp(-rho (1 - beta) E[Y|W=w]) on
/// the probability of overcompensating a claim with covariates w. Each family
/// member supplies one rho. Throws ConfigError for an empty family.
OvercompensationBound overcompensation_bound(std::span<const CondLaplaceModel> family,
                                             const PayoutModel& mean_model,
                                             const IndexFeatures& w, double beta);

}  // namespace indexins

#endif  // INDEXINS_PAYOUT_HPP
