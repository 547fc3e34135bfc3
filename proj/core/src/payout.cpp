#include "indexins/payout.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "indexins/errors.hpp"
#include "indexins/numerics.hpp"
#include "indexins/random.hpp"

namespace indexins {

namespace {

constexpr std::uint64_t kForestStream = 0x666f72657374ULL;
constexpr std::uint64_t kBoostStream = 0x626f6f7374ULL;

std::vector<std::size_t> linear_columns(bool service_type) {
  std::vector<std::size_t> cols{kDuration, kBackupActivated, kBackupExcess, kBackupQuality};
  if (service_type) {
    for (std::size_t c = kServiceT2; c <= kServiceT5; ++c) cols.push_back(c);
  }
  return cols;
}

LinearFit fit_linear(const DesignMatrix& x, std::span<const double> y, bool service_type) {
  LinearFit fit;
  fit.columns = linear_columns(service_type);
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto k = static_cast<Eigen::Index>(fit.columns.size());
  fit.coefficients.assign(fit.columns.size() + 1, 0.0);

  // columns constant over the sample are aliased with the intercept; they keep 0
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < fit.columns.size(); ++j) {
    const auto col = x.column(fit.columns[j]);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    if (*lo != *hi) active.push_back(j);
  }
  (void)k;

  Eigen::MatrixXd a(n, static_cast<Eigen::Index>(active.size()) + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  for (std::size_t j = 0; j < active.size(); ++j) {
    const auto col = x.column(fit.columns[active[j]]);
    for (Eigen::Index i = 0; i < n; ++i) {
      a(i, static_cast<Eigen::Index>(j) + 1) = col[static_cast<std::size_t>(i)];
    }
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::VectorXd beta = qr.solve(b);
  fit.coefficients[0] = beta(0);
  for (std::size_t j = 0; j < active.size(); ++j) {
    fit.coefficients[active[j] + 1] = beta(static_cast<Eigen::Index>(j) + 1);
  }
  for (double c : fit.coefficients) {
    if (!std::isfinite(c)) throw DegenerateFitError("least squares produced a non-finite coefficient");
  }
  return fit;
}

TreeParams tree_params(const Hyperparameters& h) {
  TreeParams p;
  p.max_depth = h.max_depth;
  p.min_samples_leaf = h.min_samples_leaf;
  p.min_samples_split = 2 * h.min_samples_leaf;
  p.features_per_split = h.features_per_split;
  return p;
}

std::vector<std::uint32_t> all_rows(std::size_t n) {
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  return rows;
}

TreeEnsemble fit_single_tree(const PresortedDesign& design, std::span<const double> y,
                             const Hyperparameters& h, std::uint64_t seed) {
  Rng rng(seed);
  const auto rows = all_rows(design.matrix().rows());
  TreeEnsemble e;
  e.trees.push_back(grow_tree(design, y, rows, tree_params(h), rng));
  return e;
}

TreeEnsemble fit_forest(const PresortedDesign& design, std::span<const double> y,
                        const Hyperparameters& h, std::uint64_t seed) {
  const std::size_t n = design.matrix().rows();
  TreeEnsemble e;
  e.weight = 1.0 / static_cast<double>(h.n_trees);
  e.trees.reserve(h.n_trees);
  e.sample_keys.reserve(h.n_trees);
  const auto params = tree_params(h);
  for (std::size_t t = 0; t < h.n_trees; ++t) {
    const std::uint64_t key = stream_key(seed ^ kForestStream, t);
    const auto rows = bootstrap_rows(n, key);
    // feature draws come from a sibling stream so the row sample can be
    // regenerated from the key alone
    Rng rng(key, 1);
    e.trees.push_back(grow_tree(design, y, rows, params, rng));
    e.sample_keys.push_back(key);
  }
  return e;
}

TreeEnsemble fit_boosted(const PresortedDesign& design, std::span<const double> y,
                         const Hyperparameters& h, std::uint64_t seed) {
  const DesignMatrix& x = design.matrix();
  const std::size_t n = x.rows();
  TreeEnsemble e;
  e.base = mean(y);
  std::vector<double> fitted(n, e.base);
  std::vector<double> residual(n);
  const auto params = tree_params(h);
  const auto k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(h.subsample * static_cast<double>(n))));
  std::vector<std::uint32_t> perm = all_rows(n);
  e.trees.reserve(h.n_trees);
  for (std::size_t t = 0; t < h.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - fitted[i];
    Rng rng(seed ^ kBoostStream, t);
    std::vector<std::uint32_t> rows;
    if (k >= n) {
      rows = all_rows(n);
    } else {
      std::iota(perm.begin(), perm.end(), 0u);
      for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(perm[i], perm[j]);
      }
      rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(rows.begin(), rows.end());
    }
    RegressionTree tree = grow_tree(design, residual, rows, params, rng).scaled(h.learning_rate);
    for (std::size_t i = 0; i < n; ++i) fitted[i] += tree.predict(x.row(i));
    e.trees.push_back(std::move(tree));
  }
  return e;
}

double clamp_positive(double v) noexcept {
  if (!(v > 0.0)) return std::numeric_limits<double>::min();
  return v;
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::linear: return "linear";
    case Method::tree: return "tree";
    case Method::forest: return "forest";
    case Method::boosted: return "boosted";
  }
  return "?";
}

Method method_from_string(std::string_view tag) {
  if (tag == "linear") return Method::linear;
  if (tag == "tree") return Method::tree;
  if (tag == "forest") return Method::forest;
  if (tag == "boosted" || tag == "xgboost") return Method::boosted;
  throw ConfigError("unknown model method '" + std::string(tag) +
                    "' (expected linear, tree, forest or boosted)");
}

Hyperparameters Hyperparameters::defaults(Method m) {
  Hyperparameters h;
  switch (m) {
    case Method::linear:
      break;
    case Method::tree:
      h.max_depth = 4;
      h.min_samples_leaf = 50;
      break;
    case Method::forest:
      h.n_trees = 300;
      h.max_depth = 12;
      h.min_samples_leaf = 5;
      h.features_per_split = 2;
      break;
    case Method::boosted:
      h.n_trees = 300;
      h.max_depth = 4;
      h.learning_rate = 0.1;
      h.subsample = 0.8;
      h.min_samples_leaf = 5;
      break;
  }
  return h;
}

void Hyperparameters::validate(Method m) const {
  if (m == Method::linear) return;
  if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (m == Method::tree && n_trees != 1) throw ConfigError("a single tree has n_trees = 1");
  if (max_depth < 1 || max_depth > 64) throw ConfigError("max_depth must lie in [1, 64]");
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  if (features_per_split > kFeatureCount) {
    throw ConfigError("features_per_split must be <= " + std::to_string(kFeatureCount));
  }
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw ConfigError("learning_rate must lie in (0, 1]");
  }
  if (!(subsample > 0.0 && subsample <= 1.0)) throw ConfigError("subsample must lie in (0, 1]");
}

double predict(const Regressor& f, const FeatureRow& x) noexcept {
  if (const auto* lin = std::get_if<LinearFit>(&f)) {
    double v = lin->coefficients[0];
    for (std::size_t j = 0; j < lin->columns.size(); ++j) {
      v += lin->coefficients[j + 1] * x[lin->columns[j]];
    }
    return v;
  }
  const auto& e = std::get<TreeEnsemble>(f);
  double s = 0.0;
  for (const auto& t : e.trees) s += t.predict(x);
  return e.base + e.weight * s;
}

std::vector<std::uint32_t> bootstrap_rows(std::size_t n, std::uint64_t key) {
  Rng rng(key);
  std::vector<std::uint32_t> rows(n);
  for (auto& r : rows) r = static_cast<std::uint32_t>(rng.below(n));
  std::sort(rows.begin(), rows.end());
  return rows;
}

Regressor fit_regressor(const PresortedDesign& design, std::span<const double> target,
                        Method method, const Hyperparameters& hyper, std::uint64_t seed) {
  hyper.validate(method);
  if (target.size() != design.matrix().rows()) {
    throw DomainError("target length does not match the design matrix");
  }
  switch (method) {
    case Method::linear:
      return fit_linear(design.matrix(), target, hyper.linear_service_type);
    case Method::tree:
      return fit_single_tree(design, target, hyper, seed);
    case Method::forest:
      return fit_forest(design, target, hyper, seed);
    case Method::boosted:
      return fit_boosted(design, target, hyper, seed);
  }
  throw ConfigError("unknown model method");
}

PayoutModel::PayoutModel(Method method, Hyperparameters hyper, std::uint64_t seed,
                         Regressor regressor, std::size_t training_rows)
    : fitted_(true),
      method_(method),
      hyper_(hyper),
      seed_(seed),
      regressor_(std::move(regressor)),
      training_rows_(training_rows) {}

const Regressor& PayoutModel::regressor() const {
  if (!fitted_) throw StateError("payout model has not been fitted");
  return regressor_;
}

double PayoutModel::raw_prediction(const FeatureRow& x) const {
  return predict(regressor(), x);
}

double PayoutModel::conditional_mean(const FeatureRow& x) const {
  return std::max(0.0, raw_prediction(x));
}

PayoutModel fit_conditional_mean(const ClaimDataset& ds, Method method,
                                 const Hyperparameters& hyper, std::uint64_t seed) {
  hyper.validate(method);
  if (ds.size() < 30) {
    throw DegenerateFitError("at least 30 claims are needed to fit a payout model, got " +
                             std::to_string(ds.size()));
  }
  const auto y = ds.losses();
  if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); })) {
    throw DegenerateFitError("every loss is equal; E[Y|W] is not identifiable");
  }
  const DesignMatrix x(ds);
  const PresortedDesign design(x);
  return PayoutModel(method, hyper, seed, fit_regressor(design, y, method, hyper, seed), ds.size());
}

double predict_phi(const PayoutModel& model, const FeatureRow& x, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  return beta * model.conditional_mean(x);
}

double predict_phi(const PayoutModel& model, const IndexFeatures& w, double beta) {
  return predict_phi(model, encode(w), beta);
}

std::vector<double> payouts(const PayoutModel& model, const ClaimDataset& ds, double beta) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& r : ds.records()) out.push_back(predict_phi(model, IndexFeatures::of(r), beta));
  return out;
}

ModelMetrics metrics(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw DomainError("metrics need two non-empty samples of equal length");
  }
  const auto n = static_cast<double>(actual.size());
  const double ybar = mean(actual);
  CompensatedSum sse, sae, sst;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = predicted[i] - actual[i];
    sse.add(e * e);
    sae.add(std::abs(e));
    sst.add((actual[i] - ybar) * (actual[i] - ybar));
  }
  ModelMetrics m;
  m.rmse = std::sqrt(sse.value() / n);
  m.mae = sae.value() / n;
  m.r_squared = sst.value() > 0.0 ? 1.0 - sse.value() / sst.value()
                                  : std::numeric_limits<double>::quiet_NaN();
  try {
    m.correlation = pearson(predicted, actual);
  } catch (const UndefinedCorrelationError&) {
    m.correlation = std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

ModelMetrics evaluate(const PayoutModel& model, const ClaimDataset& ds) {
  std::vector<double> pred;
  pred.reserve(ds.size());
  for (const auto& r : ds.records()) pred.push_back(model.raw_prediction(encode(IndexFeatures::of(r))));
  const auto y = ds.losses();
  return metrics(pred, y);
}

double alpha_guard(const ClaimDataset& ds) noexcept {
  if (ds.max_loss() <= 0.0) return std::numeric_limits<double>::infinity();
  return kExpArgumentGuard / ds.max_loss();
}

void check_alpha(const ClaimDataset& ds, double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("risk aversion must be >= 0");
  const double guard = alpha_guard(ds);
  if (alpha > guard) throw AlphaTooLargeError(alpha, guard);
}

CondLaplaceModel::CondLaplaceModel(double alpha, Method method, Regressor regressor,
                                   bool shared_partition, std::size_t jensen_violations)
    : alpha_(alpha),
      method_(method),
      regressor_(std::move(regressor)),
      shared_partition_(shared_partition),
      jensen_violations_(jensen_violations) {}

double CondLaplaceModel::psi(const FeatureRow& x) const noexcept {
  return clamp_positive(predict(regressor_, x));
}

double CondLaplaceModel::exponential_premium(const FeatureRow& x) const noexcept {
  return std::log(psi(x)) / alpha_;
}

CondLaplaceModel fit_cond_laplace(const ClaimDataset& ds, double alpha,
                                  const PayoutModel& mean_model) {
  if (!(alpha > 0.0)) throw DomainError("risk aversion must be > 0");
  check_alpha(ds, alpha);
  const Regressor& mean_fit = mean_model.regressor();
  if (mean_model.training_rows() != ds.size()) {
    throw DomainError("conditional-mean model was fitted on a different sample");
  }
  const DesignMatrix x(ds);
  std::vector<double> z;
  z.reserve(ds.size());
  for (const auto& r : ds.records()) z.push_back(std::exp(alpha * r.loss));

  Regressor lap;
  bool shared = false;
  const Method method = mean_model.method();
  if (method == Method::tree || method == Method::forest) {
    const auto& e = std::get<TreeEnsemble>(mean_fit);
    TreeEnsemble out;
    out.base = e.base;
    out.weight = e.weight;
    out.sample_keys = e.sample_keys;
    out.trees.reserve(e.trees.size());
    for (std::size_t t = 0; t < e.trees.size(); ++t) {
      const auto rows = method == Method::forest ? bootstrap_rows(ds.size(), e.sample_keys[t])
                                                 : all_rows(ds.size());
      out.trees.push_back(refit_leaves(e.trees[t], x, z, rows));
    }
    lap = std::move(out);
    shared = true;
  } else {
    const PresortedDesign design(x);
    lap = fit_regressor(design, z, method, mean_model.hyperparameters(), mean_model.seed());
  }

  std::size_t violations = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = x.row(i);
    const double m = std::log(clamp_positive(predict(lap, row))) / alpha;
    const double mu = predict(mean_fit, row);
    if (m < mu - 1e-9 * std::max(1.0, std::abs(mu))) ++violations;
  }
  return CondLaplaceModel(alpha, method, std::move(lap), shared, violations);
}

CondLaplaceModel fit_cond_laplace(const ClaimDataset& ds, double alpha, Method method,
                                  const Hyperparameters& hyper, std::uint64_t seed) {
  return fit_cond_laplace(ds, alpha, fit_conditional_mean(ds, method, hyper, seed));
}

OvercompensationBound overcompensation_bound(std::span<const CondLaplaceModel> family,
                                             const PayoutModel& mean_model,
                                             const IndexFeatures& w, double beta) {
  if (family.empty()) throw ConfigError("overcompensation bound needs a non-empty rho grid");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  const FeatureRow x = encode(w);
  const double mu = mean_model.conditional_mean(x);
  OvercompensationBound best;
  best.raw = std::numeric_limits<double>::infinity();
  for (const auto& lap : family) {
    const double rho = lap.alpha();
    if (!(rho > 0.0)) throw ConfigError("rho grid must be positive");
    // log domain keeps psi * exp(-...) finite for large rho
    const double v = std::exp(std::log(lap.psi(x)) - rho * (1.0 - beta) * mu);
    if (v < best.raw) {
      best.raw = v;
      best.rho = rho;
    }
  }
  best.bound = std::min(best.raw, 1.0);
  return best;
}

}  // namespace indexins
