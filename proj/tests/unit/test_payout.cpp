#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "indexins/errors.hpp"
#include "indexins/payout.hpp"
#include "synthetic.hpp"

using namespace indexins;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const ClaimDataset& data() {
  static const ClaimDataset ds = fixtures::synthetic_claims({.claims = 1500, .seed = 31});
  return ds;
}

Hyperparameters small_ensemble(Method m) {
  Hyperparameters h = Hyperparameters::defaults(m);
  if (m == Method::forest || m == Method::boosted) h.n_trees = 60;
  return h;
}

}  // namespace

TEST_CASE("exact linear target", "[payout]") {
  std::vector<ClaimRecord> rs;
  for (int i = 0; i < 60; ++i) {
    ClaimRecord r;
    r.duration = 0.25 + 0.1 * i;
    r.loss = 2.0 * r.duration;
    r.backup_activated = i % 3 == 0;
    r.backup_quality = 0.1 + 0.013 * i;
    r.backup_excess = r.backup_activated ? 0.5 * r.duration : 0.0;
    rs.push_back(r);
  }
  const ClaimDataset ds(rs, 0.06);
  const PayoutModel m = fit_conditional_mean(ds, Method::linear, {}, 1);
  const auto& fit = std::get<LinearFit>(m.regressor());
  REQUIRE(fit.columns.front() == kDuration);
  CHECK_THAT(fit.coefficients[1], WithinAbs(2.0, 1e-10));
  CHECK_THAT(evaluate(m, ds).r_squared, WithinAbs(1.0, 1e-12));
}

TEST_CASE("linear coefficients follow the simulated signs", "[payout]") {
  const PayoutModel m = fit_conditional_mean(data(), Method::linear, {}, 1);
  const auto& fit = std::get<LinearFit>(m.regressor());
  // columns: T, delta, Lambda, B
  CHECK(fit.coefficients[1] > 0.0);
  CHECK(fit.coefficients[2] < 0.0);
  CHECK(fit.coefficients[4] < 0.0);
}

TEST_CASE("OLS predictions average to the sample mean", "[payout]") {
  const PayoutModel m = fit_conditional_mean(data(), Method::linear, {}, 1);
  double raw = 0.0;
  for (const auto& r : data().records()) raw += m.raw_prediction(encode(IndexFeatures::of(r)));
  const auto y = data().losses();
  CHECK_THAT(raw / data().size(), WithinRel(mean(y), 1e-10));
}

TEST_CASE("service type dummies are optional", "[payout]") {
  Hyperparameters h;
  h.linear_service_type = true;
  const PayoutModel with = fit_conditional_mean(data(), Method::linear, h, 1);
  const PayoutModel without = fit_conditional_mean(data(), Method::linear, {}, 1);
  CHECK(std::get<LinearFit>(with.regressor()).columns.size() == 8);
  CHECK(evaluate(with, data()).r_squared >= evaluate(without, data()).r_squared);
}

TEST_CASE("fit preconditions", "[payout]") {
  std::vector<ClaimRecord> rs(40, ClaimRecord{5.0, 1.0, ServiceType::t1, false, 0.5, 0.0});
  for (std::size_t i = 0; i < rs.size(); ++i) rs[i].duration = 1.0 + i;
  CHECK_THROWS_AS(fit_conditional_mean(ClaimDataset(rs, 0.06), Method::tree,
                                       Hyperparameters::defaults(Method::tree), 1),
                  DegenerateFitError);
  rs.resize(10);
  rs[0].loss = 1.0;
  CHECK_THROWS_AS(fit_conditional_mean(ClaimDataset(rs, 0.06), Method::linear, {}, 1),
                  DegenerateFitError);

  Hyperparameters bad = Hyperparameters::defaults(Method::boosted);
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(fit_conditional_mean(data(), Method::boosted, bad, 1), ConfigError);
  bad = Hyperparameters::defaults(Method::forest);
  bad.n_trees = 0;
  CHECK_THROWS_AS(fit_conditional_mean(data(), Method::forest, bad, 1), ConfigError);
  bad = Hyperparameters::defaults(Method::tree);
  bad.max_depth = 0;
  CHECK_THROWS_AS(fit_conditional_mean(data(), Method::tree, bad, 1), ConfigError);
  CHECK_THROWS_AS(method_from_string("svm"), ConfigError);
}

TEST_CASE("unfitted model", "[payout]") {
  const PayoutModel m;
  CHECK_FALSE(m.fitted());
  CHECK_THROWS_AS(predict_phi(m, IndexFeatures{}, 0.9), StateError);
  CHECK_THROWS_AS(evaluate(m, data()), StateError);
}

TEST_CASE("payout is linear in beta and non-negative", "[payout]") {
  for (Method method : {Method::linear, Method::tree, Method::boosted}) {
    const PayoutModel m = fit_conditional_mean(data(), method, small_ensemble(method), 5);
    for (std::size_t i = 0; i < 50; ++i) {
      const IndexFeatures w = IndexFeatures::of(data()[i]);
      const double one = predict_phi(m, w, 1.0);
      CHECK(one >= 0.0);
      CHECK_THAT(predict_phi(m, w, 0.9), WithinRel(0.9 * one, 1e-15));
    }
    CHECK_THROWS_AS(predict_phi(m, IndexFeatures{}, 0.0), DomainError);
    CHECK_THROWS_AS(predict_phi(m, IndexFeatures{}, 1.5), DomainError);
  }
}

TEST_CASE("negative linear predictions are clamped", "[payout]") {
  const PayoutModel m = fit_conditional_mean(data(), Method::linear, {}, 1);
  IndexFeatures w;
  w.duration = 0.01;
  w.backup_activated = true;
  w.backup_quality = 0.99;
  w.backup_excess = 0.01;
  FeatureRow x = encode(w);
  x[kBackupExcess] = 1e6;  // far outside the sample, drives the raw value down
  REQUIRE(m.raw_prediction(x) < 0.0);
  CHECK(m.conditional_mean(x) == 0.0);
  CHECK(predict_phi(m, x, 0.7) == 0.0);
}

TEST_CASE("metrics definitions", "[payout]") {
  const std::vector<double> y{1.0, 2.0, 4.0, 8.0};
  const auto perfect = metrics(y, y);
  CHECK(perfect.rmse == 0.0);
  CHECK(perfect.mae == 0.0);
  CHECK(perfect.r_squared == 1.0);
  CHECK_THAT(perfect.correlation, WithinAbs(1.0, 1e-15));
  const std::vector<double> flat(4, 3.75);
  const auto c = metrics(flat, y);
  CHECK_THAT(c.r_squared, WithinAbs(0.0, 1e-15));
  CHECK(std::isnan(c.correlation));
}

TEST_CASE("ensembles beat the single models on R2", "[payout]") {
  const double lin = evaluate(fit_conditional_mean(data(), Method::linear, {}, 1), data()).r_squared;
  const double tree = evaluate(fit_conditional_mean(data(), Method::tree,
                                                    Hyperparameters::defaults(Method::tree), 1),
                               data()).r_squared;
  const double forest =
      evaluate(fit_conditional_mean(data(), Method::forest, small_ensemble(Method::forest), 1),
               data()).r_squared;
  const double boosted =
      evaluate(fit_conditional_mean(data(), Method::boosted, small_ensemble(Method::boosted), 1),
               data()).r_squared;
  CHECK(boosted > tree);
  CHECK(forest > tree);
  CHECK(boosted > lin);
  CHECK(forest > lin);
}

TEST_CASE("fits are reproducible", "[payout]") {
  for (Method method : {Method::forest, Method::boosted}) {
    const PayoutModel a = fit_conditional_mean(data(), method, small_ensemble(method), 99);
    const PayoutModel b = fit_conditional_mean(data(), method, small_ensemble(method), 99);
    const PayoutModel c = fit_conditional_mean(data(), method, small_ensemble(method), 100);
    bool differs = false;
    for (std::size_t i = 0; i < data().size(); ++i) {
      const FeatureRow x = encode(IndexFeatures::of(data()[i]));
      CHECK(a.raw_prediction(x) == b.raw_prediction(x));
      differs = differs || a.raw_prediction(x) != c.raw_prediction(x);
    }
    CHECK(differs);
  }
}

TEST_CASE("conditional Laplace transform", "[payout][laplace]") {
  const ClaimDataset& ds = data();
  const PayoutModel tree = fit_conditional_mean(ds, Method::tree,
                                                Hyperparameters::defaults(Method::tree), 3);

  SECTION("tree leaves hold the leaf mean of exp(alpha Y)") {
    const double alpha = 0.05;
    const CondLaplaceModel lap = fit_cond_laplace(ds, alpha, tree);
    CHECK(lap.shared_partition());
    const auto& t = std::get<TreeEnsemble>(tree.regressor()).trees.front();
    std::map<int, std::pair<double, int>> acc;
    for (const auto& r : ds.records()) {
      auto& a = acc[t.leaf_of(encode(IndexFeatures::of(r)))];
      a.first += std::exp(alpha * r.loss);
      ++a.second;
    }
    for (const auto& [leaf, a] : acc) {
      const auto& node = std::get<TreeEnsemble>(lap.regressor()).trees.front().nodes()[leaf];
      CHECK_THAT(node.value, WithinRel(a.first / a.second, 1e-12));
    }
  }

  SECTION("leaf-wise Jensen holds exactly for shared partitions") {
    for (double alpha : {0.001, 0.05, 0.2}) {
      const CondLaplaceModel lap = fit_cond_laplace(ds, alpha, tree);
      CHECK(lap.jensen_violations() == 0);
      for (const auto& r : ds.records()) {
        const FeatureRow x = encode(IndexFeatures::of(r));
        CHECK(lap.exponential_premium(x) >= tree.conditional_mean(x) - 1e-12);
      }
    }
    const PayoutModel forest =
        fit_conditional_mean(ds, Method::forest, small_ensemble(Method::forest), 3);
    CHECK(fit_cond_laplace(ds, 0.1, forest).jensen_violations() == 0);
  }

  SECTION("alpha near zero gives psi near one") {
    for (Method method : {Method::linear, Method::tree, Method::boosted}) {
      const CondLaplaceModel lap =
          fit_cond_laplace(ds, 1e-9, method, small_ensemble(method), 3);
      for (std::size_t i = 0; i < 20; ++i) {
        CHECK_THAT(lap.psi(IndexFeatures::of(ds[i])), WithinAbs(1.0, 1e-6));
      }
    }
  }

  SECTION("overflow guard") {
    const double guard = alpha_guard(ds);
    CHECK_THAT(guard * ds.max_loss(), WithinRel(700.0, 1e-15));
    try {
      fit_cond_laplace(ds, 2.0 * guard, tree);
      FAIL("expected an alpha-too-large error");
    } catch (const AlphaTooLargeError& e) {
      CHECK(e.max_admissible() == guard);
    }
  }

  SECTION("psi stays positive for linear fits") {
    const CondLaplaceModel lap = fit_cond_laplace(ds, 0.3, Method::linear, {}, 1);
    for (const auto& r : ds.records()) CHECK(lap.psi(IndexFeatures::of(r)) > 0.0);
  }
}

TEST_CASE("overcompensation bound", "[payout][chernoff]") {
  const ClaimDataset& ds = data();
  const PayoutModel tree = fit_conditional_mean(ds, Method::tree,
                                                Hyperparameters::defaults(Method::tree), 3);
  std::vector<CondLaplaceModel> family;
  for (double rho : {0.01, 0.05, 0.1, 0.3}) family.push_back(fit_cond_laplace(ds, rho, tree));
  const IndexFeatures w = IndexFeatures::of(ds[0]);

  SECTION("beta = 1 is vacuous") {
    const auto b = overcompensation_bound(family, tree, w, 1.0);
    CHECK(b.raw >= 1.0);
    CHECK(b.bound == 1.0);
  }
  SECTION("singleton grid") {
    const std::span<const CondLaplaceModel> one(family.data() + 1, 1);
    const auto b = overcompensation_bound(one, tree, w, 0.9);
    const double expect = family[1].psi(w) * std::exp(-0.05 * 0.1 * tree.conditional_mean(w));
    CHECK_THAT(b.raw, WithinRel(expect, 1e-14));
    CHECK(b.rho == 0.05);
  }
  SECTION("empty grid") {
    CHECK_THROWS_AS(overcompensation_bound({}, tree, w, 0.9), ConfigError);
  }
  SECTION("bound covers the empirical leaf rate") {
    const auto& t = std::get<TreeEnsemble>(tree.regressor()).trees.front();
    std::map<int, std::pair<int, int>> rate;  // leaf -> (overcompensated, claims)
    std::map<int, std::size_t> rep;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const FeatureRow x = encode(IndexFeatures::of(ds[i]));
      const int leaf = t.leaf_of(x);
      auto& r = rate[leaf];
      r.first += ds[i].loss < 0.9 * tree.conditional_mean(x);
      ++r.second;
      rep.emplace(leaf, i);
    }
    for (const auto& [leaf, r] : rate) {
      const auto b = overcompensation_bound(family, tree, IndexFeatures::of(ds[rep[leaf]]), 0.9);
      CHECK(static_cast<double>(r.first) / r.second <= b.bound);
    }
  }
}
