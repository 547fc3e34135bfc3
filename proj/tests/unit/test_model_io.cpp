#include <catch_amalgamated.hpp>

#include <sstream>

#include "indexins/errors.hpp"
#include "indexins/model_io.hpp"
#include "synthetic.hpp"

using namespace indexins;

TEST_CASE("models survive a save/load round trip bit for bit", "[model_io]") {
  const ClaimDataset ds = fixtures::synthetic_claims({.claims = 600, .seed = 12});
  for (Method method : {Method::linear, Method::tree, Method::forest, Method::boosted}) {
    Hyperparameters h = Hyperparameters::defaults(method);
    if (method == Method::forest || method == Method::boosted) h.n_trees = 25;
    h.linear_service_type = true;
    const PayoutModel m = fit_conditional_mean(ds, method, h, 17);
    std::stringstream buf;
    save_model(buf, m);
    const PayoutModel back = load_model(buf);
    CHECK(back.method() == method);
    CHECK(back.seed() == 17);
    CHECK(back.training_rows() == ds.size());
    CHECK(back.hyperparameters().n_trees == h.n_trees);
    CHECK(back.hyperparameters().learning_rate == h.learning_rate);
    for (const auto& r : ds.records()) {
      const FeatureRow x = encode(IndexFeatures::of(r));
      CHECK(back.raw_prediction(x) == m.raw_prediction(x));
    }
    std::stringstream again;
    save_model(again, back);
    std::stringstream first;
    save_model(first, m);
    CHECK(again.str() == first.str());
  }
}

TEST_CASE("forest Laplace refit works from a reloaded model", "[model_io]") {
  const ClaimDataset ds = fixtures::synthetic_claims({.claims = 400, .seed = 2});
  Hyperparameters h = Hyperparameters::defaults(Method::forest);
  h.n_trees = 10;
  const PayoutModel m = fit_conditional_mean(ds, Method::forest, h, 5);
  std::stringstream buf;
  save_model(buf, m);
  const PayoutModel back = load_model(buf);
  const CondLaplaceModel a = fit_cond_laplace(ds, 0.1, m);
  const CondLaplaceModel b = fit_cond_laplace(ds, 0.1, back);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(a.psi(IndexFeatures::of(ds[i])) == b.psi(IndexFeatures::of(ds[i])));
  }
}

TEST_CASE("malformed model files", "[model_io]") {
  SECTION("wrong magic") {
    std::istringstream in("not-a-model 1\n");
    CHECK_THROWS_AS(load_model(in), DataError);
  }
  SECTION("truncated") {
    std::istringstream in("indexins-model 1\nmethod tree\nseed 1\n");
    CHECK_THROWS_AS(load_model(in), DataError);
  }
  SECTION("unknown method") {
    std::istringstream in("indexins-model 1\nmethod svm\n");
    CHECK_THROWS_AS(load_model(in), DataError);
  }
  SECTION("bad number") {
    std::istringstream in(
        "indexins-model 1\nmethod linear\nseed 1\ntraining_rows 3\nhyper n_trees=1\n"
        "linear 1 0\ncoefficients 1.0 zz\nend\n");
    CHECK_THROWS_AS(load_model(in), DataError);
  }
  SECTION("missing file") { CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), DataError); }
}
