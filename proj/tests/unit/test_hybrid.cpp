#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "indexins/errors.hpp"
#include "indexins/hybrid.hpp"
#include "synthetic.hpp"

using namespace indexins;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const ClaimDataset& data() {
  static const ClaimDataset ds = fixtures::synthetic_claims({.claims = 900, .seed = 23});
  return ds;
}

// four claims, hand-checked numbers below
DeltaModel toy() {
  DeltaModel d;
  d.beta = 0.9;
  d.alpha = 0.05;
  d.losses = {1.0, 2.0, 3.0, 4.0};
  d.phi = {0.9, 1.8, 2.7, 3.6};
  d.predicted = {0.0, 0.5, 1.0, 2.0};
  d.targets = d.predicted;
  return d;
}

}  // namespace

TEST_CASE("mode tags", "[hybrid]") {
  CHECK(hybrid_mode_from_string("tree") == HybridMode::tree);
  CHECK(hybrid_mode_from_string("xgboost") == HybridMode::boosted);
  CHECK(to_string(HybridMode::boosted) == "boosted");
  CHECK_THROWS_AS(hybrid_mode_from_string("forest"), ConfigError);
}

TEST_CASE("partition and slack on a toy sample", "[hybrid]") {
  const DeltaModel d = toy();
  const Partition p = partition(d, 0.5);
  CHECK(p.count == 2);
  CHECK(p.share == 0.5);
  CHECK(p.flagged == std::vector<bool>{true, true, false, false});
  const HybridSlack s = eta_e_theta_max(d, p, 0.4);
  CHECK(s.mean_loss_flagged == 1.5);
  CHECK_THAT(s.eta_e, WithinRel(0.1 + 0.4 - 0.5 / 0.75, 1e-14));
  CHECK_THAT(s.theta_max, WithinRel(s.eta_e / 0.9, 1e-15));

  // e = 0 removes the last term
  const HybridSlack z = eta_e_theta_max(d, partition(d, 0.0), 0.4);
  CHECK_THAT(z.eta_e, WithinRel(0.5, 1e-15));

  CHECK_THROWS_AS(eta_e_theta_max(d, partition(d, -1.0), 0.4), EmptyIndexSetError);
  CHECK_THROWS_AS(partition(d, std::nan("")), DomainError);
}

TEST_CASE("hybrid premium on a toy sample", "[hybrid]") {
  const DeltaModel d = toy();
  const auto half = hybrid_premium(d, partition(d, 0.5), 0.1, 0.4, 0.06,
                                   ExpectationMode::claims_only);
  CHECK_THAT(half.premium, WithinRel(1.4 * 3.5 * 0.5 + 1.1 * 1.35 * 0.5, 1e-14));
  CHECK_THAT(half.pi_Y, WithinRel(1.4 * 2.5, 1e-14));
  CHECK(half.exceeds_theta_max);  // theta_max < 0 here

  const auto annual = hybrid_premium(d, partition(d, 0.5), 0.1, 0.4, 0.06);
  CHECK_THAT(annual.premium, WithinRel(0.06 * half.premium, 1e-14));

  const auto none = hybrid_premium(d, partition(d, -1.0), 0.1, 0.4, 0.06,
                                   ExpectationMode::claims_only);
  CHECK_THAT(none.premium, WithinRel(none.pi_Y, 1e-14));
  CHECK(std::isnan(none.theta_max));
  CHECK_FALSE(none.exceeds_theta_max);

  const auto all = hybrid_premium(d, partition(d, 5.0), 0.1, 0.4, 0.06,
                                  ExpectationMode::claims_only);
  CHECK_THAT(all.premium, WithinRel(1.1 * 2.25, 1e-14));
  CHECK_THROWS_AS(hybrid_premium(d, partition(d, 5.0), -0.1, 0.4, 0.06), DomainError);
}

TEST_CASE("threshold helpers", "[hybrid]") {
  const DeltaModel d = toy();
  CHECK(e_for_share(d, 0.5) == 0.5);
  CHECK(e_for_share(d, 0.6) == 0.5);
  CHECK(e_for_share(d, 1.0) == 2.0);
  CHECK(e_for_share(d, 0.0) == 0.0);  // share 0.25 is the closest reachable
  CHECK_THROWS_AS(e_for_share(d, 1.5), DomainError);
  CHECK(e_max_share(d, -100.0, 0.4) == 2.0);
  CHECK(e_max_share(d, 0.5 / 0.9 - 1e-12, 0.4) == 0.0);
  CHECK_THROWS_AS(e_max_share(d, 10.0, 0.4), InfeasibleError);
}

TEST_CASE("monotonicity report", "[hybrid]") {
  const double nan = std::nan("");
  const std::vector<SweepRow> rows{{0.9, 0.0, 0.1, 0.3, 0.3},
                                   {0.9, 1.0, 0.2, 0.2, 0.25},
                                   {0.9, 2.0, 0.2, nan, nan},
                                   {0.9, 3.0, 0.4, 0.3, 0.35},
                                   {1.0, 0.0, 0.0, 0.1, 0.1}};
  const auto r = check_monotonicity(rows);
  CHECK(r.share_non_decreasing);
  CHECK(r.theta_max_non_increasing);  // NaN rows break the chain
  const std::vector<SweepRow> bad{{0.9, 0.0, 0.3, 0.3, 0.2}, {0.9, 1.0, 0.2, 0.3, 0.3}};
  const auto b = check_monotonicity(bad);
  CHECK(b.share_breaks == 1);
  CHECK(b.theta_max_breaks == 1);
}

TEST_CASE("tree-mode Delta model", "[hybrid]") {
  const DeltaModel d = fit_delta_model(data(), 0.05, 0.9, HybridMode::tree, 1);
  REQUIRE(d.size() == data().size());
  CHECK(d.jensen_violations == 0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK_THAT(d.predicted[i], WithinAbs(d.targets[i], 1e-12));
    // m_Y(alpha|w) - beta E[Y|w] >= (1 - beta) E[Y|w]
    CHECK(d.targets[i] >= (1.0 - 0.9) * d.phi[i] / 0.9 - 1e-9);
    CHECK(d.losses[i] == data()[i].loss);
  }
  // leaves share one Delta
  for (std::size_t i = 1; i < d.size(); ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      if (d.leaf[i] == d.leaf[j]) CHECK(d.predicted[i] == d.predicted[j]);
    }
  }
  // nesting of flagged sets
  const auto small = partition(d, e_for_share(d, 0.3));
  const auto big = partition(d, e_for_share(d, 0.7));
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (small.flagged[i]) CHECK(big.flagged[i]);
  }
  CHECK(small.share <= big.share);

  const std::string txt = render_tree(d, e_for_share(d, 0.5));
  CHECK(txt.rfind("root", 0) == 0);
  const auto& tree = std::get<TreeEnsemble>(d.regressor).trees.front();
  std::size_t leaf_lines = 0;
  std::istringstream in(txt);
  for (std::string line; std::getline(in, line);) leaf_lines += line.find("share=") != std::string::npos;
  CHECK(leaf_lines == tree.leaves().size());
}

TEST_CASE("boosted Delta model", "[hybrid]") {
  Hyperparameters h = Hyperparameters::defaults(Method::boosted);
  h.n_trees = 40;
  const DeltaModel a = fit_delta_model(data(), 0.05, 0.9, HybridMode::boosted, h, 5);
  const DeltaModel b = fit_delta_model(data(), 0.05, 0.9, HybridMode::boosted, h, 5);
  CHECK(a.predicted == b.predicted);
  CHECK(a.leaf.empty());
  CHECK_THROWS_AS(render_tree(a, 0.0), DomainError);
  // the regressor tracks its targets
  std::vector<double> t(a.targets), p(a.predicted);
  CHECK(pearson(t, p) > 0.5);
}

TEST_CASE("sweep keeps shares non-decreasing", "[hybrid]") {
  const std::vector<double> betas{0.8, 1.0};
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(0.25 * k);
  const auto rows = sweep_e(data(), 0.05, betas, grid, HybridMode::tree, 0.4, 1);
  CHECK(rows.size() == 42);
  CHECK(check_monotonicity(rows).share_non_decreasing);
  for (const auto& r : rows) {
    if (r.share == 0.0) CHECK(std::isnan(r.theta_max));
  }
  const std::vector<double> bad{1.0, 0.5};
  CHECK_THROWS_AS(sweep_e(data(), 0.05, betas, bad, HybridMode::tree, 0.4, 1), ConfigError);
}

TEST_CASE("algorithm on a stratum", "[hybrid]") {
  HybridConfig cfg;
  cfg.alpha = 0.05;
  cfg.stratum = Stratum::backup_activated;
  cfg.theta = 0.05;
  const auto s = run_algorithm1(data(), cfg, 1.0);
  const auto sub = data().select(Stratum::backup_activated);
  CHECK(s.claims == sub.size());
  REQUIRE(s.decisions.size() == sub.size());
  std::size_t flagged = 0;
  for (const auto& d : s.decisions) {
    CHECK(data()[d.claim].backup_activated);
    CHECK((d.label == Compensation::index) == (d.delta <= 1.0));
    flagged += d.label == Compensation::index;
  }
  CHECK_THAT(s.share, WithinAbs(static_cast<double>(flagged) / sub.size(), 1e-15));

  std::ostringstream os;
  write_decisions(os, s);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "claim,stratum,delta,label");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == sub.size());

  cfg.beta = 0.0;
  CHECK_THROWS_AS(run_algorithm1(data(), cfg, 1.0), DomainError);
  cfg.beta = 0.9;
  CHECK_THROWS_AS(run_algorithm1(data(), cfg, -1.0), DomainError);
}
