#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "indexins/claims.hpp"
#include "indexins/errors.hpp"
#include "synthetic.hpp"

using namespace indexins;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const char* kSmall =
    "Y,T,X,delta,B,Lambda\n"
    "10.5,2.0,t1,1,0.5,0.5\n"
    "3.25,0.5,t3,0,0.9,0\n"
    "\n"
    "20,4,t5,1,0.2,1.5\n"
    "7,1,t2,0,0.4,0\n";

ClaimDataset small() {
  std::istringstream in(kSmall);
  return parse_claims(in);
}

// two-pass long double reference
Summary reference(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  const long double m = s / v.size();
  long double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  Summary r;
  r.count = v.size();
  r.mean = static_cast<double>(m);
  r.sd = v.size() > 1 ? static_cast<double>(std::sqrt(ss / (v.size() - 1))) : 0.0;
  return r;
}

}  // namespace

TEST_CASE("parse a small claims file", "[claims]") {
  const ClaimDataset ds = small();
  REQUIRE(ds.size() == 4);
  CHECK(ds[0].loss == 10.5);
  CHECK(ds[1].service == ServiceType::t3);
  CHECK(ds[2].backup_activated);
  CHECK(ds[2].backup_excess == 1.5);
  CHECK(ds.claim_frequency() == 0.06);
  CHECK(ds.max_loss() == 20.0);
}

TEST_CASE("loader accepts alternate spellings", "[claims]") {
  std::istringstream in(
      "\xEF\xBB\xBF\"loss\";\"dur\";\"svc\";\"bk\";\"q\";\"ex\"\n"
      "1;1;3;true;0.5;0\n"
      "2;2;5;no;0.5;0\n");
  ColumnMap cols;
  cols.loss = "loss";
  cols.duration = "dur";
  cols.service_type = "svc";
  cols.backup_activated = "bk";
  cols.backup_quality = "q";
  cols.backup_excess = "ex";
  LoadOptions opt;
  opt.delimiter = ';';
  opt.claim_frequency = 0.1;
  const ClaimDataset ds = parse_claims(in, cols, opt);
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].service == ServiceType::t3);
  CHECK(ds[0].backup_activated);
  CHECK_FALSE(ds[1].backup_activated);
  CHECK(ds.claim_frequency() == 0.1);
}

TEST_CASE("loader errors", "[claims]") {
  SECTION("missing column names it") {
    std::istringstream in("Y,T,X,delta,B\n1,1,t1,0,0.5\n");
    try {
      parse_claims(in);
      FAIL("expected a schema error");
    } catch (const SchemaError& e) {
      CHECK(e.column() == "Lambda");
    }
  }
  SECTION("bad value reports its row") {
    std::istringstream in("Y,T,X,delta,B,Lambda\n1,1,t1,0,0.5,0\n1,abc,t1,0,0.5,0\n");
    try {
      parse_claims(in);
      FAIL("expected a row error");
    } catch (const RowError& e) {
      CHECK(e.row() == 2);
    }
  }
  SECTION("range violation reports its row") {
    std::istringstream in("Y,T,X,delta,B,Lambda\n1,1,t1,0,1.5,0\n");
    CHECK_THROWS_AS(parse_claims(in), RowError);
  }
  SECTION("Lambda above T") {
    std::istringstream in("Y,T,X,delta,B,Lambda\n1,1,t1,1,0.5,2\n");
    CHECK_THROWS_AS(parse_claims(in), RowError);
  }
  SECTION("header only") {
    std::istringstream in("Y,T,X,delta,B,Lambda\n");
    CHECK_THROWS_AS(parse_claims(in), EmptyDatasetError);
  }
  SECTION("empty stream") {
    std::istringstream in("");
    CHECK_THROWS_AS(parse_claims(in), EmptyDatasetError);
  }
  SECTION("missing file") {
    CHECK_THROWS_AS(load_claims("/nonexistent/claims.csv"), DataError);
  }
}

TEST_CASE("write then read is exact", "[claims]") {
  const ClaimDataset ds = fixtures::synthetic_claims({.claims = 300, .seed = 11});
  std::stringstream buf;
  write_claims(buf, ds);
  const ClaimDataset back = parse_claims(buf);
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back[i].loss == ds[i].loss);
    CHECK(back[i].duration == ds[i].duration);
    CHECK(back[i].service == ds[i].service);
    CHECK(back[i].backup_activated == ds[i].backup_activated);
    CHECK(back[i].backup_quality == ds[i].backup_quality);
    CHECK(back[i].backup_excess == ds[i].backup_excess);
  }
}

TEST_CASE("describe matches a two-pass reference", "[claims]") {
  const ClaimDataset ds = fixtures::synthetic_claims({.claims = 1500, .seed = 5});
  for (Stratum s : {Stratum::pooled, Stratum::backup_activated, Stratum::backup_failed}) {
    const DescriptiveStats d = describe(ds, s);
    for (Variable v : {Variable::loss, Variable::duration}) {
      std::vector<double> vals;
      for (const auto& r : ds.records()) {
        if (in_stratum(r, s)) vals.push_back(value_of(r, v));
      }
      const Summary ref = reference(vals);
      const Summary& got = d.at(v);
      CHECK(got.count == ref.count);
      CHECK_THAT(got.mean, WithinRel(ref.mean, 1e-13));
      CHECK_THAT(got.sd, WithinRel(ref.sd, 1e-12));
      CHECK(got.min == *std::min_element(vals.begin(), vals.end()));
      CHECK(got.max == *std::max_element(vals.begin(), vals.end()));
    }
  }
}

TEST_CASE("strata", "[claims]") {
  const ClaimDataset ds = small();
  CHECK(ds.select(Stratum::backup_activated).size() == 2);
  CHECK(ds.select(Stratum::backup_failed).size() == 2);
  CHECK(describe(ds, Stratum::backup_activated).count == 2);

  std::istringstream in("Y,T,X,delta,B,Lambda\n1,1,t1,0,0.5,0\n2,1,t1,0,0.5,0\n");
  const ClaimDataset none_active = parse_claims(in);
  CHECK_THROWS_AS(none_active.select(Stratum::backup_activated), EmptySelectionError);
  CHECK_THROWS_AS(describe(none_active, Stratum::backup_activated), EmptySelectionError);
}

TEST_CASE("single record statistics", "[claims]") {
  const ClaimDataset ds({ClaimRecord{5.0, 1.0, ServiceType::t1, false, 0.5, 0.0}}, 0.06);
  const Summary& y = describe(ds).at(Variable::loss);
  CHECK(y.mean == 5.0);
  CHECK(y.min == 5.0);
  CHECK(y.max == 5.0);
  CHECK(y.sd == 0.0);
}

TEST_CASE("correlation", "[claims]") {
  const ClaimDataset ds = small();
  const double r = correlation(ds, Variable::loss, Variable::duration);
  CHECK(r > 0.9);
  CHECK(r <= 1.0);
  const ClaimDataset flat({ClaimRecord{1.0, 1.0, ServiceType::t1, false, 0.5, 0.0},
                           ClaimRecord{2.0, 1.0, ServiceType::t1, false, 0.5, 0.0}},
                          0.06);
  CHECK_THROWS_AS(correlation(flat, Variable::loss, Variable::duration),
                  UndefinedCorrelationError);
}

TEST_CASE("expectation modes", "[claims]") {
  const ClaimDataset ds = small();
  const double mean_y = (10.5 + 3.25 + 20 + 7) / 4.0;
  const auto id = [](double y) { return y; };
  CHECK_THAT(expectation(ds, id, ExpectationMode::claims_only), WithinRel(mean_y, 1e-15));
  CHECK_THAT(expectation(ds, id, ExpectationMode::annual_mixture),
             WithinRel(0.06 * mean_y, 1e-15));
  const auto one = [](double) { return 1.0; };
  CHECK_THAT(annual_expectation(ds, one), WithinAbs(1.0, 1e-15));
  const auto blow = [](double y) { return y > 15 ? HUGE_VAL : y; };
  try {
    expectation(ds, blow, ExpectationMode::claims_only);
    FAIL("expected an overflow error");
  } catch (const OverflowError& e) {
    CHECK(e.record() == 2);
  }
}

TEST_CASE("dataset validation", "[claims]") {
  CHECK_THROWS_AS(ClaimDataset({}, 0.06), EmptyDatasetError);
  const ClaimRecord ok{1.0, 1.0, ServiceType::t1, false, 0.5, 0.0};
  CHECK_THROWS_AS(ClaimDataset({ok}, 0.0), DomainError);
  CHECK_THROWS_AS(ClaimDataset({ok}, 1.0), DomainError);
  ClaimRecord bad = ok;
  bad.duration = 0.0;
  CHECK_THROWS_AS(ClaimDataset({ok, bad}, 0.06), RowError);
  const ClaimDataset scaled = ClaimDataset({ok}, 0.06).with_loss_scale(0.5);
  CHECK(scaled[0].loss == 0.5);
  CHECK_THROWS_AS(ClaimDataset({ok}, 0.06).with_loss_scale(0.0), DomainError);
}
