#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "indexins/errors.hpp"
#include "indexins/model_io.hpp"

#ifndef INDEXINS_VERSION
#define INDEXINS_VERSION "unknown"
#endif

namespace indexins::app {

namespace fs = std::filesystem;

namespace {

constexpr Method kMethods[] = {Method::linear, Method::tree, Method::forest, Method::boosted};

std::string cell(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}
std::string cell(std::int64_t v) { return std::to_string(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "true" : "false"; }
std::string cell(std::string_view v) { return std::string(v); }
std::string cell(const std::string& v) { return v; }
std::string cell(const char* v) { return v; }
std::string cell(const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : ""; }

// one command invocation: output directory, written files, manifest
class Run {
 public:
  Run(std::string_view command, const ScenarioConfig& cfg) : command_(command), cfg_(cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + cfg.out_dir.string());
  }

  fs::path path(const std::string& name) {
    files_.push_back(name);
    const fs::path p = cfg_.out_dir / name;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
  }

  void text(const std::string& name, const std::string& body) {
    std::ofstream out(path(name), std::ios::binary);
    out << body;
    if (!out) throw DataError("cannot write " + name);
  }

  void dataset(const ClaimDataset& ds) { records_ = ds.size(); }

  void finish(nlohmann::json extra = nlohmann::json::object()) {
    nlohmann::json m;
    m["tool"] = "indexins";
    m["version"] = INDEXINS_VERSION;
    m["command"] = command_;
    m["seed"] = cfg_.seed;
    m["dataset"] = {{"path", cfg_.dataset.generic_string()}, {"records", records_}};
    m["config"] = cfg_.raw;
    std::vector<std::string> files = files_;
    std::sort(files.begin(), files.end());
    m["outputs"] = files;
    m["results"] = std::move(extra);
    std::ofstream out(cfg_.out_dir / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
    if (!out) throw DataError("cannot write manifest.json");
  }

 private:
  std::string command_;
  const ScenarioConfig& cfg_;
  std::vector<std::string> files_;
  std::size_t records_ = 0;
};

class Csv {
 public:
  Csv(Run& run, const std::string& name, std::initializer_list<std::string_view> header)
      : out_(run.path(name), std::ios::binary), name_(name) {
    bool first = true;
    for (auto h : header) {
      out_ << (first ? "" : ",") << h;
      first = false;
    }
    out_ << '\n';
  }
  ~Csv() = default;

  template <class... T>
  void row(const T&... v) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(v), first = false), ...);
    out_ << '\n';
    if (!out_) throw DataError("cannot write " + name_);
  }

 private:
  std::ofstream out_;
  std::string name_;
};

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

std::optional<std::int64_t> try_n_acc(const PortfolioMoments& m, double theta,
                                      const SolvencyParams& sp) {
  try {
    return n_min_accumulation(m, theta, sp);
  } catch (const InfeasibleError&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------- describe

int cmd_describe(const ScenarioConfig& cfg, std::ostream& log) {
  Run run("describe", cfg);
  const ClaimDataset ds = load_dataset(cfg);
  run.dataset(ds);
  log << "loaded " << ds.size() << " claims from " << cfg.dataset.string() << "\n\n";

  Csv table(run, "describe.csv", {"stratum", "variable", "count", "mean", "min", "max", "sd"});
  Csv corr(run, "correlations.csv", {"stratum", "pair", "correlation"});
  nlohmann::json res = nlohmann::json::object();
  log << std::left << std::setw(8) << "stratum" << std::setw(4) << "var" << std::right
      << std::setw(8) << "n" << std::setw(12) << "mean" << std::setw(12) << "min"
      << std::setw(12) << "max" << std::setw(12) << "sd" << '\n';
  for (Stratum s : cfg.describe_strata) {
    const DescriptiveStats d = describe(ds, s);
    for (const auto& v : d.variables) {
      table.row(to_string(s), to_string(v.variable), v.stats.count, v.stats.mean, v.stats.min,
                v.stats.max, v.stats.sd);
    }
    for (Variable v : {Variable::loss, Variable::duration}) {
      const Summary& st = d.at(v);
      log << std::left << std::setw(8) << to_string(s) << std::setw(4)
          << (v == Variable::loss ? "Y" : "T") << std::right << std::setw(8) << st.count
          << std::fixed << std::setprecision(3) << std::setw(12) << st.mean << std::setw(12)
          << st.min << std::setw(12) << st.max << std::setw(12) << st.sd << '\n'
          << std::defaultfloat;
    }
    double r = nan();
    try {
      r = correlation(ds, Variable::loss, Variable::duration, s);
    } catch (const UndefinedCorrelationError&) {
    }
    corr.row(to_string(s), "Y,T", r);
    res[std::string(to_string(s))] = {{"count", d.count}, {"corr_Y_T", r}};
  }
  run.finish(res);
  return kExitOk;
}

// --------------------------------------------------------------------- fit

int cmd_fit(const ScenarioConfig& cfg, std::ostream& log) {
  Run run("fit", cfg);
  const ClaimDataset ds = load_dataset(cfg);
  run.dataset(ds);
  Csv metrics_csv(run, "metrics.csv", {"method", "rmse", "r_squared", "mae", "correlation"});
  nlohmann::json res = nlohmann::json::object();
  log << std::left << std::setw(10) << "model" << std::right << std::setw(10) << "RMSE"
      << std::setw(10) << "R2" << std::setw(10) << "MAE" << std::setw(10) << "corr" << '\n';
  for (Method m : kMethods) {
    const PayoutModel model = fit_conditional_mean(ds, m, hyper_for(cfg, m), cfg.seed);
    const ModelMetrics mm = evaluate(model, ds);
    metrics_csv.row(to_string(m), mm.rmse, mm.r_squared, mm.mae, mm.correlation);
    save_model(run.path("models/" + std::string(to_string(m)) + ".model"), model);
    log << std::left << std::setw(10) << to_string(m) << std::right << std::fixed
        << std::setprecision(3) << std::setw(10) << mm.rmse << std::setw(10) << mm.r_squared
        << std::setw(10) << mm.mae << std::setw(10) << mm.correlation << '\n'
        << std::defaultfloat;
    res[std::string(to_string(m))] = {{"r_squared", mm.r_squared}, {"correlation", mm.correlation}};
    if (m == Method::linear) {
      Csv coef(run, "linear_coefficients.csv", {"term", "coefficient"});
      const auto& fit = std::get<LinearFit>(model.regressor());
      coef.row("intercept", fit.coefficients[0]);
      for (std::size_t j = 0; j < fit.columns.size(); ++j) {
        coef.row(feature_name(fit.columns[j]), fit.coefficients[j + 1]);
      }
    }
  }
  run.finish(res);
  return kExitOk;
}

// --------------------------------------------------------------- calibrate

int cmd_calibrate(const ScenarioConfig& cfg, std::ostream& log) {
  Run run("calibrate", cfg);
  const ClaimDataset ds = load_dataset(cfg);
  run.dataset(ds);
  const Calibration cal = calibrate(ds, cfg);
  log << "E[Y] = " << cal.pure << ", pi_Y = " << cal.pi_Y << '\n'
      << "alpha_- = " << cal.alpha_minus << ", lambda = " << cal.lambda << '\n';

  nlohmann::json sc;
  sc["expectation"] = std::string(to_string(cfg.expectation));
  sc["loss_scale"] = cfg.loss_scale;
  sc["claim_frequency"] = cfg.load.claim_frequency;
  sc["theta_Y"] = cfg.pricing.theta_Y;
  sc["pure_premium"] = cal.pure;
  sc["pi_Y"] = cal.pi_Y;
  sc["alpha_minus"] = cal.alpha_minus;
  sc["alpha_star"] = cal.alpha_star;
  sc["lambda"] = cal.lambda;
  sc["premium_increase"] = cfg.premium_increase;
  sc["acceptance_share"] = cfg.acceptance_share;
  sc["mean_aversion"] = cal.alpha_minus + 1.0 / cal.lambda;
  run.text("scenario.json", sc.dump(2) + "\n");

  // exponential premium against alpha, up to twice the raised-premium aversion
  Csv curve(run, "premium_curve.csv", {"alpha", "exponential_premium"});
  const double top = std::min(alpha_guard(ds), 2.0 * std::max(cal.alpha_star, cal.alpha_minus));
  for (int k = 1; k <= 100; ++k) {
    const double a = top * k / 100.0;
    curve.row(a, exponential_premium(ds, a, cfg.expectation));
  }
  run.finish(sc);
  return kExitOk;
}

// ------------------------------------------------------------------ demand

int cmd_demand(const ScenarioConfig& cfg, std::ostream& log) {
  Run run("demand", cfg);
  const ClaimDataset ds = load_dataset(cfg);
  run.dataset(ds);
  const Calibration cal = calibrate(ds, cfg);
  const AversionDistribution mu = cal.mu();
  const double beta = cfg.pricing.beta;
  const double theta = cfg.pricing.theta;
  nlohmann::json res = nlohmann::json::object();

  // n vs tau, per payout model
  {
    Csv out(run, "demand_tau.csv",
            {"method", "tau", "theta", "n", "n_min_gaussian", "n_min_accumulation"});
    for (Method m : kMethods) {
      const PayoutModel model = payout_model(ds, cfg, m);
      const DemandCurve dc(ds, model, mu, beta, cfg.expectation, cfg.alpha_points);
      const PortfolioMoments pm = portfolio_moments(ds, model, beta, cfg.expectation);
      const std::int64_t ng = theta > 0.0 ? n_min_gaussian(pm, theta, cfg.solvency.eps) : 0;
      const auto na = theta > 0.0 ? try_n_acc(pm, theta, cfg.solvency) : std::nullopt;
      for (double tau : cfg.tau_grid) {
        out.row(to_string(m), tau, theta,
                dc.demand(cfg.population, mu, theta, tau, cfg.pricing.theta_Y), ng, na);
      }
      log << "demand vs tau: " << to_string(m) << " done\n";
    }
  }

  const PayoutModel model = payout_model(ds, cfg, cfg.method);
  const PortfolioMoments pm = portfolio_moments(ds, model, beta, cfg.expectation);

  // n vs mean aversion: alpha_- fixed, lambda rescaled
  {
    double widest = 1.0;
    for (double k : cfg.alpha_bar_grid) widest = std::max(widest, k);
    const DemandCurve dc(ds, model, mu, beta, cfg.expectation, 2 * cfg.alpha_points, widest);
    Csv out(run, "demand_alpha_bar.csv",
            {"alpha_bar", "lambda", "n", "n_min_gaussian", "n_min_accumulation"});
    const std::int64_t ng = theta > 0.0 ? n_min_gaussian(pm, theta, cfg.solvency.eps) : 0;
    const auto na = theta > 0.0 ? try_n_acc(pm, theta, cfg.solvency) : std::nullopt;
    for (double k : cfg.alpha_bar_grid) {
      const AversionDistribution m2 = mu.with_mean_rate(mu.alpha_minus() + k / mu.lambda());
      out.row(m2.mean(), m2.lambda(),
              dc.demand(cfg.population, m2, theta, cfg.pricing.tau, cfg.pricing.theta_Y), ng, na);
    }
  }

  // n vs theta for a few delays
  const DemandCurve dc(ds, model, mu, beta, cfg.expectation, cfg.alpha_points);
  {
    Csv out(run, "demand_theta.csv",
            {"tau", "theta", "n", "n_min_gaussian", "n_min_accumulation"});
    for (double tau : cfg.theta_taus) {
      for (double t : cfg.theta_grid) {
        out.row(tau, t, dc.demand(cfg.population, mu, t, tau, cfg.pricing.theta_Y),
                n_min_gaussian(pm, t, cfg.solvency.eps), try_n_acc(pm, t, cfg.solvency));
      }
    }
  }

  // expected utility against aversion
  {
    std::vector<double> grid = cfg.utility_alpha_grid;
    if (grid.empty()) {
      const double hi = mu.alpha_minus() + 8.0 / mu.lambda();
      for (int k = 1; k <= 20; ++k) grid.push_back(hi * k / 20.0);
    }
    Csv out(run, "utility_alpha.csv", {"alpha", "index", "indemnity", "prefers_index"});
    for (double a : grid) {
      const CondLaplaceModel lap = fit_cond_laplace(ds, a, model);
      const ExpectedUtilities u = expected_utility(ds, model, lap, cfg.pricing, cfg.expectation);
      out.row(a, u.index, u.indemnity, u.index > u.indemnity);
    }
  }
  res["method"] = std::string(to_string(cfg.method));
  res["demand_at_config"] =
      dc.demand(cfg.population, mu, theta, cfg.pricing.tau, cfg.pricing.theta_Y);
  run.finish(res);
  return kExitOk;
}

// ---------------------------------------------------------------- solvency

int cmd_solvency(const ScenarioConfig& cfg, std::ostream& log) {
  Run run("solvency", cfg);
  const ClaimDataset ds = load_dataset(cfg);
  run.dataset(ds);
  const Calibration cal = calibrate(ds, cfg);
  const AversionDistribution mu = cal.mu();
  const PayoutModel model = payout_model(ds, cfg, cfg.method);
  const DemandCurve dc(ds, model, mu, cfg.pricing.beta, cfg.expectation, cfg.alpha_points);
  const SolvencyStudy st = solvency_study(ds, model, cfg, cal, dc);

  {
    Csv out(run, "solvency_curve.csv",
            {"theta", "demand", "n_min_gaussian", "n_min_accumulation", "a_max", "a_in_window"});
    for (const auto& r : st.curve) {
      out.row(r.theta, r.demand, r.n_gauss, r.n_acc, r.a_max, r.n_acc.has_value());
    }
  }
  {
    Csv out(run, "theta_min.csv", {"regime", "feasible", "theta_min", "demand", "threshold",
                                   "closest_theta", "closest_gap"});
    for (const auto& [name, r] : {std::pair{"gaussian", st.gaussian},
                                  std::pair{"accumulation", st.accumulation}}) {
      out.row(name, r.feasible, r.feasible ? r.theta : nan(), r.feasible ? r.demand : nan(),
              r.feasible ? r.threshold : nan(), r.closest_theta, r.closest_gap);
      log << "theta_min (" << name << "): "
          << (r.feasible ? cell(r.theta) + ", demand " + cell(r.demand) : "not reached on the grid")
          << '\n';
    }
  }
  // sufficient-condition checks at the least averse policyholder
  {
    Csv out(run, "feasibility.csv",
            {"proposition", "alpha0", "eta", "rhs", "rhs_gaussian", "rhs_accumulation", "feasible",
             "theta_low", "theta_high", "alpha_bound", "demand_mass"});
    const CondLaplaceModel lap = fit_cond_laplace(ds, cal.alpha_minus, model);
    const auto emit = [&](const char* name, const auto& call) {
      try {
        const FeasibilityReport r = call();
        out.row(name, cal.alpha_minus, r.eta, r.rhs, r.rhs_gaussian, r.rhs_accumulation,
                r.feasible, r.theta_low, r.theta_high, r.alpha_bound, r.demand_mass);
      } catch (const DegenerateDemandError&) {
        // no mass below alpha0 + h: the inequality is void, eta is still informative
        const double e = eta(ds, model, lap, cfg.pricing.beta, cfg.pricing.theta_Y, cfg.expectation).eta;
        out.row(name, cal.alpha_minus, e, nan(), nan(), nan(), false, nan(), e / cfg.pricing.beta,
                nan(), 0.0);
      }
    };
    emit("prop2", [&] {
      return check_prop2(ds, model, lap, cfg.pricing, cfg.population, mu, cfg.solvency.eps,
                         cfg.extension, cfg.expectation);
    });
    emit("prop3", [&] {
      return check_prop3(ds, model, lap, cfg.pricing, cfg.population, mu, cfg.solvency,
                         cfg.extension, cfg.expectation);
    });
  }
  nlohmann::json res;
  res["theta_min_gaussian"] = st.gaussian.feasible ? st.gaussian.theta : nan();
  res["theta_min_accumulation"] = st.accumulation.feasible ? st.accumulation.theta : nan();
  run.finish(res);
  return st.gaussian.feasible ? kExitOk : kExitInfeasible;
}

// ------------------------------------------------------------------ hybrid

int cmd_hybrid(const ScenarioConfig& cfg, std::ostream& log) {
  Run run("hybrid", cfg);
  const ClaimDataset ds = load_dataset(cfg);
  run.dataset(ds);
  const double alpha = cfg.hybrid_alpha > 0.0 ? cfg.hybrid_alpha : calibrate(ds, cfg).alpha_minus;
  log << "hybrid design at alpha = " << alpha << '\n';

  Csv sweep(run, "hybrid_sweep.csv",
            {"mode", "stratum", "beta", "e", "share", "eta_e", "theta_max"});
  Csv mono(run, "hybrid_monotonicity.csv",
           {"mode", "stratum", "share_breaks", "theta_max_breaks"});
  Csv summary(run, "hybrid_summary.csv",
              {"mode", "stratum", "alpha", "beta", "theta", "target_share", "e_star", "share",
               "eta_e", "theta_max", "premium", "pi_Y", "exceeds_theta_max"});
  nlohmann::json res = nlohmann::json::array();
  for (HybridMode mode : cfg.hybrid_modes) {
    for (Stratum s : cfg.hybrid_strata) {
      const ClaimDataset sub = ds.select(s);
      const std::vector<double> grid = hybrid_e_grid(sub, cfg, alpha, mode);
      const auto rows = sweep_e(sub, alpha, cfg.betas, grid, mode, cfg.pricing.theta_Y, cfg.seed);
      for (const auto& r : rows) {
        sweep.row(to_string(mode), to_string(s), r.beta, r.e, r.share, r.eta_e, r.theta_max);
      }
      const MonotonicityReport mr = check_monotonicity(rows);
      mono.row(to_string(mode), to_string(s), mr.share_breaks, mr.theta_max_breaks);

      const HybridRun hr = hybrid_run(ds, cfg, alpha, mode, s);
      const HybridSummary& h = hr.summary;
      summary.row(to_string(mode), to_string(s), alpha, cfg.hybrid_beta, cfg.hybrid_theta,
                  hr.target_share < 0.0 ? nan() : hr.target_share, h.e, h.share, h.eta_e,
                  h.theta_max, h.premium.premium, h.premium.pi_Y, h.premium.exceeds_theta_max);
      const std::string tag = std::string(to_string(mode)) + "_" + std::string(to_string(s));
      {
        std::ofstream out(run.path("decisions_" + tag + ".csv"), std::ios::binary);
        write_decisions(out, h);
      }
      if (mode == HybridMode::tree) run.text("tree_" + tag + ".txt", render_tree(hr.delta, h.e));
      log << tag << ": e* = " << h.e << ", p_e = " << h.share << ", theta_max = " << h.theta_max
          << ", pi_h = " << h.premium.premium << " (pi_Y = " << h.premium.pi_Y << ")\n";
      res.push_back({{"mode", std::string(to_string(mode))},
                     {"stratum", std::string(to_string(s))},
                     {"e_star", h.e},
                     {"share", h.share},
                     {"theta_max", h.theta_max}});
    }
  }
  run.finish({{"alpha", alpha}, {"runs", res}});
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const ScenarioConfig& cfg, std::ostream& log) {
  Run run("simulate", cfg);
  const ClaimDataset ds = load_dataset(cfg);
  run.dataset(ds);
  const PayoutModel model = payout_model(ds, cfg, cfg.method);
  const double beta = cfg.pricing.beta;
  // the simulation draws policy-years, so the analytic count uses annual moments
  const PortfolioMoments pm = portfolio_moments(ds, model, beta, ExpectationMode::annual_mixture);

  RuinScenario sc;
  sc.theta = cfg.sim_theta;
  sc.beta = beta;
  sc.claim_probability = cfg.load.claim_frequency;
  sc.trials = cfg.sim_trials;
  sc.seed = cfg.seed;
  std::string source = "config";
  std::int64_t analytic = 0;
  if (cfg.sim_accumulation) {
    sc.accumulation = cfg.solvency.tail();
    analytic = n_min_accumulation(pm, cfg.sim_theta, cfg.solvency);
  } else {
    analytic = n_min_gaussian(pm, cfg.sim_theta, cfg.solvency.eps);
  }
  sc.n = cfg.sim_n > 0 ? cfg.sim_n : analytic;
  if (cfg.sim_n == 0) source = cfg.sim_accumulation ? "n_min_accumulation" : "n_min_gaussian";

  const RuinEstimate e = simulate_ruin(ds, model, sc);
  Csv out(run, "ruin.csv", {"regime", "n", "n_source", "analytic_n", "theta", "trials", "ruined",
                            "probability", "ci_low", "ci_high", "half_width", "eps",
                            "within_eps_plus_3hw"});
  const bool ok = e.probability <= cfg.solvency.eps + 3.0 * e.half_width();
  out.row(cfg.sim_accumulation ? "accumulation" : "gaussian", sc.n, source, analytic, sc.theta,
          e.trials, e.ruined, e.probability, e.ci_low, e.ci_high, e.half_width(),
          cfg.solvency.eps, ok);
  log << "n = " << sc.n << " (" << source << "), ruin = " << e.probability << " ["
      << e.ci_low << ", " << e.ci_high << "] over " << e.trials << " trials\n";
  run.finish({{"n", sc.n}, {"probability", e.probability}, {"half_width", e.half_width()}});
  return kExitOk;
}

}  // namespace

ClaimDataset load_dataset(const ScenarioConfig& cfg) {
  ClaimDataset ds = load_claims(cfg.dataset, cfg.columns, cfg.load);
  return cfg.loss_scale == 1.0 ? ds : ds.with_loss_scale(cfg.loss_scale);
}

Calibration calibrate(const ClaimDataset& ds, const ScenarioConfig& cfg) {
  Calibration c;
  c.pure = prices(ds, cfg.pricing, cfg.expectation).pure;
  c.pi_Y = (1.0 + cfg.pricing.theta_Y) * c.pure;
  c.from_config = cfg.alpha_minus > 0.0 && cfg.lambda > 0.0;
  c.alpha_minus =
      cfg.alpha_minus > 0.0 ? cfg.alpha_minus : calibrate_alpha_minus(ds, c.pi_Y, cfg.expectation);
  if (cfg.lambda > 0.0) {
    c.lambda = cfg.lambda;
  } else {
    c.lambda = calibrate_lambda(ds, c.alpha_minus, cfg.premium_increase, cfg.acceptance_share,
                                cfg.expectation);
    c.alpha_star = c.alpha_minus - std::log(cfg.acceptance_share) / c.lambda;
  }
  return c;
}

PayoutModel payout_model(const ClaimDataset& ds, const ScenarioConfig& cfg, Method method) {
  if (!cfg.model_path.empty()) {
    PayoutModel m = load_model(cfg.model_path);
    if (m.method() == method) {
      if (m.training_rows() != ds.size()) {
        throw DataError("model " + cfg.model_path.string() + " was fitted on " +
                        std::to_string(m.training_rows()) + " rows, dataset has " +
                        std::to_string(ds.size()));
      }
      return m;
    }
  }
  return fit_conditional_mean(ds, method, hyper_for(cfg, method), cfg.seed);
}

DemandCurve::DemandCurve(const ClaimDataset& ds, const PayoutModel& model,
                         const AversionDistribution& mu, double beta, ExpectationMode mode,
                         std::size_t points, double span_factor)
    : beta_(beta) {
  const double lo = mu.alpha_minus();
  const double hi = std::min(lo + span_factor * 8.0 / mu.lambda(), alpha_guard(ds));
  std::vector<double> grid(std::max<std::size_t>(points, 2));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
  }
  grid.back() = hi;
  curve_ = std::make_shared<PreferenceCurve>(ds, model, grid, beta, mode);
}

double DemandCurve::demand(double population, const AversionDistribution& mu, double theta,
                           double tau, double theta_Y) const {
  return demand_count_direct(*curve_, population, mu, {theta_Y, theta, beta_, tau});
}

SolvencyStudy solvency_study(const ClaimDataset& ds, const PayoutModel& model,
                             const ScenarioConfig& cfg, const Calibration& cal,
                             const DemandCurve& dc) {
  SolvencyStudy st;
  st.moments = portfolio_moments(ds, model, cfg.pricing.beta, cfg.expectation);
  const AversionDistribution mu = cal.mu();
  const auto demand = [&](double t) {
    return dc.demand(cfg.population, mu, t, cfg.pricing.tau, cfg.pricing.theta_Y);
  };
  const auto gauss = [&](double t) {
    return static_cast<double>(n_min_gaussian(st.moments, t, cfg.solvency.eps));
  };
  const auto acc = [&](double t) {
    const auto n = try_n_acc(st.moments, t, cfg.solvency);
    return n ? static_cast<double>(*n) : std::numeric_limits<double>::infinity();
  };
  for (double t : cfg.theta_grid) {
    SolvencyCurveRow r;
    r.theta = t;
    r.demand = demand(t);
    r.n_gauss = n_min_gaussian(st.moments, t, cfg.solvency.eps);
    r.n_acc = try_n_acc(st.moments, t, cfg.solvency);
    r.a_max = a_window(t, cfg.solvency.tail(), cfg.solvency.eps).a_max;
    st.curve.push_back(r);
  }
  st.gaussian = theta_min_search(demand, gauss, cfg.theta_grid, 1e-6);
  st.accumulation = theta_min_search(demand, acc, cfg.theta_grid, 1e-6);
  return st;
}

std::vector<double> hybrid_e_grid(const ClaimDataset& sub, const ScenarioConfig& cfg, double alpha,
                                  HybridMode mode) {
  if (!cfg.e_grid.empty()) return cfg.e_grid;
  double beta = 1.0;
  for (double b : cfg.betas) beta = std::min(beta, b);
  const DeltaModel d = fit_delta_model(sub, alpha, beta, mode, hyper_for(cfg, mode == HybridMode::tree ? Method::tree : Method::boosted), cfg.seed);
  const double top = std::max(0.0, *std::max_element(d.predicted.begin(), d.predicted.end()));
  std::vector<double> g(101);
  for (int k = 0; k <= 100; ++k) g[k] = top * k / 100.0;
  return g;
}

HybridRun hybrid_run(const ClaimDataset& ds, const ScenarioConfig& cfg, double alpha,
                     HybridMode mode, Stratum stratum) {
  HybridConfig hc;
  hc.alpha = alpha;
  hc.beta = cfg.hybrid_beta;
  hc.theta = cfg.hybrid_theta;
  hc.theta_Y = cfg.pricing.theta_Y;
  hc.mode = mode;
  hc.stratum = stratum;
  hc.expectation = cfg.expectation;
  hc.seed = cfg.seed;
  hc.validate();

  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (in_stratum(ds[i], stratum)) ids.push_back(i);
  }
  const ClaimDataset sub = ds.select(stratum);
  HybridRun r;
  r.mode = mode;
  r.stratum = stratum;
  r.delta = fit_delta_model(sub, alpha, hc.beta, mode,
                            hyper_for(cfg, mode == HybridMode::tree ? Method::tree : Method::boosted),
                            cfg.seed);
  double e = cfg.e_star;
  if (e < 0.0) {
    for (const auto& t : cfg.hybrid_targets) {
      if (t.mode == mode && t.stratum == stratum) r.target_share = t.share;
    }
    e = r.target_share >= 0.0 ? e_for_share(r.delta, r.target_share)
                              : e_max_share(r.delta, hc.theta, hc.theta_Y);
  }
  r.summary = run_algorithm1(sub, r.delta, hc, e, ids);
  return r;
}

int run_command(std::string_view command, const ScenarioConfig& cfg, std::ostream& log) {
  if (command == "describe") return cmd_describe(cfg, log);
  if (command == "fit") return cmd_fit(cfg, log);
  if (command == "calibrate") return cmd_calibrate(cfg, log);
  if (command == "demand") return cmd_demand(cfg, log);
  if (command == "solvency") return cmd_solvency(cfg, log);
  if (command == "hybrid") return cmd_hybrid(cfg, log);
  if (command == "simulate") return cmd_simulate(cfg, log);
  throw ConfigError("unknown command '" + std::string(command) + "'");
}

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const InfeasibleError*>(&e)) return kExitInfeasible;
  if (dynamic_cast<const NoRootError*>(&e)) return kExitInfeasible;
  if (dynamic_cast<const DataError*>(&e)) return kExitData;
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const DomainError*>(&e)) return kExitConfig;
  return 1;
}

}  // namespace indexins::app
