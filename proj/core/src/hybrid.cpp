#include "indexins/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "indexins/errors.hpp"
#include "indexins/numerics.hpp"

namespace indexins {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Method method_of(HybridMode m) { return m == HybridMode::tree ? Method::tree : Method::boosted; }

void check_beta(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
}

}  // namespace

std::string_view to_string(HybridMode m) noexcept {
  return m == HybridMode::tree ? "tree" : "boosted";
}

HybridMode hybrid_mode_from_string(std::string_view tag) {
  if (tag == "tree") return HybridMode::tree;
  if (tag == "boosted" || tag == "xgboost") return HybridMode::boosted;
  throw ConfigError("unknown hybrid mode '" + std::string(tag) + "' (expected tree or boosted)");
}

std::string_view to_string(Compensation c) noexcept {
  return c == Compensation::index ? "index" : "indemnity";
}

DeltaModel fit_delta_model(const ClaimDataset& ds, double alpha, double beta, HybridMode mode,
                           std::uint64_t seed) {
  return fit_delta_model(ds, alpha, beta, mode, Hyperparameters::defaults(method_of(mode)), seed);
}

DeltaModel fit_delta_model(const ClaimDataset& ds, double alpha, double beta, HybridMode mode,
                           const Hyperparameters& hyper, std::uint64_t seed) {
  check_beta(beta);
  if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
  check_alpha(ds, alpha);
  const Method method = method_of(mode);
  const PayoutModel mean_model = fit_conditional_mean(ds, method, hyper, seed);
  const CondLaplaceModel lap = fit_cond_laplace(ds, alpha, mean_model);

  DeltaModel d;
  d.mode = mode;
  d.alpha = alpha;
  d.beta = beta;
  d.jensen_violations = lap.jensen_violations();
  const DesignMatrix x(ds);
  d.targets.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const FeatureRow row = x.row(i);
    d.phi.push_back(predict_phi(mean_model, row, beta));
    d.losses.push_back(ds[i].loss);
    d.targets.push_back(lap.exponential_premium(row) - d.phi.back());
  }

  if (mode == HybridMode::tree) {
    // one partition for mean, Laplace and Delta: write Delta into the leaves
    const auto& mean_tree = std::get<TreeEnsemble>(mean_model.regressor()).trees.front();
    std::vector<double> by_node(mean_tree.nodes().size(), 0.0);
    for (int leaf : mean_tree.leaves()) {
      by_node[static_cast<std::size_t>(leaf)] = mean_tree.nodes()[static_cast<std::size_t>(leaf)].value;
    }
    d.leaf.resize(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      d.leaf[i] = mean_tree.leaf_of(x.row(i));
      by_node[static_cast<std::size_t>(d.leaf[i])] = d.targets[i];
    }
    TreeEnsemble e;
    e.trees.push_back(mean_tree.with_leaf_values(by_node));
    d.regressor = std::move(e);
  } else {
    const PresortedDesign design(x);
    d.regressor = fit_regressor(design, d.targets, method, hyper, seed ^ 0x64656c7461ULL);
  }
  d.predicted.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) d.predicted.push_back(d.predict(x.row(i)));
  return d;
}

Partition partition(const DeltaModel& delta, double e) {
  if (!std::isfinite(e)) throw DomainError("threshold e must be finite");
  Partition p;
  p.e = e;
  p.flagged.resize(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    p.flagged[i] = delta.predicted[i] <= e;
    if (p.flagged[i]) ++p.count;
  }
  p.share = delta.size() ? static_cast<double>(p.count) / static_cast<double>(delta.size()) : 0.0;
  return p;
}

HybridSlack eta_e_theta_max(const DeltaModel& delta, const Partition& part, double theta_Y) {
  if (part.count == 0) throw EmptyIndexSetError("no claim is flagged for index compensation");
  CompensatedSum s;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (part.flagged[i]) s.add(delta.losses[i]);
  }
  HybridSlack out;
  out.mean_loss_flagged = s.value() / static_cast<double>(part.count);
  out.eta_e = 1.0 - delta.beta + theta_Y - part.e / (out.mean_loss_flagged * part.share);
  out.theta_max = out.eta_e / delta.beta;
  return out;
}

HybridPremium hybrid_premium(const DeltaModel& delta, const Partition& part, double theta,
                             double theta_Y, double claim_frequency, ExpectationMode mode) {
  if (!(theta >= 0.0)) throw DomainError("theta must be >= 0");
  if (!(theta_Y > 0.0)) throw DomainError("theta_Y must be > 0");
  CompensatedSum rest;
  CompensatedSum all;
  CompensatedSum phi;
  std::size_t n_rest = 0;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    all.add(delta.losses[i]);
    if (part.flagged[i]) {
      phi.add(delta.phi[i]);
    } else {
      rest.add(delta.losses[i]);
      ++n_rest;
    }
  }
  const double n = static_cast<double>(delta.size());
  const double scale = mode == ExpectationMode::annual_mixture ? claim_frequency : 1.0;
  HybridPremium out;
  out.pi_Y = scale * (1.0 + theta_Y) * all.value() / n;
  double v = 0.0;
  if (n_rest > 0) v += (1.0 + theta_Y) * rest.value() / static_cast<double>(n_rest) * (1.0 - part.share);
  if (part.count > 0) v += (1.0 + theta) * phi.value() / static_cast<double>(part.count) * part.share;
  out.premium = scale * v;
  if (part.count > 0) {
    out.theta_max = eta_e_theta_max(delta, part, theta_Y).theta_max;
    out.exceeds_theta_max = theta > out.theta_max;
  } else {
    out.theta_max = kNaN;
  }
  return out;
}

std::vector<SweepRow> sweep_e(const ClaimDataset& ds, double alpha, std::span<const double> betas,
                              std::span<const double> e_grid, HybridMode mode, double theta_Y,
                              std::uint64_t seed) {
  if (e_grid.empty() || betas.empty()) throw ConfigError("sweep grids must be non-empty");
  for (std::size_t i = 1; i < e_grid.size(); ++i) {
    if (!(e_grid[i] > e_grid[i - 1])) throw ConfigError("e grid must be increasing");
  }
  std::vector<SweepRow> rows;
  rows.reserve(betas.size() * e_grid.size());
  for (double beta : betas) {
    const DeltaModel d = fit_delta_model(ds, alpha, beta, mode, seed);
    for (double e : e_grid) {
      const Partition p = partition(d, e);
      SweepRow r;
      r.beta = beta;
      r.e = e;
      r.share = p.share;
      if (p.count > 0) {
        const HybridSlack s = eta_e_theta_max(d, p, theta_Y);
        r.eta_e = s.eta_e;
        r.theta_max = s.theta_max;
      } else {
        r.eta_e = kNaN;
        r.theta_max = kNaN;
      }
      rows.push_back(r);
    }
  }
  return rows;
}

MonotonicityReport check_monotonicity(std::span<const SweepRow> rows) {
  MonotonicityReport rep;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1];
    const auto& b = rows[i];
    if (a.beta != b.beta) continue;
    if (b.share < a.share) {
      rep.share_non_decreasing = false;
      ++rep.share_breaks;
    }
    if (!std::isnan(a.theta_max) && !std::isnan(b.theta_max) && b.theta_max > a.theta_max) {
      rep.theta_max_non_increasing = false;
      ++rep.theta_max_breaks;
    }
  }
  return rep;
}

namespace {

std::vector<double> change_points(const DeltaModel& delta) {
  std::vector<double> v;
  v.reserve(delta.size() + 1);
  for (double p : delta.predicted) v.push_back(std::max(0.0, p));
  v.push_back(0.0);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

double e_for_share(const DeltaModel& delta, double target_share) {
  if (!(target_share >= 0.0 && target_share <= 1.0)) {
    throw DomainError("target share must lie in [0, 1]");
  }
  double best_e = 0.0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (double e : change_points(delta)) {
    const double gap = std::abs(partition(delta, e).share - target_share);
    if (gap < best_gap) {
      best_gap = gap;
      best_e = e;
    }
  }
  return best_e;
}

double e_max_share(const DeltaModel& delta, double theta_floor, double theta_Y) {
  double best_e = std::numeric_limits<double>::quiet_NaN();
  double best_share = -1.0;
  for (double e : change_points(delta)) {
    const Partition p = partition(delta, e);
    if (p.count == 0) continue;
    if (eta_e_theta_max(delta, p, theta_Y).theta_max >= theta_floor && p.share > best_share) {
      best_share = p.share;
      best_e = e;
    }
  }
  if (std::isnan(best_e)) {
    throw InfeasibleError("no threshold e keeps theta_max >= " + std::to_string(theta_floor));
  }
  return best_e;
}

void HybridConfig::validate() const {
  if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
  check_beta(beta);
  if (!(theta >= 0.0)) throw DomainError("theta must be >= 0");
  if (!(theta_Y > 0.0)) throw DomainError("theta_Y must be > 0");
}

HybridSummary run_algorithm1(const ClaimDataset& ds, const DeltaModel& delta,
                             const HybridConfig& config, double e_star,
                             std::span<const std::size_t> claim_ids) {
  config.validate();
  if (!(e_star >= 0.0)) throw DomainError("e* must be >= 0");
  if (delta.size() != ds.size() || claim_ids.size() != ds.size()) {
    throw DomainError("Delta model and claim ids must match the sample");
  }
  const Partition p = partition(delta, e_star);
  HybridSummary s;
  s.config = config;
  s.e = e_star;
  s.claims = ds.size();
  s.share = p.share;
  if (p.count > 0) {
    const HybridSlack slack = eta_e_theta_max(delta, p, config.theta_Y);
    s.eta_e = slack.eta_e;
    s.theta_max = slack.theta_max;
  } else {
    s.eta_e = kNaN;
    s.theta_max = kNaN;
  }
  s.premium = hybrid_premium(delta, p, config.theta, config.theta_Y, ds.claim_frequency(),
                             config.expectation);
  s.decisions.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    s.decisions.push_back({claim_ids[i], delta.predicted[i],
                           p.flagged[i] ? Compensation::index : Compensation::indemnity});
  }
  return s;
}

HybridSummary run_algorithm1(const ClaimDataset& ds, const HybridConfig& config, double e_star) {
  config.validate();
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (in_stratum(ds[i], config.stratum)) ids.push_back(i);
  }
  const ClaimDataset sub = ds.select(config.stratum);
  const DeltaModel delta = fit_delta_model(sub, config.alpha, config.beta, config.mode, config.seed);
  return run_algorithm1(sub, delta, config, e_star, ids);
}

void write_decisions(std::ostream& out, const HybridSummary& summary) {
  out << "claim,stratum,delta,label\n";
  out << std::setprecision(10);
  for (const auto& d : summary.decisions) {
    out << d.claim << ',' << to_string(summary.config.stratum) << ',' << d.delta << ','
        << to_string(d.label) << '\n';
  }
}

std::string render_tree(const DeltaModel& delta, double e) {
  if (delta.mode != HybridMode::tree) throw DomainError("only tree-mode Delta models render");
  const auto& tree = std::get<TreeEnsemble>(delta.regressor).trees.front();
  const auto nodes = tree.nodes();
  std::vector<std::size_t> count(nodes.size(), 0);
  for (int l : delta.leaf) ++count[static_cast<std::size_t>(l)];
  const double n = static_cast<double>(delta.size());

  std::ostringstream os;
  os << std::setprecision(4);
  struct Item {
    int node;
    int depth;
    std::string prefix;
  };
  std::vector<Item> stack{{0, 0, "root"}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    const auto& nd = nodes[static_cast<std::size_t>(it.node)];
    os << std::string(static_cast<std::size_t>(2 * it.depth), ' ') << it.prefix;
    if (nd.is_leaf()) {
      os << ": share=" << 100.0 * static_cast<double>(count[static_cast<std::size_t>(it.node)]) / n
         << "% delta=" << nd.value << " -> "
         << (nd.value <= e ? "index" : "indemnity") << '\n';
      continue;
    }
    os << '\n';
    const std::string name(feature_name(static_cast<std::size_t>(nd.feature)));
    std::ostringstream thr;
    thr << std::setprecision(6) << nd.threshold;
    stack.push_back({nd.right, it.depth + 1, name + " > " + thr.str()});
    stack.push_back({nd.left, it.depth + 1, name + " <= " + thr.str()});
  }
  return os.str();
}

}  // namespace indexins
