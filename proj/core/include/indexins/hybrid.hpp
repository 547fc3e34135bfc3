#ifndef INDEXINS_HYBRID_HPP
#define INDEXINS_HYBRID_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "indexins/claims.hpp"
#include "indexins/payout.hpp"

namespace indexins {

/// tree: one regression tree, whole leaves are flagged together.
/// boosted: boosted trees, each claim is flagged on its own prediction.
enum class HybridMode { tree, boosted };

std::string_view to_string(HybridMode m) noexcept;
/// Throws ConfigError on an unknown tag.
HybridMode hybrid_mode_from_string(std::string_view tag);

/// Regressor of Delta(w) = m_Y(alpha|w) - phi_beta(w) plus its training
/// sample. In tree mode the regressor is the conditional-mean tree carrying
/// each leaf's Delta, so targets and predictions coincide.
struct DeltaModel {
  HybridMode mode = HybridMode::tree;
  double alpha = 0.0;
  double beta = 1.0;
  Regressor regressor;
  std::vector<double> targets;    // Delta_i from the fitted mean/Laplace pair
  std::vector<double> predicted;  // regressor output on the training claims
  std::vector<double> phi;        // phi_beta(w_i)
  std::vector<double> losses;     // Y_i
  std::vector<int> leaf;          // tree mode: leaf node of each claim
  std::size_t jensen_violations = 0;

  double predict(const FeatureRow& x) const noexcept { return indexins::predict(regressor, x); }
  std::size_t size() const noexcept { return targets.size(); }
};

/// Fits the conditional-mean model, its conditional Laplace transform at
/// alpha, and the Delta regressor. Hyperparameters default per mode.
DeltaModel fit_delta_model(const ClaimDataset& ds, double alpha, double beta, HybridMode mode,
                           std::uint64_t seed);
DeltaModel fit_delta_model(const ClaimDataset& ds, double alpha, double beta, HybridMode mode,
                           const Hyperparameters& hyper, std::uint64_t seed);

struct Partition {
  double e = 0.0;
  std::vector<bool> flagged;  // per training claim: index-compensated
  std::size_t count = 0;
  double share = 0.0;         // p_e
};

/// Flags the training claims whose predicted Delta is <= e.
Partition partition(const DeltaModel& delta, double e);

struct HybridSlack {
  double eta_e = 0.0;
  double theta_max = 0.0;
  double mean_loss_flagged = 0.0;  // E[Y | W in W_e]
};

/// eta_e = 1 - beta + theta_Y - e / (E[Y|W_e] p_e); theta_max = eta_e / beta.
/// Throws EmptyIndexSetError when nothing is flagged.
HybridSlack eta_e_theta_max(const DeltaModel& delta, const Partition& part, double theta_Y);

struct HybridPremium {
  double premium = 0.0;  // pi_h
  double pi_Y = 0.0;     // indemnity-only premium for comparison
  double theta_max = 0.0;
  bool exceeds_theta_max = false;  // theta > theta_max: the price is reported anyway
};

/// (1+theta_Y) E[Y|not flagged] (1-p_e) + (1+theta) E[phi|flagged] p_e,
/// multiplied by the claim frequency in annual mode.
HybridPremium hybrid_premium(const DeltaModel& delta, const Partition& part, double theta,
                             double theta_Y, double claim_frequency,
                             ExpectationMode mode = ExpectationMode::annual_mixture);

struct SweepRow {
  double beta = 0.0;
  double e = 0.0;
  double share = 0.0;
  double eta_e = 0.0;      // NaN when nothing is flagged
  double theta_max = 0.0;  // NaN when nothing is flagged
};

/// theta_max and p_e along an increasing e grid for each beta.
std::vector<SweepRow> sweep_e(const ClaimDataset& ds, double alpha, std::span<const double> betas,
                              std::span<const double> e_grid, HybridMode mode, double theta_Y,
                              std::uint64_t seed);

struct MonotonicityReport {
  bool share_non_decreasing = true;
  bool theta_max_non_increasing = true;
  std::size_t share_breaks = 0;
  std::size_t theta_max_breaks = 0;
};

/// Checks consecutive rows of equal beta (rows with NaN theta_max skipped).
MonotonicityReport check_monotonicity(std::span<const SweepRow> rows);

/// Smallest e whose share is closest to `target_share` among the e values at
/// which the flagged set changes (the distinct predicted Deltas, floored at 0).
double e_for_share(const DeltaModel& delta, double target_share);

/// e maximizing p_e subject to theta_max(e) >= theta_floor. Throws
/// InfeasibleError when no e qualifies.
double e_max_share(const DeltaModel& delta, double theta_floor, double theta_Y);

struct HybridConfig {
  double alpha = 0.049;
  double beta = 0.9;
  double theta = 0.0;
  double theta_Y = 0.4;
  HybridMode mode = HybridMode::tree;
  Stratum stratum = Stratum::pooled;
  ExpectationMode expectation = ExpectationMode::annual_mixture;
  std::uint64_t seed = 1;

  /// Throws DomainError naming the first invalid field.
  void validate() const;
};

enum class Compensation { index, indemnity };
std::string_view to_string(Compensation c) noexcept;

struct ClaimDecision {
  std::size_t claim = 0;  // 0-based row of the full dataset
  double delta = 0.0;     // predicted Delta
  Compensation label = Compensation::indemnity;
};

struct HybridSummary {
  HybridConfig config;
  double e = 0.0;
  std::size_t claims = 0;
  double share = 0.0;
  double eta_e = 0.0;      // NaN for an empty index set
  double theta_max = 0.0;  // NaN for an empty index set
  HybridPremium premium;
  std::vector<ClaimDecision> decisions;
};

/// Algorithm 1 on the configured stratum: fit the Delta model at alpha, flag
/// claims at e_star, and price the hybrid product. An empty index set gives
/// share 0 and the pure indemnity premium.
HybridSummary run_algorithm1(const ClaimDataset& ds, const HybridConfig& config, double e_star);

/// Same, on an already fitted Delta model for the stratum sample `ds`.
HybridSummary run_algorithm1(const ClaimDataset& ds, const DeltaModel& delta,
                             const HybridConfig& config, double e_star,
                             std::span<const std::size_t> claim_ids);

/// claim,stratum,delta,label
void write_decisions(std::ostream& out, const HybridSummary& summary);

/// Indented rendering of a tree-mode Delta model: one line per split and per
/// leaf with training share, Delta and the decision at e.
std::string render_tree(const DeltaModel& delta, double e);

}  // namespace indexins

#endif  // INDEXINS_HYBRID_HPP
