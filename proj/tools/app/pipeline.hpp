#ifndef INDEXINS_APP_PIPELINE_HPP
#define INDEXINS_APP_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"

namespace indexins::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInfeasible = 4;

/// Loads the configured file and applies data.loss_scale.
ClaimDataset load_dataset(const ScenarioConfig& cfg);

struct Calibration {
  double pure = 0.0;        // E[Y] under the expectation mode
  double pi_Y = 0.0;
  double alpha_minus = 0.0;
  double alpha_star = 0.0;  // aversion matching the raised premium (0 if lambda given)
  double lambda = 0.0;
  bool from_config = false;

  AversionDistribution mu() const { return AversionDistribution(alpha_minus, lambda); }
};

/// Values in [calibration] win; missing ones are solved for.
Calibration calibrate(const ClaimDataset& ds, const ScenarioConfig& cfg);

/// model.path when set (and of the requested method), else a fresh fit.
PayoutModel payout_model(const ClaimDataset& ds, const ScenarioConfig& cfg, Method method);

/// Population demand for the index product at fixed beta, for any (theta,
/// tau), backed by one preference curve on an aversion grid.
class DemandCurve {
 public:
  /// Grid covers [alpha_-, alpha_- + span_factor * 8 / lambda].
  DemandCurve(const ClaimDataset& ds, const PayoutModel& model, const AversionDistribution& mu,
              double beta, ExpectationMode mode, std::size_t points, double span_factor = 1.0);

  double demand(double population, const AversionDistribution& mu, double theta, double tau,
                double theta_Y) const;
  const PreferenceCurve& curve() const noexcept { return *curve_; }

 private:
  std::shared_ptr<PreferenceCurve> curve_;
  double beta_;
};

struct SolvencyCurveRow {
  double theta = 0.0;
  double demand = 0.0;
  std::int64_t n_gauss = 0;
  std::optional<std::int64_t> n_acc;  // empty when the a-window excludes a
  double a_max = 0.0;
};

struct SolvencyStudy {
  PortfolioMoments moments;
  std::vector<SolvencyCurveRow> curve;
  ThetaMinResult gaussian;
  ThetaMinResult accumulation;
};

/// Demand and thresholds along the theta grid at (beta, tau) from the config,
/// plus the refined minimal loadings.
SolvencyStudy solvency_study(const ClaimDataset& ds, const PayoutModel& model,
                             const ScenarioConfig& cfg, const Calibration& cal,
                             const DemandCurve& demand);

struct HybridRun {
  HybridMode mode = HybridMode::tree;
  Stratum stratum = Stratum::pooled;
  double target_share = -1.0;  // < 0 when e* came from elsewhere
  HybridSummary summary;
  DeltaModel delta;
};

/// Algorithm 1 for one (mode, stratum). e* is hybrid.e_star when >= 0, else
/// the one matching a configured target share, else the largest share whose
/// theta_max stays >= hybrid.theta.
HybridRun hybrid_run(const ClaimDataset& ds, const ScenarioConfig& cfg, double alpha,
                     HybridMode mode, Stratum stratum);

/// e grid of the config, or 101 points from 0 to the largest predicted Delta.
std::vector<double> hybrid_e_grid(const ClaimDataset& sub, const ScenarioConfig& cfg, double alpha,
                                  HybridMode mode);

/// Runs one CLI command; files go to cfg.out_dir, progress to `log`.
/// Returns the process exit code (errors propagate as exceptions).
int run_command(std::string_view command, const ScenarioConfig& cfg, std::ostream& log);

/// Maps the library's exception hierarchy onto exit codes.
int exit_code_for(const std::exception& e) noexcept;

}  // namespace indexins::app

#endif  // INDEXINS_APP_PIPELINE_HPP
