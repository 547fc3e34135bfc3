#ifndef INDEXINS_APP_CONFIG_HPP
#define INDEXINS_APP_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "indexins/claims.hpp"
#include "indexins/hybrid.hpp"
#include "indexins/payout.hpp"
#include "indexins/solvency.hpp"
#include "indexins/utility.hpp"

namespace indexins::app {

/// Flat "section.key" -> value map with every known key present.
using RawConfig = std::map<std::string, std::string>;

/// Known keys and their defaults, in a fixed order.
const std::vector<std::pair<std::string, std::string>>& config_defaults();

/// Defaults, then the INI file (if any), then INDEXINS_<SECTION>_<KEY>
/// environment variables, then `overrides` ("section.key=value"). Unknown keys
/// raise ConfigError.
RawConfig resolve_config(const std::filesystem::path* file,
                         const std::vector<std::string>& overrides);

/// INI text -> flat map. Accepts ';' and '#' comments.
RawConfig parse_ini(std::string_view text);

/// "a:b:step" (inclusive), or a comma list. Empty string gives an empty grid.
std::vector<double> parse_grid(std::string_view text, std::string_view key);

struct HybridTarget {
  HybridMode mode = HybridMode::tree;
  Stratum stratum = Stratum::backup_activated;
  double share = 0.0;
};

struct ScenarioConfig {
  // [data]
  std::filesystem::path dataset;
  ColumnMap columns;
  LoadOptions load;
  double loss_scale = 1.0;
  ExpectationMode expectation = ExpectationMode::annual_mixture;
  std::vector<Stratum> describe_strata;

  // [pricing]
  PricingParams pricing{0.4, 0.2, 0.9, 0.5};

  // [calibration]; alpha_minus / lambda of 0 mean "calibrate"
  double alpha_minus = 0.0;
  double lambda = 0.0;
  double premium_increase = 1.4;
  double acceptance_share = 0.5;

  // [solvency]
  SolvencyParams solvency;
  double population = 500.0;
  ExtensionVariant extension = ExtensionVariant::proof_derived;

  // [model]
  Method method = Method::boosted;
  std::map<Method, Hyperparameters> hyper;
  std::filesystem::path model_path;  // optional pre-fitted payout model

  // [grids]
  std::vector<double> tau_grid;
  std::vector<double> theta_grid;
  std::vector<double> theta_taus;
  std::vector<double> alpha_bar_grid;  // in units of 1/lambda above alpha_-
  std::vector<double> utility_alpha_grid;
  std::vector<double> e_grid;          // empty: automatic
  std::vector<double> betas;
  std::size_t alpha_points = 81;

  // [hybrid]
  std::vector<HybridMode> hybrid_modes;
  std::vector<Stratum> hybrid_strata;
  double hybrid_alpha = 0.0;  // 0: calibrated alpha_-
  double hybrid_beta = 0.9;
  double hybrid_theta = 0.2;
  double e_star = -1.0;       // < 0: from the target share, else max share
  std::vector<HybridTarget> hybrid_targets;

  // [simulate]
  std::int64_t sim_n = 0;  // 0: analytic minimum count
  double sim_theta = 0.2;
  std::int64_t sim_trials = 100000;
  bool sim_accumulation = false;

  // [run]
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";

  RawConfig raw;  // resolved key/value echo for the manifest
};

/// Typed view of a resolved map. ConfigError names the offending key.
ScenarioConfig to_scenario(const RawConfig& raw);

/// Convenience: resolve_config + to_scenario.
ScenarioConfig load_scenario(const std::filesystem::path* file,
                             const std::vector<std::string>& overrides);

Hyperparameters hyper_for(const ScenarioConfig& cfg, Method m);

}  // namespace indexins::app

#endif  // INDEXINS_APP_CONFIG_HPP
