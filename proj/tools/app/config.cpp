#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "indexins/errors.hpp"

namespace indexins::app {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void add_hyper(std::vector<std::pair<std::string, std::string>>& out, Method m) {
  const Hyperparameters h = Hyperparameters::defaults(m);
  const std::string s(to_string(m));
  if (m == Method::linear) {
    out.emplace_back(s + ".service_type", h.linear_service_type ? "true" : "false");
    return;
  }
  out.emplace_back(s + ".n_trees", std::to_string(h.n_trees));
  out.emplace_back(s + ".max_depth", std::to_string(h.max_depth));
  out.emplace_back(s + ".min_samples_leaf", std::to_string(h.min_samples_leaf));
  out.emplace_back(s + ".features_per_split", std::to_string(h.features_per_split));
  out.emplace_back(s + ".learning_rate", fmt(h.learning_rate));
  out.emplace_back(s + ".subsample", fmt(h.subsample));
}

std::vector<std::pair<std::string, std::string>> make_defaults() {
  std::vector<std::pair<std::string, std::string>> d{
      {"data.path", "data/loss_data.csv"},
      {"data.delimiter", ","},
      {"data.claim_frequency", "0.06"},
      {"data.loss_scale", "1"},
      {"data.expectation", "annual"},
      {"data.col_loss", "Y"},
      {"data.col_duration", "T"},
      {"data.col_service", "X"},
      {"data.col_backup_activated", "delta"},
      {"data.col_backup_quality", "B"},
      {"data.col_backup_excess", "Lambda"},
      {"data.service_levels", "t1,t2,t3,t4,t5"},
      {"describe.strata", "pooled,delta1,delta0"},
      {"pricing.theta_Y", "0.4"},
      {"pricing.theta", "0.2"},
      {"pricing.beta", "0.9"},
      {"pricing.tau", "0.5"},
      {"calibration.alpha_minus", "0"},
      {"calibration.lambda", "0"},
      {"calibration.premium_increase", "1.4"},
      {"calibration.acceptance_share", "0.5"},
      {"solvency.eps", "0.005"},
      {"solvency.eps_prime", "0"},
      {"solvency.a", "2.4"},
      {"solvency.gamma", "0.5"},
      {"solvency.s", "0.003"},
      {"solvency.population", "500"},
      {"solvency.extension", "proof-derived"},
      {"model.method", "boosted"},
      {"model.path", ""},
  };
  for (Method m : {Method::linear, Method::tree, Method::forest, Method::boosted}) add_hyper(d, m);
  const std::vector<std::pair<std::string, std::string>> rest{
      {"grids.tau", "0:3:0.25"},
      {"grids.theta", "0.02:0.6:0.02"},
      {"grids.theta_taus", "0.25,0.5,1"},
      {"grids.alpha_bar", "0.25:4:0.25"},
      {"grids.utility_alpha", ""},
      {"grids.e", ""},
      {"grids.betas", "0.8,0.9,1.0"},
      {"grids.alpha_points", "81"},
      {"hybrid.modes", "tree,boosted"},
      {"hybrid.strata", "delta1,delta0"},
      {"hybrid.alpha", "0"},
      {"hybrid.beta", "0.9"},
      {"hybrid.theta", "0.2"},
      {"hybrid.e_star", "-1"},
      {"hybrid.targets", ""},
      {"simulate.n", "0"},
      {"simulate.theta", "0.2"},
      {"simulate.trials", "100000"},
      {"simulate.accumulation", "false"},
      {"run.seed", "1"},
      {"run.out", "out"},
  };
  d.insert(d.end(), rest.begin(), rest.end());
  return d;
}

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t k = s.find(sep, start);
    std::string piece = trim(s.substr(start, k == std::string_view::npos ? s.npos : k - start));
    if (!piece.empty()) out.push_back(std::move(piece));
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return out;
}

std::string env_name(const std::string& key) {
  std::string s = "INDEXINS_";
  for (char c : key) s += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

void set_known(RawConfig& cfg, const std::string& key, const std::string& value,
               std::string_view origin) {
  auto it = cfg.find(key);
  if (it == cfg.end()) {
    throw ConfigError("unknown config key '" + key + "' (" + std::string(origin) + ")");
  }
  it->second = value;
}

double to_double(const RawConfig& raw, const std::string& key) {
  const std::string& s = raw.at(key);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("config key '" + key + "': '" + s + "' is not a number");
  }
  return v;
}

std::int64_t to_int(const RawConfig& raw, const std::string& key) {
  const std::string& s = raw.at(key);
  std::int64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': '" + s + "' is not an integer");
  }
  return v;
}

bool to_bool(const RawConfig& raw, const std::string& key) {
  std::string s = raw.at(key);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config key '" + key + "': '" + s + "' is not a boolean");
}

Stratum stratum_from(const std::string& tag, const std::string& key) {
  if (tag == "pooled" || tag == "all") return Stratum::pooled;
  if (tag == "delta1" || tag == "activated") return Stratum::backup_activated;
  if (tag == "delta0" || tag == "failed") return Stratum::backup_failed;
  throw ConfigError("config key '" + key + "': unknown stratum '" + tag + "'");
}

ExpectationMode expectation_from(const std::string& tag) {
  if (tag == "annual") return ExpectationMode::annual_mixture;
  if (tag == "claims") return ExpectationMode::claims_only;
  throw ConfigError("config key 'data.expectation': expected annual or claims, got '" + tag + "'");
}

template <class F>
auto with_key(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.find(key) != std::string::npos) throw;
    throw ConfigError("config key '" + key + "': " + what);
  }
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& config_defaults() {
  static const auto d = make_defaults();
  return d;
}

RawConfig parse_ini(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config file line " + std::to_string(e.line()) + ": " + e.message());
  }
  RawConfig out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config key '" + section + "' is outside any section");
    for (const auto& [key, value] : body) out[section + "." + key] = trim(value.data());
  }
  return out;
}

RawConfig resolve_config(const std::filesystem::path* file,
                         const std::vector<std::string>& overrides) {
  RawConfig cfg(config_defaults().begin(), config_defaults().end());
  if (file) {
    std::ifstream in(*file, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + file->string());
    std::ostringstream ss;
    ss << in.rdbuf();
    for (const auto& [k, v] : parse_ini(ss.str())) set_known(cfg, k, v, file->string());
  }
  for (auto& [key, value] : cfg) {
    if (const char* env = std::getenv(env_name(key).c_str())) value = env;
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not section.key=value");
    set_known(cfg, trim(std::string_view(o).substr(0, eq)), trim(std::string_view(o).substr(eq + 1)),
              "--set");
  }
  return cfg;
}

std::vector<double> parse_grid(std::string_view text, std::string_view key) {
  const std::string k(key);
  const std::string s = trim(text);
  std::vector<double> out;
  if (s.empty()) return out;
  RawConfig tmp;
  if (s.find(':') != std::string::npos) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw ConfigError("config key '" + k + "': range must be a:b:step");
    tmp["lo"] = parts[0];
    tmp["hi"] = parts[1];
    tmp["step"] = parts[2];
    const double lo = with_key(k, [&] { return to_double(tmp, "lo"); });
    const double hi = with_key(k, [&] { return to_double(tmp, "hi"); });
    const double step = with_key(k, [&] { return to_double(tmp, "step"); });
    if (!(step > 0.0) || hi < lo) throw ConfigError("config key '" + k + "': empty or reversed range");
    const auto n = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9));
    if (n > 1000000) throw ConfigError("config key '" + k + "': range too long");
    // lo + i*step rather than accumulation, so points are reproducible
    for (std::int64_t i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
  }
  for (const auto& piece : split(s, ',')) {
    tmp["v"] = piece;
    out.push_back(with_key(k, [&] { return to_double(tmp, "v"); }));
  }
  return out;
}

Hyperparameters hyper_for(const ScenarioConfig& cfg, Method m) {
  const auto it = cfg.hyper.find(m);
  return it == cfg.hyper.end() ? Hyperparameters::defaults(m) : it->second;
}

ScenarioConfig to_scenario(const RawConfig& raw) {
  for (const auto& [k, v] : config_defaults()) {
    if (!raw.count(k)) throw ConfigError("config key '" + k + "' is missing");
  }
  ScenarioConfig c;
  c.raw = raw;
  const auto num = [&](const char* k) { return to_double(raw, k); };
  const auto str = [&](const char* k) -> const std::string& { return raw.at(k); };

  c.dataset = str("data.path");
  if (str("data.delimiter").size() != 1) {
    throw ConfigError("config key 'data.delimiter' must be a single character");
  }
  c.load.delimiter = str("data.delimiter")[0];
  c.load.claim_frequency = num("data.claim_frequency");
  if (!(c.load.claim_frequency > 0.0 && c.load.claim_frequency <= 1.0)) {
    throw ConfigError("config key 'data.claim_frequency' must lie in (0, 1]");
  }
  c.loss_scale = num("data.loss_scale");
  if (!(c.loss_scale > 0.0)) throw ConfigError("config key 'data.loss_scale' must be > 0");
  c.expectation = expectation_from(str("data.expectation"));
  c.columns.loss = str("data.col_loss");
  c.columns.duration = str("data.col_duration");
  c.columns.service_type = str("data.col_service");
  c.columns.backup_activated = str("data.col_backup_activated");
  c.columns.backup_quality = str("data.col_backup_quality");
  c.columns.backup_excess = str("data.col_backup_excess");
  c.load.service_levels = split(str("data.service_levels"), ',');
  if (c.load.service_levels.size() != kServiceLevels) {
    throw ConfigError("config key 'data.service_levels' needs five labels");
  }

  for (const auto& s : split(str("describe.strata"), ',')) {
    c.describe_strata.push_back(stratum_from(s, "describe.strata"));
  }

  c.pricing = {num("pricing.theta_Y"), num("pricing.theta"), num("pricing.beta"), num("pricing.tau")};
  with_key("pricing", [&] { c.pricing.validate(); });

  c.alpha_minus = num("calibration.alpha_minus");
  c.lambda = num("calibration.lambda");
  c.premium_increase = num("calibration.premium_increase");
  c.acceptance_share = num("calibration.acceptance_share");
  if (c.alpha_minus < 0.0 || c.lambda < 0.0) {
    throw ConfigError("config keys 'calibration.alpha_minus' and 'calibration.lambda' must be >= 0");
  }
  if (!(c.premium_increase > 1.0)) throw ConfigError("config key 'calibration.premium_increase' must exceed 1");
  if (!(c.acceptance_share > 0.0 && c.acceptance_share < 1.0)) {
    throw ConfigError("config key 'calibration.acceptance_share' must lie in (0, 1)");
  }

  c.solvency = {num("solvency.eps"), num("solvency.eps_prime"), num("solvency.a"),
                num("solvency.gamma"), num("solvency.s")};
  try {
    c.solvency.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("solvency section: ") + e.what());
  }
  c.population = num("solvency.population");
  if (!(c.population >= 1.0)) throw ConfigError("config key 'solvency.population' must be >= 1");
  c.extension = with_key("solvency.extension",
                         [&] { return extension_variant_from_string(str("solvency.extension")); });

  c.method = with_key("model.method", [&] { return method_from_string(str("model.method")); });
  c.model_path = str("model.path");
  for (Method m : {Method::linear, Method::tree, Method::forest, Method::boosted}) {
    const std::string s(to_string(m));
    Hyperparameters h = Hyperparameters::defaults(m);
    if (m == Method::linear) {
      h.linear_service_type = to_bool(raw, s + ".service_type");
    } else {
      const auto count = [&](const std::string& k) {
        const std::int64_t v = to_int(raw, k);
        if (v < 0) throw ConfigError("config key '" + k + "' must be >= 0");
        return static_cast<std::size_t>(v);
      };
      h.n_trees = count(s + ".n_trees");
      h.max_depth = static_cast<int>(to_int(raw, s + ".max_depth"));
      h.min_samples_leaf = count(s + ".min_samples_leaf");
      h.features_per_split = count(s + ".features_per_split");
      h.learning_rate = to_double(raw, s + ".learning_rate");
      h.subsample = to_double(raw, s + ".subsample");
    }
    with_key(s, [&] { h.validate(m); });
    c.hyper[m] = h;
  }

  c.tau_grid = parse_grid(str("grids.tau"), "grids.tau");
  c.theta_grid = parse_grid(str("grids.theta"), "grids.theta");
  c.theta_taus = parse_grid(str("grids.theta_taus"), "grids.theta_taus");
  c.alpha_bar_grid = parse_grid(str("grids.alpha_bar"), "grids.alpha_bar");
  c.utility_alpha_grid = parse_grid(str("grids.utility_alpha"), "grids.utility_alpha");
  c.e_grid = parse_grid(str("grids.e"), "grids.e");
  c.betas = parse_grid(str("grids.betas"), "grids.betas");
  const std::int64_t points = to_int(raw, "grids.alpha_points");
  if (points < 2) throw ConfigError("config key 'grids.alpha_points' must be >= 2");
  c.alpha_points = static_cast<std::size_t>(points);
  for (double t : c.theta_grid) {
    if (!(t > 0.0)) throw ConfigError("config key 'grids.theta' must hold positive loadings");
  }
  for (double b : c.betas) {
    if (!(b > 0.0 && b <= 1.0)) throw ConfigError("config key 'grids.betas' must lie in (0, 1]");
  }
  for (double a : c.alpha_bar_grid) {
    if (!(a > 0.0)) throw ConfigError("config key 'grids.alpha_bar' must be > 0");
  }

  for (const auto& m : split(str("hybrid.modes"), ',')) {
    c.hybrid_modes.push_back(with_key("hybrid.modes", [&] { return hybrid_mode_from_string(m); }));
  }
  for (const auto& s : split(str("hybrid.strata"), ',')) {
    c.hybrid_strata.push_back(stratum_from(s, "hybrid.strata"));
  }
  c.hybrid_alpha = num("hybrid.alpha");
  c.hybrid_beta = num("hybrid.beta");
  c.hybrid_theta = num("hybrid.theta");
  c.e_star = num("hybrid.e_star");
  if (c.hybrid_alpha < 0.0) throw ConfigError("config key 'hybrid.alpha' must be >= 0");
  if (!(c.hybrid_beta > 0.0 && c.hybrid_beta <= 1.0)) {
    throw ConfigError("config key 'hybrid.beta' must lie in (0, 1]");
  }
  if (!(c.hybrid_theta >= 0.0)) throw ConfigError("config key 'hybrid.theta' must be >= 0");
  // "tree:delta1=0.8379, boosted:delta0=0.496"
  for (const auto& item : split(str("hybrid.targets"), ',')) {
    const auto colon = item.find(':');
    const auto eq = item.find('=');
    if (colon == std::string::npos || eq == std::string::npos || eq < colon) {
      throw ConfigError("config key 'hybrid.targets': '" + item + "' is not mode:stratum=share");
    }
    HybridTarget t;
    t.mode = with_key("hybrid.targets", [&] { return hybrid_mode_from_string(trim(item.substr(0, colon))); });
    t.stratum = stratum_from(trim(item.substr(colon + 1, eq - colon - 1)), "hybrid.targets");
    RawConfig tmp{{"hybrid.targets", trim(item.substr(eq + 1))}};
    t.share = to_double(tmp, "hybrid.targets");
    if (!(t.share >= 0.0 && t.share <= 1.0)) throw ConfigError("config key 'hybrid.targets': share must lie in [0, 1]");
    c.hybrid_targets.push_back(t);
  }

  c.sim_n = to_int(raw, "simulate.n");
  c.sim_theta = num("simulate.theta");
  c.sim_trials = to_int(raw, "simulate.trials");
  c.sim_accumulation = to_bool(raw, "simulate.accumulation");
  if (c.sim_n < 0) throw ConfigError("config key 'simulate.n' must be >= 0");
  if (!(c.sim_theta > 0.0)) throw ConfigError("config key 'simulate.theta' must be > 0");
  if (c.sim_trials <= 0) throw ConfigError("config key 'simulate.trials' must be > 0");

  const std::int64_t seed = to_int(raw, "run.seed");
  if (seed < 0) throw ConfigError("config key 'run.seed' must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  c.out_dir = str("run.out");
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path* file,
                             const std::vector<std::string>& overrides) {
  return to_scenario(resolve_config(file, overrides));
}

}  // namespace indexins::app
