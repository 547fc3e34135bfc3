#include "indexins/model_io.hpp"

#include <cstdlib>
#include <fstream>
#include <ios>
#include <sstream>
#include <string>

#include "indexins/errors.hpp"

namespace indexins {

namespace {

constexpr const char* kMagic = "indexins-model";
constexpr int kVersion = 1;

std::string hex(double v) {
  std::ostringstream os;
  os << std::hexfloat << v;
  return os.str();
}

double parse_double(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size()) {
    throw DataError("model file: bad number '" + tok + "'");
  }
  return v;
}

unsigned long long parse_u64(const std::string& tok) {
  char* end = nullptr;
  const auto v = std::strtoull(tok.c_str(), &end, 10);
  if (tok.empty() || end != tok.c_str() + tok.size()) {
    throw DataError("model file: bad integer '" + tok + "'");
  }
  return v;
}

long long parse_i64(const std::string& tok) {
  char* end = nullptr;
  const auto v = std::strtoll(tok.c_str(), &end, 10);
  if (tok.empty() || end != tok.c_str() + tok.size()) {
    throw DataError("model file: bad integer '" + tok + "'");
  }
  return v;
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // next non-empty line split into tokens; first token must be `key`
  std::vector<std::string> expect(const std::string& key) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      std::istringstream ls(line);
      std::vector<std::string> toks;
      for (std::string t; ls >> t;) toks.push_back(t);
      if (toks.empty()) continue;
      if (toks.front() != key) {
        throw DataError("model file line " + std::to_string(line_no_) + ": expected '" + key +
                        "', found '" + toks.front() + "'");
      }
      toks.erase(toks.begin());
      return toks;
    }
    throw DataError("model file truncated: expected '" + key + "'");
  }

  std::vector<std::string> expect(const std::string& key, std::size_t count) {
    auto toks = expect(key);
    if (toks.size() != count) {
      throw DataError("model file line " + std::to_string(line_no_) + ": '" + key + "' takes " +
                      std::to_string(count) + " fields");
    }
    return toks;
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

void write_tree(std::ostream& out, const RegressionTree& tree, std::uint64_t key) {
  out << "tree " << tree.nodes().size() << ' ' << key << '\n';
  for (const auto& n : tree.nodes()) {
    out << "node " << n.feature << ' ' << hex(n.threshold) << ' ' << n.left << ' ' << n.right
        << ' ' << hex(n.value) << ' ' << n.samples << '\n';
  }
}

}  // namespace

void save_model(std::ostream& out, const PayoutModel& model) {
  const Regressor& reg = model.regressor();
  const auto& h = model.hyperparameters();
  out << kMagic << ' ' << kVersion << '\n';
  out << "method " << to_string(model.method()) << '\n';
  out << "seed " << model.seed() << '\n';
  out << "training_rows " << model.training_rows() << '\n';
  out << "hyper n_trees=" << h.n_trees << " max_depth=" << h.max_depth
      << " learning_rate=" << hex(h.learning_rate) << " subsample=" << hex(h.subsample)
      << " features_per_split=" << h.features_per_split
      << " min_samples_leaf=" << h.min_samples_leaf
      << " linear_service_type=" << (h.linear_service_type ? 1 : 0) << '\n';
  if (const auto* lin = std::get_if<LinearFit>(&reg)) {
    out << "linear " << lin->columns.size();
    for (auto c : lin->columns) out << ' ' << c;
    out << "\ncoefficients";
    for (double c : lin->coefficients) out << ' ' << hex(c);
    out << '\n';
  } else {
    const auto& e = std::get<TreeEnsemble>(reg);
    out << "ensemble " << hex(e.base) << ' ' << hex(e.weight) << ' ' << e.trees.size() << '\n';
    for (std::size_t t = 0; t < e.trees.size(); ++t) {
      write_tree(out, e.trees[t], e.sample_keys.empty() ? 0 : e.sample_keys[t]);
    }
  }
  out << "end\n";
  if (!out) throw DataError("failed to write model");
}

void save_model(const std::filesystem::path& path, const PayoutModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  save_model(out, model);
}

PayoutModel load_model(std::istream& in) {
  Reader r(in);
  const auto magic = r.expect(kMagic, 1);
  if (parse_i64(magic[0]) != kVersion) {
    throw DataError("unsupported model format version " + magic[0]);
  }
  Method method;
  try {
    method = method_from_string(r.expect("method", 1)[0]);
  } catch (const ConfigError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  const std::uint64_t seed = parse_u64(r.expect("seed", 1)[0]);
  const auto rows = static_cast<std::size_t>(parse_u64(r.expect("training_rows", 1)[0]));

  Hyperparameters h;
  for (const auto& kv : r.expect("hyper")) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw DataError("model file: bad hyperparameter '" + kv + "'");
    const std::string k = kv.substr(0, eq);
    const std::string v = kv.substr(eq + 1);
    if (k == "n_trees") h.n_trees = parse_u64(v);
    else if (k == "max_depth") h.max_depth = static_cast<int>(parse_i64(v));
    else if (k == "learning_rate") h.learning_rate = parse_double(v);
    else if (k == "subsample") h.subsample = parse_double(v);
    else if (k == "features_per_split") h.features_per_split = parse_u64(v);
    else if (k == "min_samples_leaf") h.min_samples_leaf = parse_u64(v);
    else if (k == "linear_service_type") h.linear_service_type = parse_u64(v) != 0;
    else throw DataError("model file: unknown hyperparameter '" + k + "'");
  }
  try {
    h.validate(method);
  } catch (const ConfigError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }

  Regressor reg;
  if (method == Method::linear) {
    auto cols = r.expect("linear");
    if (cols.empty()) throw DataError("model file: 'linear' needs a column count");
    const auto k = static_cast<std::size_t>(parse_u64(cols[0]));
    if (cols.size() != k + 1) throw DataError("model file: column count mismatch");
    LinearFit fit;
    for (std::size_t j = 0; j < k; ++j) {
      const auto c = static_cast<std::size_t>(parse_u64(cols[j + 1]));
      if (c >= kFeatureCount) throw DataError("model file: column index out of range");
      fit.columns.push_back(c);
    }
    for (const auto& t : r.expect("coefficients", k + 1)) fit.coefficients.push_back(parse_double(t));
    reg = std::move(fit);
  } else {
    const auto head = r.expect("ensemble", 3);
    TreeEnsemble e;
    e.base = parse_double(head[0]);
    e.weight = parse_double(head[1]);
    const auto count = static_cast<std::size_t>(parse_u64(head[2]));
    bool any_key = false;
    std::vector<std::uint64_t> keys;
    for (std::size_t t = 0; t < count; ++t) {
      const auto th = r.expect("tree", 2);
      const auto n = static_cast<std::size_t>(parse_u64(th[0]));
      keys.push_back(parse_u64(th[1]));
      any_key = any_key || keys.back() != 0;
      std::vector<TreeNode> nodes(n);
      for (auto& node : nodes) {
        const auto f = r.expect("node", 6);
        node.feature = static_cast<int>(parse_i64(f[0]));
        node.threshold = parse_double(f[1]);
        node.left = static_cast<int>(parse_i64(f[2]));
        node.right = static_cast<int>(parse_i64(f[3]));
        node.value = parse_double(f[4]);
        node.samples = static_cast<std::uint32_t>(parse_u64(f[5]));
      }
      e.trees.emplace_back(std::move(nodes));
    }
    if (method == Method::forest || any_key) e.sample_keys = std::move(keys);
    reg = std::move(e);
  }
  r.expect("end", 0);
  return PayoutModel(method, h, seed, std::move(reg), rows);
}

PayoutModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file '" + path.string() + "'");
  return load_model(in);
}

}  // namespace indexins
