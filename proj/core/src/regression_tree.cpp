#include "indexins/regression_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "indexins/errors.hpp"

namespace indexins {

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  const int n = static_cast<int>(nodes_.size());
  if (n == 0) throw DataError("regression tree has no node");
  for (int i = 0; i < n; ++i) {
    const TreeNode& node = nodes_[i];
    if (!std::isfinite(node.value)) throw DataError("regression tree has a non-finite value");
    if (node.is_leaf()) continue;
    if (node.feature >= static_cast<int>(kFeatureCount)) {
      throw DataError("regression tree splits on an unknown column");
    }
    // Children are stored after their parent, which also rules out cycles.
    if (node.left <= i || node.left >= n || node.right <= i || node.right >= n) {
      throw DataError("regression tree has invalid child links");
    }
  }
}

int RegressionTree::leaf_of(const FeatureRow& x) const noexcept {
  int i = 0;
  while (!nodes_[i].is_leaf()) {
    const TreeNode& node = nodes_[i];
    i = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return i;
}

std::vector<int> RegressionTree::leaves() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
    if (nodes_[i].is_leaf()) out.push_back(i);
  }
  return out;
}

RegressionTree RegressionTree::with_leaf_values(std::span<const double> values_by_node) const {
  if (values_by_node.size() != nodes_.size()) {
    throw DomainError("with_leaf_values: one value per node expected");
  }
  std::vector<TreeNode> nodes = nodes_;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) nodes[i].value = values_by_node[i];
  }
  return RegressionTree(std::move(nodes));
}

RegressionTree RegressionTree::scaled(double factor) const {
  std::vector<TreeNode> nodes = nodes_;
  for (auto& node : nodes) node.value *= factor;
  return RegressionTree(std::move(nodes));
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int out = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    out = std::max(out, d[i]);
    if (!nodes_[i].is_leaf()) {
      d[nodes_[i].left] = d[i] + 1;
      d[nodes_[i].right] = d[i] + 1;
    }
  }
  return out;
}

PresortedDesign::PresortedDesign(const DesignMatrix& x)
    : x_(&x), order_(x.rows() * kFeatureCount) {
  const std::size_t n = x.rows();
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    auto first = order_.begin() + static_cast<std::ptrdiff_t>(c * n);
    std::iota(first, first + static_cast<std::ptrdiff_t>(n), 0u);
    const auto col = x.column(c);
    std::stable_sort(first, first + static_cast<std::ptrdiff_t>(n),
                     [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
  }
}

namespace {

class TreeGrower {
 public:
  TreeGrower(const PresortedDesign& design, std::span<const double> y,
             std::span<const std::uint32_t> rows, const TreeParams& params, Rng& rng)
      : x_(design.matrix()),
        y_(y),
        params_(params),
        rng_(rng),
        m_(rows.size()),
        lists_(kFeatureCount * rows.size()),
        scratch_(rows.size()),
        goes_left_(design.matrix().rows(), 0) {
    std::vector<std::uint32_t> multiplicity(x_.rows(), 0);
    for (auto r : rows) {
      if (r >= x_.rows()) throw DomainError("grow_tree: row index out of range");
      ++multiplicity[r];
    }
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      std::uint32_t* out = list(c);
      for (auto r : design.order(c)) {
        for (std::uint32_t k = 0; k < multiplicity[r]; ++k) *out++ = r;
      }
    }
  }

  RegressionTree grow() {
    build(0, m_, 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  std::uint32_t* list(std::size_t c) noexcept { return lists_.data() + c * m_; }

  std::vector<std::size_t> candidate_columns() {
    std::vector<std::size_t> cols(kFeatureCount);
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    const std::size_t k = params_.features_per_split;
    if (k == 0 || k >= kFeatureCount) return cols;
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.below(kFeatureCount - i));
      std::swap(cols[i], cols[j]);
    }
    cols.resize(k);
    std::sort(cols.begin(), cols.end());
    return cols;
  }

  int build(std::size_t begin, std::size_t end, int depth) {
    const std::size_t count = end - begin;
    const std::uint32_t* seg0 = list(0);
    double sum = 0.0;
    double sumsq = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = y_[seg0[i]];
      sum += v;
      sumsq += v * v;
    }
    const int id = static_cast<int>(nodes_.size());
    TreeNode leaf;
    leaf.value = count > 0 ? sum / static_cast<double>(count) : 0.0;
    leaf.samples = static_cast<std::uint32_t>(count);
    nodes_.push_back(leaf);

    const double node_sse = sumsq - sum * sum / static_cast<double>(count);
    if (depth >= params_.max_depth || count < params_.min_samples_split ||
        count < 2 * params_.min_samples_leaf || !(node_sse > 0.0)) {
      return id;
    }

    int best_col = -1;
    double best_gain = 1e-12 * node_sse;
    double best_threshold = 0.0;
    std::size_t best_left = 0;
    const double base = sum * sum / static_cast<double>(count);
    for (std::size_t c : candidate_columns()) {
      const std::uint32_t* seg = list(c);
      const auto col = x_.column(c);
      double left_sum = 0.0;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        left_sum += y_[seg[i]];
        const std::size_t nl = i + 1 - begin;
        const double xi = col[seg[i]];
        const double xn = col[seg[i + 1]];
        if (!(xi < xn)) continue;
        if (nl < params_.min_samples_leaf || count - nl < params_.min_samples_leaf) continue;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(count - nl) - base;
        if (gain > best_gain) {
          best_gain = gain;
          best_col = static_cast<int>(c);
          double mid = xi + 0.5 * (xn - xi);
          if (!(mid < xn)) mid = xi;
          best_threshold = mid;
          best_left = nl;
        }
      }
    }
    if (best_col < 0) return id;

    const auto split_col = x_.column(static_cast<std::size_t>(best_col));
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = seg0[i];
      goes_left_[r] = split_col[r] <= best_threshold ? 1 : 0;
    }
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      std::uint32_t* seg = list(c);
      std::size_t l = 0;
      std::size_t r = best_left;
      for (std::size_t i = begin; i < end; ++i) {
        const auto row = seg[i];
        if (goes_left_[row]) {
          scratch_[l++] = row;
        } else {
          scratch_[r++] = row;
        }
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(count),
                seg + begin);
    }

    nodes_[id].feature = best_col;
    nodes_[id].threshold = best_threshold;
    const int left = build(begin, begin + best_left, depth + 1);
    const int right = build(begin + best_left, end, depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  const DesignMatrix& x_;
  std::span<const double> y_;
  const TreeParams& params_;
  Rng& rng_;
  std::size_t m_;
  std::vector<std::uint32_t> lists_;
  std::vector<std::uint32_t> scratch_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

RegressionTree grow_tree(const PresortedDesign& design, std::span<const double> target,
                         std::span<const std::uint32_t> rows, const TreeParams& params,
                         Rng& rng) {
  if (target.size() != design.matrix().rows()) {
    throw DomainError("grow_tree: one target value per design row expected");
  }
  if (rows.empty()) throw DomainError("grow_tree: empty sample");
  if (params.max_depth < 0) throw ConfigError("grow_tree: max_depth must be >= 0");
  if (params.min_samples_leaf < 1) throw ConfigError("grow_tree: min_samples_leaf must be >= 1");
  TreeGrower grower(design, target, rows, params, rng);
  return grower.grow();
}

RegressionTree refit_leaves(const RegressionTree& tree, const DesignMatrix& x,
                            std::span<const double> target,
                            std::span<const std::uint32_t> rows) {
  const auto nodes = tree.nodes();
  std::vector<double> sums(nodes.size(), 0.0);
  std::vector<std::size_t> counts(nodes.size(), 0);
  for (auto r : rows) {
    const int leaf = tree.leaf_of(x.row(r));
    sums[leaf] += target[r];
    ++counts[leaf];
  }
  std::vector<double> values(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    values[i] = counts[i] > 0 ? sums[i] / static_cast<double>(counts[i]) : nodes[i].value;
  }
  return tree.with_leaf_values(values);
}

}  // namespace indexins
