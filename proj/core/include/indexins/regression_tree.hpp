#ifndef INDEXINS_REGRESSION_TREE_HPP
#define INDEXINS_REGRESSION_TREE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "indexins/features.hpp"
#include "indexins/random.hpp"

namespace indexins {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;  // taken when x[feature] <= threshold
  int right = -1;
  double value = 0.0;
  std::uint32_t samples = 0;  // training rows (with bootstrap multiplicity)

  bool is_leaf() const noexcept { return feature < 0; }
};

/// Binary CART regression tree stored as a flat node array, root at 0.
class RegressionTree {
 public:
  RegressionTree() = default;
  /// Validates child links and feature indices; throws DataError.
  explicit RegressionTree(std::vector<TreeNode> nodes);

  std::span<const TreeNode> nodes() const noexcept { return nodes_; }
  bool empty() const noexcept { return nodes_.empty(); }

  int leaf_of(const FeatureRow& x) const noexcept;
  double predict(const FeatureRow& x) const noexcept { return nodes_[leaf_of(x)].value; }

  std::vector<int> leaves() const;

  /// Same partition, new leaf values (indexed by node id; non-leaves ignored).
  RegressionTree with_leaf_values(std::span<const double> values_by_node) const;

  /// Multiplies every node value by `factor`.
  RegressionTree scaled(double factor) const;

  int depth() const;

 private:
  std::vector<TreeNode> nodes_;
};

struct TreeParams {
  int max_depth = 6;
  std::size_t min_samples_leaf = 5;
  std::size_t min_samples_split = 10;
  // Candidate columns drawn per split; 0 or >= kFeatureCount means all.
  std::size_t features_per_split = 0;
};

/// Global per-column sort order of a design matrix, computed once and shared
/// by every tree grown on it.
class PresortedDesign {
 public:
  explicit PresortedDesign(const DesignMatrix& x);

  const DesignMatrix& matrix() const noexcept { return *x_; }
  std::span<const std::uint32_t> order(std::size_t col) const noexcept {
    return {order_.data() + col * x_->rows(), x_->rows()};
  }

 private:
  const DesignMatrix* x_;
  std::vector<std::uint32_t> order_;
};

/// Grows a least-squares tree on `target` using the listed rows (duplicates
/// allowed, as in a bootstrap sample). Exact split search over all distinct
/// thresholds; ties resolved towards the lower column and lower threshold.
/// `rng` is only consulted when features_per_split restricts the columns.
RegressionTree grow_tree(const PresortedDesign& design, std::span<const double> target,
                         std::span<const std::uint32_t> rows, const TreeParams& params,
                         Rng& rng);

/// Leaf value = mean of `target` over the listed rows reaching that leaf.
/// Leaves no listed row reaches keep their previous value.
RegressionTree refit_leaves(const RegressionTree& tree, const DesignMatrix& x,
                            std::span<const double> target,
                            std::span<const std::uint32_t> rows);

}  // namespace indexins

#endif  // INDEXINS_REGRESSION_TREE_HPP
