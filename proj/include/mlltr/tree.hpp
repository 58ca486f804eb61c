#ifndef MLLTR_TREE_HPP_
#define MLLTR_TREE_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace mlltr {

/*!
 * \brief Binary regression tree over dense feature rows.
 *
 * Nodes are stored in a flat array; node 0 is the root. An item goes left
 * when feature[split_feature] <= threshold.
 */
class RegressionTree {
 public:
  struct Node {
    bool is_leaf = true;
    int split_feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf prediction (mean of targets in leaf)
  };

  RegressionTree() { nodes_.push_back(Node{}); }
  explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  double predict(const double* features) const {
    int node = 0;
    while (!nodes_[node].is_leaf) {
      const Node& n = nodes_[node];
      node = (features[n.split_feature] <= n.threshold) ? n.left : n.right;
    }
    return nodes_[node].value;
  }
  double predict(const std::vector<double>& features) const { return predict(features.data()); }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t num_leaves() const;

  void serialize(std::ostream& out) const;
  static RegressionTree deserialize(std::istream& in);

 private:
  std::vector<Node> nodes_;
};

/*! \brief Limits for greedy tree induction. */
struct TreeFitConfig {
  int max_leaves = 15;
  int max_depth = 5;
  int min_samples_leaf = 1;
};

/*!
 * \brief Exact greedy variance-reduction tree fitter on a fixed feature
 * matrix (row-major M x p).
 *
 * Feature columns are presorted once at construction so repeated fits with
 * fresh targets (the boosting loop) stay cheap. Growth is best-first:
 * the split with the largest variance reduction is expanded first, ties
 * breaking to the earliest-created leaf, and within a node to the lowest
 * feature index, then lowest threshold. Leaves predict the target mean.
 * All-constant features yield a single-leaf tree.
 */
class TreeFitter {
 public:
  TreeFitter(const std::vector<double>& features, std::size_t feature_dim);

  RegressionTree fit(const std::vector<double>& targets, const TreeFitConfig& config) const;

  std::size_t num_rows() const { return num_rows_; }
  std::size_t feature_dim() const { return feature_dim_; }

 private:
  std::vector<double> features_;
  std::size_t feature_dim_;
  std::size_t num_rows_;
  std::vector<std::vector<std::uint32_t>> presorted_;
};

/*! \brief One-shot convenience wrapper around TreeFitter. */
RegressionTree fit_tree(const std::vector<double>& features, std::size_t feature_dim,
                        const std::vector<double>& targets, const TreeFitConfig& config);

}  // namespace mlltr

#endif  // MLLTR_TREE_HPP_
