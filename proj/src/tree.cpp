#include "mlltr/tree.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "mlltr/util.hpp"

namespace mlltr {

std::size_t RegressionTree::num_leaves() const {
  std::size_t n = 0;
  for (const auto& node : nodes_)
    if (node.is_leaf) ++n;
  return n;
}

void RegressionTree::serialize(std::ostream& out) const {
  out << "nodes " << nodes_.size() << '\n';
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.is_leaf) {
      out << "node " << i << " leaf " << format_double(n.value) << '\n';
    } else {
      out << "node " << i << " split " << n.split_feature << ' ' << format_double(n.threshold)
          << ' ' << n.left << ' ' << n.right << '\n';
    }
  }
}

RegressionTree RegressionTree::deserialize(std::istream& in) {
  std::string tok;
  std::size_t count = 0;
  if (!(in >> tok >> count) || tok != "nodes")
    throw std::runtime_error("tree: expected 'nodes <count>'");
  std::vector<Node> nodes(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t idx;
    std::string kind;
    if (!(in >> tok >> idx >> kind) || tok != "node" || idx != i)
      throw std::runtime_error("tree: malformed node line");
    Node n;
    if (kind == "leaf") {
      n.is_leaf = true;
      if (!(in >> n.value)) throw std::runtime_error("tree: bad leaf value");
    } else if (kind == "split") {
      n.is_leaf = false;
      if (!(in >> n.split_feature >> n.threshold >> n.left >> n.right))
        throw std::runtime_error("tree: bad split node");
    } else {
      throw std::runtime_error("tree: unknown node kind '" + kind + "'");
    }
    nodes[i] = n;
  }
  if (nodes.empty()) throw std::runtime_error("tree: no nodes");
  return RegressionTree(std::move(nodes));
}

namespace {

struct SplitCandidate {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  double left_sum = 0.0;
  std::size_t left_count = 0;
};

struct PendingSplit {
  double gain;
  std::uint32_t order;  // leaf creation order, for deterministic ties
  int node;
  SplitCandidate cand;
};

struct PendingCompare {
  bool operator()(const PendingSplit& a, const PendingSplit& b) const {
    if (a.gain != b.gain) return a.gain < b.gain;  // max-heap on gain
    return a.order > b.order;                      // then earliest leaf first
  }
};

class Builder {
 public:
  Builder(const std::vector<double>& x, std::size_t p,
          const std::vector<std::vector<std::uint32_t>>& presorted,
          const std::vector<double>& targets, const TreeFitConfig& cfg)
      : x_(x), p_(p), presorted_(presorted), t_(targets), cfg_(cfg), m_(targets.size()) {}

  RegressionTree build() {
    row_node_.assign(m_, 0);
    double sum = 0.0;
    for (double v : t_) sum += v;
    new_leaf(sum, m_, 0);

    std::priority_queue<PendingSplit, std::vector<PendingSplit>, PendingCompare> heap;
    std::uint32_t order = 0;
    enqueue(0, order++, &heap);

    std::size_t leaves = 1;
    while (leaves < static_cast<std::size_t>(cfg_.max_leaves) && !heap.empty()) {
      PendingSplit best = heap.top();
      heap.pop();
      apply_split(best.node, best.cand);
      ++leaves;
      enqueue(nodes_[best.node].left, order++, &heap);
      enqueue(nodes_[best.node].right, order++, &heap);
    }
    return RegressionTree(std::move(nodes_));
  }

 private:
  int new_leaf(double sum, std::size_t count, int depth) {
    RegressionTree::Node n;
    n.is_leaf = true;
    n.value = sum / static_cast<double>(count);
    nodes_.push_back(n);
    node_sum_.push_back(sum);
    node_count_.push_back(count);
    node_depth_.push_back(depth);
    return static_cast<int>(nodes_.size()) - 1;
  }

  void enqueue(int node, std::uint32_t order,
               std::priority_queue<PendingSplit, std::vector<PendingSplit>, PendingCompare>* heap) {
    if (node_depth_[node] >= cfg_.max_depth) return;
    if (node_count_[node] < 2 * static_cast<std::size_t>(cfg_.min_samples_leaf)) return;
    SplitCandidate cand = find_best_split(node);
    if (cand.valid) heap->push(PendingSplit{cand.gain, order, node, cand});
  }

  SplitCandidate find_best_split(int node) const {
    SplitCandidate best;
    const double total_sum = node_sum_[node];
    const std::size_t total_count = node_count_[node];
    const double parent_score = total_sum * total_sum / static_cast<double>(total_count);
    const std::size_t msl = static_cast<std::size_t>(cfg_.min_samples_leaf);

    double node_sumsq = 0.0;
    for (std::size_t r = 0; r < m_; ++r)
      if (row_node_[r] == node) node_sumsq += t_[r] * t_[r];
    const double min_gain = 1e-12 * std::max(1.0, node_sumsq);

    for (std::size_t f = 0; f < p_; ++f) {
      double left_sum = 0.0;
      std::size_t left_count = 0;
      double prev_value = 0.0;
      bool have_prev = false;
      for (std::uint32_t r : presorted_[f]) {
        if (row_node_[r] != node) continue;
        const double v = x_[r * p_ + f];
        if (have_prev && v != prev_value && left_count >= msl &&
            total_count - left_count >= msl) {
          const double right_sum = total_sum - left_sum;
          const std::size_t right_count = total_count - left_count;
          const double gain = left_sum * left_sum / static_cast<double>(left_count) +
                              right_sum * right_sum / static_cast<double>(right_count) -
                              parent_score;
          if (gain > min_gain && gain > best.gain) {
            double threshold = prev_value + (v - prev_value) / 2.0;
            // Midpoint can round onto the right value when neighbors are
            // adjacent floats; fall back to the left value so the cut stays
            // consistent with the evaluated partition.
            if (!(prev_value <= threshold && threshold < v)) threshold = prev_value;
            best.valid = true;
            best.feature = static_cast<int>(f);
            best.threshold = threshold;
            best.gain = gain;
            best.left_sum = left_sum;
            best.left_count = left_count;
          }
        }
        left_sum += t_[r];
        ++left_count;
        prev_value = v;
        have_prev = true;
      }
    }
    return best;
  }

  void apply_split(int node, const SplitCandidate& cand) {
    const double right_sum = node_sum_[node] - cand.left_sum;
    const std::size_t right_count = node_count_[node] - cand.left_count;
    const int depth = node_depth_[node];
    const int left = new_leaf(cand.left_sum, cand.left_count, depth + 1);
    const int right = new_leaf(right_sum, right_count, depth + 1);
    nodes_[node].is_leaf = false;
    nodes_[node].split_feature = cand.feature;
    nodes_[node].threshold = cand.threshold;
    nodes_[node].left = left;
    nodes_[node].right = right;
    for (std::size_t r = 0; r < m_; ++r) {
      if (row_node_[r] != node) continue;
      row_node_[r] = (x_[r * p_ + cand.feature] <= cand.threshold) ? left : right;
    }
  }

  const std::vector<double>& x_;
  const std::size_t p_;
  const std::vector<std::vector<std::uint32_t>>& presorted_;
  const std::vector<double>& t_;
  const TreeFitConfig cfg_;
  const std::size_t m_;

  std::vector<int> row_node_;
  std::vector<RegressionTree::Node> nodes_;
  std::vector<double> node_sum_;
  std::vector<std::size_t> node_count_;
  std::vector<int> node_depth_;
};

}  // namespace

TreeFitter::TreeFitter(const std::vector<double>& features, std::size_t feature_dim)
    : features_(features), feature_dim_(feature_dim) {
  if (feature_dim_ == 0) throw std::invalid_argument("TreeFitter: feature_dim must be positive");
  if (features_.size() % feature_dim_ != 0)
    throw std::invalid_argument("TreeFitter: feature matrix shape mismatch");
  num_rows_ = features_.size() / feature_dim_;
  if (num_rows_ == 0) throw std::invalid_argument("TreeFitter: empty training data");
  presorted_.resize(feature_dim_);
  for (std::size_t f = 0; f < feature_dim_; ++f) {
    auto& ord = presorted_[f];
    ord.resize(num_rows_);
    std::iota(ord.begin(), ord.end(), 0u);
    std::stable_sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
      return features_[a * feature_dim_ + f] < features_[b * feature_dim_ + f];
    });
  }
}

RegressionTree TreeFitter::fit(const std::vector<double>& targets,
                               const TreeFitConfig& config) const {
  if (targets.size() != num_rows_)
    throw std::invalid_argument("fit_tree: target count does not match rows");
  for (double v : targets)
    if (!std::isfinite(v)) throw std::invalid_argument("fit_tree: non-finite target");
  if (config.max_leaves < 1 || config.min_samples_leaf < 1)
    throw std::invalid_argument("fit_tree: bad config");
  Builder builder(features_, feature_dim_, presorted_, targets, config);
  return builder.build();
}

RegressionTree fit_tree(const std::vector<double>& features, std::size_t feature_dim,
                        const std::vector<double>& targets, const TreeFitConfig& config) {
  TreeFitter fitter(features, feature_dim);
  return fitter.fit(targets, config);
}

}  // namespace mlltr
