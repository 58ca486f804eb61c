#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mlltr/ensemble.hpp"
#include "mlltr/tree.hpp"

using namespace mlltr;

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double tree_mse(const RegressionTree& tree, const std::vector<double>& x, std::size_t p,
                const std::vector<double>& t) {
  double mse = 0.0;
  const std::size_t m = t.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double e = tree.predict(x.data() + i * p) - t[i];
    mse += e * e;
  }
  return mse / static_cast<double>(m);
}

// Exhaustive stump oracle: best single split over every feature and every
// boundary between sorted values.
double best_stump_mse(const std::vector<double>& x, std::size_t p, const std::vector<double>& t) {
  const std::size_t m = t.size();
  double mean = 0.0;
  for (double v : t) mean += v;
  mean /= static_cast<double>(m);
  double best_sse = 0.0;
  for (double v : t) best_sse += (v - mean) * (v - mean);

  for (std::size_t f = 0; f < p; ++f) {
    std::vector<double> values;
    for (std::size_t i = 0; i < m; ++i) values.push_back(x[i * p + f]);
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t c = 0; c + 1 < m; ++c) {
      if (sorted[c] == sorted[c + 1]) continue;
      const double thr = (sorted[c] + sorted[c + 1]) / 2.0;
      double sl = 0, sr = 0;
      std::size_t nl = 0, nr = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (values[i] <= thr) {
          sl += t[i];
          ++nl;
        } else {
          sr += t[i];
          ++nr;
        }
      }
      const double ml = sl / nl, mr = sr / nr;
      double sse = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double pred = values[i] <= thr ? ml : mr;
        sse += (t[i] - pred) * (t[i] - pred);
      }
      best_sse = std::min(best_sse, sse);
    }
  }
  return best_sse / static_cast<double>(m);
}

}  // namespace

TEST_CASE("constant targets give a single leaf") {
  const std::vector<double> x{0.1, 0.9, 0.4, 0.3};  // 4 rows, 1 feature
  const std::vector<double> t{2.5, 2.5, 2.5, 2.5};
  TreeFitConfig cfg;
  const auto tree = fit_tree(x, 1, t, cfg);
  CHECK(tree.num_leaves() == 1);
  CHECK(tree.predict(std::vector<double>{0.7}) == doctest::Approx(2.5));
}

TEST_CASE("all-constant features give a single leaf, not an error") {
  const std::vector<double> x{1.0, 1.0, 1.0};
  const std::vector<double> t{0.0, 1.0, 2.0};
  TreeFitConfig cfg;
  const auto tree = fit_tree(x, 1, t, cfg);
  CHECK(tree.num_leaves() == 1);
  CHECK(tree.predict(std::vector<double>{1.0}) == doctest::Approx(1.0));
}

TEST_CASE("perfectly separable stump") {
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> t{0.0, 0.0, 1.0, 1.0};
  TreeFitConfig cfg;
  cfg.max_depth = 1;
  cfg.max_leaves = 2;
  const auto tree = fit_tree(x, 1, t, cfg);
  REQUIRE(tree.num_leaves() == 2);
  CHECK(tree.predict(std::vector<double>{0.5}) == doctest::Approx(0.0));
  CHECK(tree.predict(std::vector<double>{2.5}) == doctest::Approx(1.0));
  const auto& root = tree.nodes()[0];
  CHECK(root.threshold == doctest::Approx(1.5));
}

TEST_CASE("depth-2 tree beats the best oracle stump") {
  std::mt19937_64 rng(42);
  const std::size_t m = 200, p = 5;
  std::vector<double> x(m * p), t(m);
  for (auto& v : x) v = uniform01(rng);
  for (std::size_t i = 0; i < m; ++i)
    t[i] = std::sin(4.0 * x[i * p]) + 0.5 * x[i * p + 2] + 0.1 * uniform01(rng);
  TreeFitConfig cfg;
  cfg.max_depth = 2;
  cfg.max_leaves = 4;
  const auto tree = fit_tree(x, p, t, cfg);
  CHECK(tree_mse(tree, x, p, t) <= best_stump_mse(x, p, t) + 1e-12);
}

TEST_CASE("min_samples_leaf is respected") {
  std::mt19937_64 rng(9);
  const std::size_t m = 40;
  std::vector<double> x(m), t(m);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = uniform01(rng);
    t[i] = uniform01(rng);
  }
  TreeFitConfig cfg;
  cfg.max_depth = 8;
  cfg.max_leaves = 64;
  cfg.min_samples_leaf = 5;
  const auto tree = fit_tree(x, 1, t, cfg);
  std::vector<int> counts(tree.nodes().size(), 0);
  for (std::size_t i = 0; i < m; ++i) {
    int node = 0;
    while (!tree.nodes()[node].is_leaf) {
      const auto& nd = tree.nodes()[node];
      node = x[i] <= nd.threshold ? nd.left : nd.right;
    }
    counts[node]++;
  }
  for (std::size_t n = 0; n < tree.nodes().size(); ++n)
    if (tree.nodes()[n].is_leaf) CHECK(counts[n] >= 5);
}

TEST_CASE("max_leaves caps growth") {
  std::mt19937_64 rng(1);
  const std::size_t m = 100;
  std::vector<double> x(m), t(m);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = uniform01(rng);
    t[i] = uniform01(rng);
  }
  TreeFitConfig cfg;
  cfg.max_depth = 20;
  cfg.max_leaves = 6;
  const auto tree = fit_tree(x, 1, t, cfg);
  CHECK(tree.num_leaves() <= 6);
}

TEST_CASE("non-finite targets are rejected") {
  TreeFitConfig cfg;
  CHECK_THROWS_AS(
      fit_tree({1.0, 2.0}, 1, {0.0, std::numeric_limits<double>::quiet_NaN()}, cfg),
      std::invalid_argument);
}

TEST_CASE("ensemble predict follows init_score - sum eta * tree") {
  TreeEnsemble e;
  e.feature_dim = 1;
  e.init_score = 3.0;
  CHECK(e.predict(std::vector<double>{0.0}) == doctest::Approx(3.0));  // empty tree list

  const auto stump = fit_tree({0.0, 1.0}, 1, {0.0, 1.0}, TreeFitConfig{2, 1, 1});
  e.trees.push_back(stump);
  e.learning_rates.push_back(0.5);
  CHECK(e.predict(std::vector<double>{1.0}) == doctest::Approx(3.0 - 0.5 * 1.0));
  CHECK(e.predict(std::vector<double>{0.0}) == doctest::Approx(3.0 - 0.5 * 0.0));
}

TEST_CASE("predict rejects dimension mismatch") {
  TreeEnsemble e;
  e.feature_dim = 3;
  CHECK_THROWS_AS(e.predict(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("serialization round-trips predictions on 1000 random vectors") {
  std::mt19937_64 rng(123);
  const std::size_t m = 300, p = 4;
  std::vector<double> x(m * p), t(m);
  for (auto& v : x) v = uniform01(rng);
  for (std::size_t i = 0; i < m; ++i) t[i] = std::cos(3.0 * x[i * p + 1]) + x[i * p + 3];

  TreeEnsemble e;
  e.feature_dim = p;
  TreeFitter fitter(x, p);
  TreeFitConfig cfg;
  cfg.max_depth = 4;
  cfg.max_leaves = 10;
  std::vector<double> residual = t;
  for (int round = 0; round < 5; ++round) {
    const auto tree = fitter.fit(residual, cfg);
    for (std::size_t i = 0; i < m; ++i) residual[i] -= 0.3 * tree.predict(x.data() + i * p);
    e.trees.push_back(tree);
    e.learning_rates.push_back(0.3);
  }

  std::stringstream buffer;
  e.serialize(buffer);
  const TreeEnsemble e2 = TreeEnsemble::deserialize(buffer);
  REQUIRE(e2.trees.size() == e.trees.size());
  std::vector<double> probe(p);
  for (int trial = 0; trial < 1000; ++trial) {
    for (auto& v : probe) v = uniform01(rng) * 2.0 - 0.5;
    const double a = e.predict(probe);
    const double b = e2.predict(probe);
    CHECK(a == b);  // text format must round-trip bit-exactly
  }
  CHECK(e.serialize_to_string() == e2.serialize_to_string());
}
