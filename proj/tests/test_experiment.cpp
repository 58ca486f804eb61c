#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mlltr/experiment.hpp"
#include "mlltr/pareto.hpp"

using namespace mlltr;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny_grid_config(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.synthetic = true;
  cfg.synth.num_queries = 24;
  cfg.synth.items_per_query = 8;
  cfg.synth_test_queries = 12;
  cfg.methods = {{CombinatorKind::kLS, false}, {CombinatorKind::kWC, false},
                 {CombinatorKind::kWC, true}};
  cfg.n_preferences = 2;
  cfg.seeds = {1, 2};
  cfg.gbm.n_trees = 12;
  cfg.gbm.learning_rate = 0.25 * 24;  // effective step 0.25 after the 1/m in the gradients
  cfg.gbm.tree.max_leaves = 6;
  cfg.gbm.tree.max_depth = 3;
  cfg.output_dir = out_dir;
  return cfg;
}

}  // namespace

TEST_CASE("generate_rays K=2 hand trigonometry") {
  // Baselines at (1,3) and (3,1): angles atan(3)..atan(1/3), middle ray 45 deg.
  const std::vector<Eigen::VectorXd> baselines{vec2(1, 3), vec2(3, 1)};
  const auto rays = generate_rays(baselines, 5);
  REQUIRE(rays.size() == 5);
  CHECK(rays[2].isApprox(vec2(0.5, 0.5), 1e-9));

  // Directions sorted by angle with equal angular gaps.
  std::vector<double> angles;
  for (const auto& r : rays) {
    const Eigen::VectorXd d = r.cwiseInverse();
    angles.push_back(std::atan2(d[1], d[0]));
  }
  for (std::size_t i = 1; i < angles.size(); ++i) CHECK(angles[i] > angles[i - 1]);
  const double gap = angles[1] - angles[0];
  for (std::size_t i = 1; i + 1 < angles.size(); ++i)
    CHECK(angles[i + 1] - angles[i] == doctest::Approx(gap).epsilon(1e-9));

  // Strictly inside the baseline angles.
  const double lo = std::atan2(1.0, 3.0), hi = std::atan2(3.0, 1.0);
  for (double a : angles) {
    CHECK(a > lo);
    CHECK(a < hi);
  }
}

TEST_CASE("generate_rays near-axis baselines center on the diagonal") {
  const std::vector<Eigen::VectorXd> baselines{vec2(1.0, 1e-9), vec2(1e-9, 1.0)};
  const auto rays = generate_rays(baselines, 1);
  REQUIRE(rays.size() == 1);
  CHECK(rays[0].isApprox(vec2(0.5, 0.5), 1e-6));
}

TEST_CASE("generate_rays outputs are positive and pairwise distinct") {
  const std::vector<Eigen::VectorXd> baselines{vec2(0.8, 2.5), vec2(2.0, 0.6)};
  const auto rays = generate_rays(baselines, 5);
  for (const auto& r : rays) CHECK(r.minCoeff() > 0.0);
  for (std::size_t i = 0; i < rays.size(); ++i)
    for (std::size_t j = i + 1; j < rays.size(); ++j)
      CHECK((rays[i] - rays[j]).norm() > 1e-12);
}

TEST_CASE("generate_rays colinear fallback warns and yields uniform weights") {
  const std::vector<Eigen::VectorXd> baselines{vec2(1, 1), vec2(2, 2)};
  const auto rays = generate_rays(baselines, 3);
  for (const auto& r : rays) CHECK(r.isApprox(vec2(0.5, 0.5), 1e-12));
}

TEST_CASE("generate_rays K=3 barycentric interior grid") {
  Eigen::VectorXd b1(3), b2(3), b3(3);
  b1 << 0.5, 2.0, 2.2;
  b2 << 2.1, 0.6, 2.0;
  b3 << 2.0, 2.2, 0.5;
  const auto rays = generate_rays({b1, b2, b3}, 25);
  REQUIRE(rays.size() == 25);
  for (const auto& r : rays) {
    CHECK(r.size() == 3);
    CHECK(r.minCoeff() > 0.0);
    CHECK(std::abs(r.sum() - 1.0) < 1e-9);
  }
  for (std::size_t i = 0; i < rays.size(); ++i)
    for (std::size_t j = i + 1; j < rays.size(); ++j)
      CHECK((rays[i] - rays[j]).norm() > 1e-12);
}

TEST_CASE("generate_epsilon_bounds spacing") {
  // n=1: half the baseline cost per secondary.
  auto sets = generate_epsilon_bounds(vec2(2.0, 4.0), 0, 1);
  REQUIRE(sets.size() == 1);
  CHECK(sets[0][0] == doctest::Approx(2.0));

  // n=3 with baseline c_2 = 4: bounds {1, 2, 3}.
  sets = generate_epsilon_bounds(vec2(2.0, 4.0), 0, 3);
  REQUIRE(sets.size() == 3);
  CHECK(sets[0][0] == doctest::Approx(1.0));
  CHECK(sets[1][0] == doctest::Approx(2.0));
  CHECK(sets[2][0] == doctest::Approx(3.0));

  // K=3, n=2: two sets with two entries each.
  Eigen::VectorXd b(3);
  b << 1.0, 2.0, 3.0;
  sets = generate_epsilon_bounds(b, 1, 2);
  REQUIRE(sets.size() == 2);
  for (const auto& s : sets) CHECK(s.size() == 2);
  CHECK(sets[0][0] == doctest::Approx(1.0 / 3.0));  // secondary 0
  CHECK(sets[0][1] == doctest::Approx(1.0));        // secondary 2
}

TEST_CASE("single-objective baselines minimize their own label") {
  SyntheticConfig sc;
  sc.num_queries = 40;
  sc.items_per_query = 10;
  sc.seed = 2;
  const MultiLabelDataset ds = make_synthetic_conflict(sc);
  GBMConfig gbm;
  gbm.n_trees = 40;
  gbm.learning_rate = 0.25 * static_cast<double>(ds.num_queries());
  gbm.tree.max_leaves = 8;
  gbm.tree.max_depth = 3;
  const BaselineResult bl = single_objective_baselines(ds, gbm, {LossConfig{}});
  REQUIRE(bl.costs.size() == 2);
  // Baseline k attains the minimum c_k among all baselines.
  CHECK(bl.costs[0][0] < bl.costs[1][0]);
  CHECK(bl.costs[1][1] < bl.costs[0][1]);
}

TEST_CASE("duplicate labels give matching baselines") {
  SyntheticConfig sc;
  sc.num_queries = 20;
  sc.items_per_query = 8;
  sc.seed = 4;
  const MultiLabelDataset ds = make_synthetic_conflict(sc).select_labels({0, 0});
  GBMConfig gbm;
  gbm.n_trees = 20;
  gbm.learning_rate = 0.25 * 20;
  gbm.tree.max_leaves = 6;
  gbm.tree.max_depth = 3;
  const BaselineResult bl = single_objective_baselines(ds, gbm, {LossConfig{}});
  CHECK((bl.costs[0] - bl.costs[1]).norm() == 0.0);  // same data, same seed
}

TEST_CASE("run_grid emits one row per cell and self-consistent MWL") {
  ExperimentConfig cfg = tiny_grid_config("test-grid-out");
  const GridOutcome outcome = run_grid(cfg);
  CHECK(outcome.total_cells == 3 * 2 * 2);  // methods x prefs x seeds
  CHECK(outcome.failed_cells == 0);
  CHECK(static_cast<int>(outcome.runs.size()) == outcome.total_cells);

  for (const auto& rec : outcome.runs) {
    REQUIRE(rec.ok);
    if (rec.has_mwl) {
      CHECK(rec.mwl_test ==
            doctest::Approx(mwl(rec.test_costs, rec.preference_weights)).epsilon(1e-12));
    }
  }
  CHECK(std::filesystem::exists(outcome.runs_csv));
  CHECK(std::filesystem::exists(outcome.aggregate_csv));
  CHECK(std::filesystem::exists(outcome.baselines_csv));
  CHECK(std::filesystem::exists(cfg.output_dir + "/resolved_config.json"));
  std::filesystem::remove_all(cfg.output_dir);
}

TEST_CASE("run_grid reruns byte-identically") {
  ExperimentConfig cfg_a = tiny_grid_config("test-grid-a");
  cfg_a.workers = 2;  // reruns must not depend on scheduling
  ExperimentConfig cfg_b = tiny_grid_config("test-grid-b");
  const GridOutcome a = run_grid(cfg_a);
  const GridOutcome b = run_grid(cfg_b);
  CHECK(slurp(a.runs_csv) == slurp(b.runs_csv));
  CHECK(slurp(a.aggregate_csv) == slurp(b.aggregate_csv));
  CHECK(slurp(a.baselines_csv) == slurp(b.baselines_csv));
  std::filesystem::remove_all(cfg_a.output_dir);
  std::filesystem::remove_all(cfg_b.output_dir);
}

TEST_CASE("config JSON round-trip") {
  ExperimentConfig cfg = tiny_grid_config("cfg-out");
  cfg.label_subsets = {{0, 1}};
  cfg.nu = 0.2;
  const std::string text = cfg.to_json();
  const ExperimentConfig back = ExperimentConfig::from_json(text);
  CHECK(back.synthetic == cfg.synthetic);
  CHECK(back.synth.num_queries == cfg.synth.num_queries);
  CHECK(back.methods.size() == cfg.methods.size());
  CHECK(back.methods[2].smoothing == true);
  CHECK(back.n_preferences == cfg.n_preferences);
  CHECK(back.seeds == cfg.seeds);
  CHECK(back.nu == cfg.nu);
  CHECK(back.label_subsets == cfg.label_subsets);
  CHECK(back.gbm.n_trees == cfg.gbm.n_trees);
}

TEST_CASE("config validation rejects bad grids") {
  ExperimentConfig cfg = tiny_grid_config("x");
  cfg.n_preferences = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = tiny_grid_config("x");
  cfg.seeds.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = tiny_grid_config("x");
  cfg.methods.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = tiny_grid_config("x");
  cfg.label_subsets = {{7}};
  CHECK_THROWS_AS(run_grid(cfg), std::invalid_argument);
}

TEST_CASE("reference_rays span the quadrant around the reference") {
  const auto rays = reference_rays(vec2(0.6, 0.9), 5);
  REQUIRE(rays.size() == 5);
  for (const auto& r : rays) {
    CHECK(r.minCoeff() > 0.0);
    CHECK(std::abs(r.sum() - 1.0) < 1e-9);
  }
}

TEST_CASE("explore_from_reference on non-conflicting labels stays near the reference") {
  ExperimentConfig cfg;
  cfg.synthetic = true;
  cfg.synth.num_queries = 30;
  cfg.synth.items_per_query = 8;
  cfg.methods = {{CombinatorKind::kWC, true}};
  cfg.n_preferences = 2;
  cfg.seeds = {5};
  cfg.gbm.n_trees = 40;
  cfg.gbm.learning_rate = 0.25 * 30;
  cfg.gbm.tree.max_leaves = 6;
  cfg.gbm.tree.max_depth = 3;
  cfg.output_dir = "test-ref-out";
  cfg.label_subsets = {{0, 0}};  // duplicate label: no conflict

  // Fully trained reference on the same workload.
  SyntheticConfig sc = cfg.synth;
  sc.seed = cfg.seeds.front();
  const MultiLabelDataset ds = make_synthetic_conflict(sc).select_labels({0, 0});
  GBMConfig gbm = cfg.gbm;
  gbm.rng_seed = cfg.seeds.front();
  const TrainResult ref = train(ds, Preference::priorities(vec2(0.5, 0.5)), CombinatorKind::kLS,
                                gbm, {cfg.loss});

  const ReferenceOutcome outcome = explore_from_reference(cfg, ref.ensemble);
  REQUIRE(outcome.runs.size() == 2);
  for (const auto& run : outcome.runs) {
    // Both labels identical and the reference fully trained: improvements
    // stay a small fraction of the reference loss.
    for (Eigen::Index k = 0; k < run.improvement.size(); ++k)
      CHECK(std::abs(run.improvement[k]) <= 0.2 * outcome.reference_losses[k]);
  }
  CHECK(std::filesystem::exists(outcome.report_csv));
  std::filesystem::remove_all(cfg.output_dir);
}

TEST_CASE("explore_from_reference rejects an empty preference list") {
  ExperimentConfig cfg = tiny_grid_config("x2");
  cfg.n_preferences = 0;
  TreeEnsemble dummy;
  dummy.feature_dim = 10;
  CHECK_THROWS_AS(explore_from_reference(cfg, dummy), std::invalid_argument);
}

TEST_CASE("explore_from_reference rejects configs without wc methods") {
  ExperimentConfig cfg = tiny_grid_config("x3");
  cfg.methods = {{CombinatorKind::kLS, false}};
  SyntheticConfig sc = cfg.synth;
  sc.seed = 1;
  const MultiLabelDataset ds = make_synthetic_conflict(sc);
  GBMConfig gbm = cfg.gbm;
  const TrainResult ref =
      train(ds, Preference::priorities(vec2(0.5, 0.5)), CombinatorKind::kLS, gbm, {cfg.loss});
  CHECK_THROWS_AS(explore_from_reference(cfg, ref.ensemble), std::invalid_argument);
}
