#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "mlltr/synthetic.hpp"
#include "mlltr/trainer.hpp"

using namespace mlltr;

namespace {

MultiLabelDataset small_synth(std::uint64_t seed, std::size_t queries = 30) {
  SyntheticConfig sc;
  sc.num_queries = queries;
  sc.items_per_query = 10;
  sc.seed = seed;
  return make_synthetic_conflict(sc);
}

GBMConfig fast_gbm(int trees) {
  GBMConfig gbm;
  gbm.n_trees = trees;
  gbm.learning_rate = 0.2;
  gbm.tree.max_leaves = 8;
  gbm.tree.max_depth = 3;
  return gbm;
}

Eigen::VectorXd unit(std::size_t k, std::size_t idx) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  r[static_cast<Eigen::Index>(idx)] = 1.0;
  return r;
}

}  // namespace

TEST_CASE("single-objective cost decreases monotonically at a small rate") {
  const MultiLabelDataset ds = small_synth(3).select_labels({0});
  GBMConfig gbm = fast_gbm(100);
  // Gradient columns carry the 1/m cost normalization, so the step size in
  // score space is learning_rate / m; pick a small effective step.
  gbm.learning_rate = 0.05 * static_cast<double>(ds.num_queries());
  LossConfig smooth;
  smooth.use_delta_ndcg = false;  // the RankNet cost is smooth in the scores
  const Preference pref = Preference::priorities(Eigen::VectorXd::Ones(1));
  const TrainResult result = train(ds, pref, CombinatorKind::kLS, gbm, {smooth});

  const auto& costs = result.trace.costs;
  REQUIRE(costs.size() > 10);
  int increases = 0;
  for (std::size_t t = 1; t < costs.size(); ++t)
    if (costs[t][0] > costs[t - 1][0] * (1.0 + 1e-12)) ++increases;
  CHECK(increases <= static_cast<int>(costs.size()) / 50);  // <= 2% transient increases
  CHECK(costs.back()[0] < costs.front()[0]);
}

TEST_CASE("LS with r = e_k matches single-objective training bitwise") {
  const MultiLabelDataset both = small_synth(5);
  const GBMConfig gbm = fast_gbm(40);
  const std::vector<LossConfig> losses{LossConfig{}};

  for (std::size_t k = 0; k < 2; ++k) {
    const TrainResult multi =
        train(both, Preference::priorities(unit(2, k)), CombinatorKind::kLS, gbm, losses);
    const TrainResult single =
        train(both.select_labels({k}), Preference::priorities(Eigen::VectorXd::Ones(1)),
              CombinatorKind::kLS, gbm, losses);
    CHECK(multi.ensemble.serialize_to_string() == single.ensemble.serialize_to_string());
  }
}

TEST_CASE("every traced coefficient vector sits on the simplex") {
  const MultiLabelDataset ds = small_synth(7);
  const GBMConfig gbm = fast_gbm(25);
  const Preference pref = Preference::priorities(Eigen::VectorXd::Constant(2, 0.5));
  for (CombinatorKind kind : {CombinatorKind::kWC, CombinatorKind::kEPO, CombinatorKind::kSLA}) {
    CombinatorState init;
    init.smoothing = true;
    const TrainResult result = train(ds, pref, kind, gbm, {LossConfig{}}, init);
    for (std::size_t t = 0; t < result.trace.iterations(); ++t) {
      for (const auto* alpha : {&result.trace.alpha_raw[t], &result.trace.alpha_smoothed[t]}) {
        CHECK(std::abs(alpha->sum() - 1.0) <= 1e-9);
        CHECK(alpha->minCoeff() >= -1e-12);
      }
    }
  }
}

TEST_CASE("exactly repeated cost vector stops the loop") {
  // All labels equal: no ordered pair anywhere, zero gradients, so the cost
  // never moves and the loop must stop after detecting c^1 = c^0.
  MultiLabelDataset ds;
  ds.feature_dim = 1;
  ds.label_count = 1;
  ds.label_names = {"flat"};
  QueryGroup g;
  g.query_id = "q";
  for (int i = 0; i < 4; ++i) {
    Item it;
    it.features = {static_cast<double>(i)};
    it.labels = {1.0};
    g.items.push_back(it);
  }
  ds.groups.push_back(g);

  const GBMConfig gbm = fast_gbm(50);
  const TrainResult result = train(ds, Preference::priorities(Eigen::VectorXd::Ones(1)),
                                   CombinatorKind::kLS, gbm, {LossConfig{}});
  CHECK(result.trace.converged_early);
  CHECK(result.ensemble.trees.size() == 1);  // one zero-tree, then the break
}

TEST_CASE("identical config and seed give identical ensemble bytes") {
  const MultiLabelDataset ds = small_synth(11);
  GBMConfig gbm = fast_gbm(30);
  gbm.rng_seed = 99;
  const Preference pref = Preference::priorities(Eigen::VectorXd::Constant(2, 0.5));
  const TrainResult a = train(ds, pref, CombinatorKind::kSLA, gbm, {LossConfig{}});
  const TrainResult b = train(ds, pref, CombinatorKind::kSLA, gbm, {LossConfig{}});
  CHECK(a.ensemble.serialize_to_string() == b.ensemble.serialize_to_string());

  gbm.rng_seed = 100;  // a different seed must change an SLA run
  const TrainResult c = train(ds, pref, CombinatorKind::kSLA, gbm, {LossConfig{}});
  CHECK(a.ensemble.serialize_to_string() != c.ensemble.serialize_to_string());
}

TEST_CASE("LS on the conflict workload pushes both costs below their start") {
  SyntheticConfig sc;
  sc.seed = 21;
  const MultiLabelDataset ds = make_synthetic_conflict(sc);
  GBMConfig gbm = fast_gbm(50);
  gbm.learning_rate = 0.25 * static_cast<double>(ds.num_queries());
  const TrainResult result =
      train(ds, Preference::priorities(Eigen::VectorXd::Constant(2, 0.5)), CombinatorKind::kLS,
            gbm, {LossConfig{}});
  const Eigen::VectorXd final_costs = evaluate_costs(result.ensemble, ds, {LossConfig{}}).costs;
  const Eigen::VectorXd& initial = result.trace.costs.front();
  CHECK(final_costs[0] < initial[0]);
  CHECK(final_costs[1] < initial[1]);
}

TEST_CASE("validation NDCG lands in the trace") {
  const MultiLabelDataset ds = small_synth(13);
  const MultiLabelDataset valid = small_synth(14, 10);
  const GBMConfig gbm = fast_gbm(10);
  const TrainResult result =
      train(ds, Preference::priorities(Eigen::VectorXd::Constant(2, 0.5)), CombinatorKind::kLS,
            gbm, {LossConfig{}}, CombinatorState{}, &valid);
  REQUIRE(result.trace.validation_ndcg.size() == result.trace.iterations());
  for (const auto& ndcg : result.trace.validation_ndcg) {
    CHECK(ndcg.size() == 2);
    CHECK(ndcg.minCoeff() >= 0.0);
    CHECK(ndcg.maxCoeff() <= 1.0);
  }
}

TEST_CASE("trace CSV has the documented columns") {
  const MultiLabelDataset ds = small_synth(15, 8);
  const TrainResult result =
      train(ds, Preference::priorities(Eigen::VectorXd::Constant(2, 0.5)), CombinatorKind::kWC,
            fast_gbm(5), {LossConfig{}});
  std::ostringstream csv;
  result.trace.write_csv(csv);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "iter,c_1,c_2,alpha_raw_1,alpha_raw_2,alpha_ma_1,alpha_ma_2");
  std::string row;
  std::size_t rows = 0;
  while (std::getline(lines, row)) ++rows;
  CHECK(rows == result.trace.iterations());
}

TEST_CASE("EC preference flows through training") {
  const MultiLabelDataset ds = small_synth(17);
  const GBMConfig gbm = fast_gbm(30);
  const Preference pref =
      Preference::epsilon_bounds(0, Eigen::VectorXd::Constant(1, 0.5), 10.0);
  const TrainResult result = train(ds, pref, CombinatorKind::kECAL, gbm, {LossConfig{}});
  CHECK(result.ensemble.trees.size() > 0);
  CHECK(result.combinator_state.ec_multipliers.size() == 1);
  CHECK(result.combinator_state.ec_multipliers.minCoeff() >= 0.0);
}

TEST_CASE("mismatched preference kind is rejected") {
  const MultiLabelDataset ds = small_synth(19, 5);
  CHECK_THROWS_AS(train(ds, Preference::priorities(Eigen::VectorXd::Constant(2, 0.5)),
                        CombinatorKind::kECAL, fast_gbm(3), {LossConfig{}}),
                  std::invalid_argument);
}
