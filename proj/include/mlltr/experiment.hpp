#ifndef MLLTR_EXPERIMENT_HPP_
#define MLLTR_EXPERIMENT_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlltr/combinators.hpp"
#include "mlltr/dataset.hpp"
#include "mlltr/ensemble.hpp"
#include "mlltr/synthetic.hpp"
#include "mlltr/trainer.hpp"

namespace mlltr {

struct MethodSpec {
  CombinatorKind kind = CombinatorKind::kLS;
  bool smoothing = false;

  std::string id() const { return to_string(kind) + (smoothing ? ":ma" : ":orig"); }
};

struct ExperimentConfig {
  // Either LETOR files with label promotion, or the in-tree synthetic workload.
  bool synthetic = true;
  SyntheticConfig synth;                      // seed overridden per grid seed
  std::size_t synth_test_queries = 100;
  std::string train_path, test_path;
  std::vector<std::size_t> promote_features;  // file mode
  bool keep_original_label = true;
  int quantize_levels = 5;

  std::vector<std::vector<std::size_t>> label_subsets;  // empty = all labels
  std::vector<MethodSpec> methods;
  int n_preferences = 5;
  std::vector<std::uint64_t> seeds;

  GBMConfig gbm;
  LossConfig loss;  // broadcast to every objective
  double nu = 0.1;
  double ec_mu = 10.0;
  double dbgd_beta = 1.0;
  int metric_ndcg_k = 5;
  int workers = 1;

  std::string output_dir = "mlltr-out";

  void validate() const;
  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
};

/*! \brief Single-objective baselines: one LS run with r = e_k per label. */
struct BaselineResult {
  std::vector<TreeEnsemble> ensembles;    // one per label
  std::vector<Eigen::VectorXd> costs;     // full train-cost vector per baseline
};

BaselineResult single_objective_baselines(const MultiLabelDataset& train, const GBMConfig& gbm,
                                          const std::vector<LossConfig>& losses);

/*!
 * \brief Equi-angular preference rays strictly between the baseline cost
 * directions (K = 2), or a barycentric grid over the three baseline
 * directions (K = 3). Returns priority vectors r = 1/d, normalized.
 * Colinear baselines fall back to uniform weights with a warning.
 */
std::vector<Eigen::VectorXd> generate_rays(const std::vector<Eigen::VectorXd>& baseline_costs,
                                           int n);

/*!
 * \brief n equi-distance bound sets between 0 and the primary baseline's
 * secondary costs: bounds_i[s] = i/(n+1) * baseline_costs[secondary s].
 */
std::vector<Eigen::VectorXd> generate_epsilon_bounds(const Eigen::VectorXd& baseline_costs,
                                                     std::size_t primary_index, int n);

/*! \brief One grid cell result. */
struct RunRecord {
  std::string subset_id;
  MethodSpec method;
  int preference_id = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;

  Eigen::VectorXd preference_weights;  // priority methods
  Eigen::VectorXd epsilon_bounds;      // EC methods
  Eigen::VectorXd train_costs;
  Eigen::VectorXd test_costs;
  Eigen::VectorXd test_ndcg;
  double mwl_test = 0.0;  // priority methods only
  bool has_mwl = false;
  std::vector<Eigen::VectorXd> cost_trace;  // per-iteration train costs
};

struct GridOutcome {
  std::vector<RunRecord> runs;
  int total_cells = 0;
  int failed_cells = 0;
  std::string runs_csv;       // emitted file paths
  std::string aggregate_csv;
  std::string baselines_csv;
};

/*! \brief Execute the full grid and emit per-run + aggregate CSV reports. */
GridOutcome run_grid(const ExperimentConfig& config);

/*! \brief Reference-exploration report (WC / WC-MGDA around a reference model). */
struct ReferenceRunRecord {
  MethodSpec method;
  int preference_id = 0;
  Eigen::VectorXd preference_weights;
  Eigen::VectorXd train_costs;
  Eigen::VectorXd improvement;  // b - c, positive = better than reference
  bool dominates_reference = false;
  double mwl_vs_reference = 0.0;  // max_k r_k (c_k - b_k)
};

struct ReferenceOutcome {
  Eigen::VectorXd reference_losses;
  std::vector<ReferenceRunRecord> runs;
  std::string report_csv;
};

/*!
 * \brief Explore the frontier around a reference model: evaluate its losses
 * b, then run the configured preference methods (WC with shifted costs,
 * WC-MGDA with b) across rays generated from b's axis projections.
 */
ReferenceOutcome explore_from_reference(const ExperimentConfig& config,
                                        const TreeEnsemble& reference);

/*! \brief Rays for reference mode: generate_rays against the reference
 *  point's axis projections. */
std::vector<Eigen::VectorXd> reference_rays(const Eigen::VectorXd& reference_losses, int n);

}  // namespace mlltr

#endif  // MLLTR_EXPERIMENT_HPP_
