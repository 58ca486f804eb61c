#ifndef MLLTR_RANKING_HPP_
#define MLLTR_RANKING_HPP_

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "mlltr/dataset.hpp"
#include "mlltr/ensemble.hpp"

namespace mlltr {

/*! \brief NDCG gain function: 2^y - 1 for ordinal levels, y for continuous labels. */
enum class NdcgGain { kExponential, kLinear };

/*! \brief Pairwise loss configuration for one objective. */
struct LossConfig {
  double sigma = 1.0;            // sigmoid spread, > 0
  bool use_delta_ndcg = true;    // pair weight |dNDCG| (vs. 1 for the RankNet cost)
  NdcgGain gain = NdcgGain::kExponential;
  std::optional<int> ndcg_truncation;  // metric reporting only

  void validate() const;
};

/*! \brief Item pairs (i, j) with y_i > y_j within one query. */
struct PairSet {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

PairSet build_pair_set(const std::vector<double>& labels);

/*!
 * \brief Per-iteration cost snapshot: the cost vector c, score-gradient
 * columns C (M x K), the Gram matrix CᵀC and its principal square root.
 */
struct CostState {
  Eigen::VectorXd costs;
  Eigen::MatrixXd gradients;
  Eigen::MatrixXd gram;
  Eigen::MatrixXd gram_sqrt;

  std::size_t num_objectives() const { return static_cast<std::size_t>(costs.size()); }
};

/*! \brief Principal square root of a symmetric PSD matrix (negative eigenvalues clamped to 0). */
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m);

/*! \brief Rank positions (1-based) induced by descending scores; ties keep original order. */
std::vector<int> ranks_by_score(const std::vector<double>& scores);

/*! \brief Ideal DCG of a label vector (no truncation). */
double ideal_dcg(const std::vector<double>& labels, NdcgGain gain);

/*!
 * \brief |change in NDCG| if the items at indices i and j swapped rank
 * positions, against the ranking given by rank_of_item. Returns 0 when the
 * ideal DCG is 0.
 */
double delta_ndcg(const std::vector<double>& labels, const std::vector<int>& rank_of_item,
                  std::size_t i, std::size_t j, NdcgGain gain = NdcgGain::kExponential);

/*!
 * \brief NDCG at cutoff k; score ties broken by original item order.
 * Defined as 1.0 when all gains are zero (vacuously perfectly ranked).
 */
double ndcg_at_k(const std::vector<double>& scores, const std::vector<double>& labels, int k,
                 NdcgGain gain = NdcgGain::kExponential);

/*! \brief Pairwise logistic ranking loss over the query's ordered pairs. */
double per_query_loss(const std::vector<double>& scores, const std::vector<double>& labels,
                      const LossConfig& cfg);

/*! \brief Analytic gradient of per_query_loss w.r.t. each score. */
std::vector<double> per_query_gradient(const std::vector<double>& scores,
                                       const std::vector<double>& labels, const LossConfig& cfg);

/*!
 * \brief Flattened dataset view for training and cost evaluation: row-major
 * feature matrix plus per-objective label columns and group offsets.
 */
struct FlatDataset {
  std::vector<double> features;             // M x p
  std::size_t feature_dim = 0;
  std::vector<std::size_t> group_offsets;   // m + 1 entries
  std::vector<std::vector<double>> labels;  // K columns of length M
  std::vector<std::string> query_ids;

  std::size_t num_items() const { return group_offsets.empty() ? 0 : group_offsets.back(); }
  std::size_t num_groups() const { return group_offsets.size() - 1; }
  std::size_t num_objectives() const { return labels.size(); }

  static FlatDataset from(const MultiLabelDataset& dataset);
};

/*!
 * \brief Evaluate the cost vector, gradient matrix and Gram data for given
 * scores. `cfgs` has one entry per objective (or a single entry broadcast).
 */
CostState evaluate_costs_flat(const FlatDataset& flat, const std::vector<double>& scores,
                              const std::vector<LossConfig>& cfgs);

/*! \brief Score the dataset with the ensemble, then evaluate costs. */
CostState evaluate_costs(const TreeEnsemble& ensemble, const MultiLabelDataset& dataset,
                         const std::vector<LossConfig>& cfgs);

/*! \brief Scores for every item of the flattened dataset, in row order. */
std::vector<double> predict_all(const TreeEnsemble& ensemble, const FlatDataset& flat);

/*!
 * \brief Mean NDCG@k for one objective over all queries. Queries whose
 * ideal DCG is 0 count as 1.0 unless excluded.
 */
double mean_ndcg_at_k(const FlatDataset& flat, const std::vector<double>& scores,
                      std::size_t objective, int k, NdcgGain gain = NdcgGain::kExponential,
                      bool exclude_vacuous = false);

}  // namespace mlltr

#endif  // MLLTR_RANKING_HPP_
