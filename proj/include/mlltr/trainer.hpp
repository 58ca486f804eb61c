#ifndef MLLTR_TRAINER_HPP_
#define MLLTR_TRAINER_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mlltr/combinators.hpp"
#include "mlltr/dataset.hpp"
#include "mlltr/ensemble.hpp"
#include "mlltr/ranking.hpp"
#include "mlltr/tree.hpp"

namespace mlltr {

struct GBMConfig {
  int n_trees = 300;
  double learning_rate = 0.25;  // constant schedule
  TreeFitConfig tree;
  double convergence_tol = 1e-9;  // stop when ||c^t - c^{t-1}||_2 falls below
  std::uint64_t rng_seed = 0;

  // Validation-based early stopping on mean NDCG@k; off by default.
  int early_stopping_rounds = 0;
  int validation_ndcg_k = 5;

  void validate() const;
};

/*! \brief Per-iteration record of the training loop. */
struct TrainingTrace {
  std::size_t label_count = 0;
  std::vector<Eigen::VectorXd> costs;
  std::vector<Eigen::VectorXd> alpha_raw;
  std::vector<Eigen::VectorXd> alpha_smoothed;
  std::vector<Eigen::VectorXd> validation_ndcg;  // filled when a validation set is given
  std::vector<std::string> annotations;          // combinator fallbacks etc.
  bool converged_early = false;

  std::size_t iterations() const { return costs.size(); }

  /*! \brief CSV with columns iter, c_1..c_K, alpha_raw_1..K, alpha_ma_1..K
   *  (plus valid_ndcg_1..K when present). */
  void write_csv(std::ostream& out) const;
};

struct TrainResult {
  TreeEnsemble ensemble;
  TrainingTrace trace;
  CombinatorState combinator_state;
};

/*!
 * \brief The boosted MLLTR training loop: score, evaluate the cost vector
 * and score-gradients, combine them with the chosen rule into pseudo-labels
 * lambda = C alpha, fit a tree, and subtract it from the scoring function.
 *
 * `initial_state` carries combinator knobs (smoothing on/off, nu, ...);
 * its RNG is re-seeded from gbm_cfg.rng_seed. Combinator failures fall back
 * per rule and annotate the trace; training never aborts mid-run.
 */
TrainResult train(const MultiLabelDataset& dataset, const Preference& preference,
                  CombinatorKind kind, const GBMConfig& gbm_cfg,
                  const std::vector<LossConfig>& loss_cfgs,
                  const CombinatorState& initial_state = CombinatorState{},
                  const MultiLabelDataset* validation = nullptr);

}  // namespace mlltr

#endif  // MLLTR_TRAINER_HPP_
