#include "mlltr/trainer.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mlltr/util.hpp"

namespace mlltr {

void GBMConfig::validate() const {
  if (n_trees < 1) throw std::invalid_argument("GBMConfig: n_trees must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("GBMConfig: learning_rate must be > 0");
  if (!(convergence_tol >= 0.0))
    throw std::invalid_argument("GBMConfig: convergence_tol must be >= 0");
  if (tree.max_leaves < 1 || tree.min_samples_leaf < 1 || tree.max_depth < 0)
    throw std::invalid_argument("GBMConfig: bad tree limits");
}

void TrainingTrace::write_csv(std::ostream& out) const {
  const std::size_t k = label_count;
  out << "iter";
  for (std::size_t i = 1; i <= k; ++i) out << ",c_" << i;
  for (std::size_t i = 1; i <= k; ++i) out << ",alpha_raw_" << i;
  for (std::size_t i = 1; i <= k; ++i) out << ",alpha_ma_" << i;
  const bool has_valid = !validation_ndcg.empty();
  if (has_valid)
    for (std::size_t i = 1; i <= k; ++i) out << ",valid_ndcg_" << i;
  out << '\n';
  for (std::size_t t = 0; t < costs.size(); ++t) {
    out << t;
    for (Eigen::Index i = 0; i < costs[t].size(); ++i) out << ',' << format_double(costs[t][i]);
    for (Eigen::Index i = 0; i < alpha_raw[t].size(); ++i)
      out << ',' << format_double(alpha_raw[t][i]);
    for (Eigen::Index i = 0; i < alpha_smoothed[t].size(); ++i)
      out << ',' << format_double(alpha_smoothed[t][i]);
    if (has_valid)
      for (Eigen::Index i = 0; i < validation_ndcg[t].size(); ++i)
        out << ',' << format_double(validation_ndcg[t][i]);
    out << '\n';
  }
}

TrainResult train(const MultiLabelDataset& dataset, const Preference& preference,
                  CombinatorKind kind, const GBMConfig& gbm_cfg,
                  const std::vector<LossConfig>& loss_cfgs, const CombinatorState& initial_state,
                  const MultiLabelDataset* validation) {
  gbm_cfg.validate();
  const FlatDataset flat = FlatDataset::from(dataset);
  const std::size_t num_items = flat.num_items();
  const std::size_t k = flat.num_objectives();
  preference.validate(k, kind);

  TreeFitter fitter(flat.features, flat.feature_dim);

  std::optional<FlatDataset> flat_valid;
  std::vector<double> valid_scores;
  if (validation) {
    flat_valid = FlatDataset::from(*validation);
    if (flat_valid->feature_dim != flat.feature_dim || flat_valid->num_objectives() != k)
      throw std::invalid_argument("train: validation set shape mismatch");
    valid_scores.assign(flat_valid->num_items(), 0.0);
  }

  TrainResult result;
  result.ensemble.init_score = 0.0;  // T_{theta^0}
  result.ensemble.feature_dim = flat.feature_dim;
  result.trace.label_count = k;
  result.combinator_state = initial_state;
  result.combinator_state.seed(gbm_cfg.rng_seed);
  CombinatorState& state = result.combinator_state;

  std::vector<double> scores(num_items, result.ensemble.init_score);
  std::vector<double> pseudo_labels(num_items);
  std::optional<Eigen::VectorXd> prev_costs;

  double best_valid = -1.0;
  int rounds_since_best = 0;

  for (int t = 0; t < gbm_cfg.n_trees; ++t) {
    CostState cs = evaluate_costs_flat(flat, scores, loss_cfgs);
    if (prev_costs && (cs.costs - *prev_costs).norm() < gbm_cfg.convergence_tol) {
      result.trace.converged_early = true;
      break;
    }
    prev_costs = cs.costs;

    Eigen::VectorXd alpha;
    try {
      alpha = get_coefficients(kind, cs, preference, state);
    } catch (const std::exception& e) {
      // Never abort a run over a combinator failure: reuse the previous
      // coefficients (uniform on the very first iteration) and annotate.
      state.annotations.push_back("combinator error at iteration " + std::to_string(t) + ": " +
                                  e.what());
      alpha = state.prev_alpha.size() == static_cast<Eigen::Index>(k)
                  ? state.prev_alpha
                  : Eigen::VectorXd::Constant(static_cast<Eigen::Index>(k),
                                              1.0 / static_cast<double>(k));
      state.last_raw_alpha = alpha;
      state.smoothed_alpha = alpha;
      ++state.iteration;
    }

    // lambda = C alpha; zero coefficients skipped so a one-hot alpha
    // reproduces single-objective training bit for bit.
    for (std::size_t i = 0; i < num_items; ++i) {
      double v = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        if (alpha[static_cast<Eigen::Index>(j)] == 0.0) continue;
        v += alpha[static_cast<Eigen::Index>(j)] *
             cs.gradients(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
      pseudo_labels[i] = v;
    }

    RegressionTree tree = fitter.fit(pseudo_labels, gbm_cfg.tree);
    const double eta = gbm_cfg.learning_rate;
    for (std::size_t i = 0; i < num_items; ++i)
      scores[i] -= eta * tree.predict(flat.features.data() + i * flat.feature_dim);
    if (flat_valid) {
      for (std::size_t i = 0; i < valid_scores.size(); ++i)
        valid_scores[i] -=
            eta * tree.predict(flat_valid->features.data() + i * flat_valid->feature_dim);
    }
    result.ensemble.trees.push_back(std::move(tree));
    result.ensemble.learning_rates.push_back(eta);

    result.trace.costs.push_back(cs.costs);
    result.trace.alpha_raw.push_back(state.last_raw_alpha);
    result.trace.alpha_smoothed.push_back(alpha);

    if (flat_valid) {
      Eigen::VectorXd ndcg(static_cast<Eigen::Index>(k));
      for (std::size_t j = 0; j < k; ++j) {
        const NdcgGain gain = (loss_cfgs.size() == 1 ? loss_cfgs[0] : loss_cfgs[j]).gain;
        ndcg[static_cast<Eigen::Index>(j)] =
            mean_ndcg_at_k(*flat_valid, valid_scores, j, gbm_cfg.validation_ndcg_k, gain);
      }
      result.trace.validation_ndcg.push_back(ndcg);
      if (gbm_cfg.early_stopping_rounds > 0) {
        const double mean_ndcg = ndcg.mean();
        if (mean_ndcg > best_valid) {
          best_valid = mean_ndcg;
          rounds_since_best = 0;
        } else if (++rounds_since_best >= gbm_cfg.early_stopping_rounds) {
          break;
        }
      }
    }
  }

  result.trace.annotations = state.annotations;
  return result;
}

}  // namespace mlltr
