#include "mlltr/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mlltr {

void LossConfig::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("LossConfig: sigma must be > 0");
  if (ndcg_truncation && *ndcg_truncation < 1)
    throw std::invalid_argument("LossConfig: ndcg_truncation must be >= 1");
}

PairSet build_pair_set(const std::vector<double>& labels) {
  PairSet ps;
  const std::size_t n = labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[i] > labels[j]) ps.pairs.emplace_back(i, j);
    }
  }
  return ps;
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = ev[i] > 0.0 ? std::sqrt(ev[i]) : 0.0;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

std::vector<int> ranks_by_score(const std::vector<double>& scores) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<int> rank(n);
  for (std::size_t pos = 0; pos < n; ++pos) rank[order[pos]] = static_cast<int>(pos) + 1;
  return rank;
}

namespace {

inline double gain_value(double label, NdcgGain gain) {
  return gain == NdcgGain::kExponential ? std::exp2(label) - 1.0 : label;
}

inline double rank_discount(int rank) { return 1.0 / std::log2(1.0 + static_cast<double>(rank)); }

// Stable log(1 + e^{-x}).
inline double log1p_exp_neg(double x) {
  if (x >= 0.0) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

// Stable 1 / (1 + e^{x}).
inline double inv_one_plus_exp(double x) {
  if (x >= 0.0) {
    const double t = std::exp(-x);
    return t / (1.0 + t);
  }
  return 1.0 / (1.0 + std::exp(x));
}

void check_scores(const std::vector<double>& scores, const std::vector<double>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("scores and labels must have equal length");
  for (double s : scores)
    if (std::isnan(s)) throw std::invalid_argument("NaN score");
}

}  // namespace

double ideal_dcg(const std::vector<double>& labels, NdcgGain gain) {
  std::vector<double> sorted = labels;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double dcg = 0.0;
  for (std::size_t pos = 0; pos < sorted.size(); ++pos) {
    dcg += gain_value(sorted[pos], gain) * rank_discount(static_cast<int>(pos) + 1);
  }
  return dcg;
}

double delta_ndcg(const std::vector<double>& labels, const std::vector<int>& rank_of_item,
                  std::size_t i, std::size_t j, NdcgGain gain) {
  if (i == j) throw std::invalid_argument("delta_ndcg: i == j");
  const double idcg = ideal_dcg(labels, gain);
  if (idcg <= 0.0) return 0.0;
  // Only positions of i and j change under the swap:
  // |dDCG| = |g_i - g_j| * |disc(rank_i) - disc(rank_j)|.
  const double dg = gain_value(labels[i], gain) - gain_value(labels[j], gain);
  const double dd = rank_discount(rank_of_item[i]) - rank_discount(rank_of_item[j]);
  return std::abs(dg * dd) / idcg;
}

double ndcg_at_k(const std::vector<double>& scores, const std::vector<double>& labels, int k,
                 NdcgGain gain) {
  if (k < 1) throw std::invalid_argument("ndcg_at_k: k must be >= 1");
  check_scores(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<double> sorted_gains(n);
  for (std::size_t idx = 0; idx < n; ++idx) sorted_gains[idx] = gain_value(labels[idx], gain);
  std::vector<double> ideal = sorted_gains;
  std::sort(ideal.begin(), ideal.end(), std::greater<double>());

  const std::size_t cutoff = std::min<std::size_t>(n, static_cast<std::size_t>(k));
  double dcg = 0.0, idcg = 0.0;
  for (std::size_t pos = 0; pos < cutoff; ++pos) {
    const double disc = rank_discount(static_cast<int>(pos) + 1);
    dcg += sorted_gains[order[pos]] * disc;
    idcg += ideal[pos] * disc;
  }
  if (idcg <= 0.0) return 1.0;
  return dcg / idcg;
}

namespace {

// Shared pair loop: accumulates loss and (optionally) the gradient.
// Pair weights are |dNDCG| against the current-score ranking, or 1.
void pair_sweep(const std::vector<double>& scores, const std::vector<double>& labels,
                const LossConfig& cfg, double* loss_out, std::vector<double>* grad_out) {
  const std::size_t n = scores.size();
  double loss = 0.0;
  if (grad_out) grad_out->assign(n, 0.0);

  std::vector<int> ranks;
  double idcg = 0.0;
  std::vector<double> gains;
  if (cfg.use_delta_ndcg) {
    ranks = ranks_by_score(scores);
    idcg = ideal_dcg(labels, cfg.gain);
    gains.resize(n);
    for (std::size_t i = 0; i < n; ++i) gains[i] = gain_value(labels[i], cfg.gain);
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(labels[i] > labels[j])) continue;
      double w = 1.0;
      if (cfg.use_delta_ndcg) {
        if (idcg <= 0.0) continue;
        w = std::abs((gains[i] - gains[j]) *
                     (rank_discount(ranks[i]) - rank_discount(ranks[j]))) /
            idcg;
      }
      const double d = cfg.sigma * (scores[i] - scores[j]);
      loss += w * log1p_exp_neg(d);
      if (grad_out) {
        const double g = cfg.sigma * w * inv_one_plus_exp(d);
        (*grad_out)[i] -= g;
        (*grad_out)[j] += g;
      }
    }
  }
  if (loss_out) *loss_out = loss;
}

}  // namespace

double per_query_loss(const std::vector<double>& scores, const std::vector<double>& labels,
                      const LossConfig& cfg) {
  cfg.validate();
  check_scores(scores, labels);
  double loss = 0.0;
  pair_sweep(scores, labels, cfg, &loss, nullptr);
  return loss;
}

std::vector<double> per_query_gradient(const std::vector<double>& scores,
                                       const std::vector<double>& labels, const LossConfig& cfg) {
  cfg.validate();
  check_scores(scores, labels);
  std::vector<double> grad;
  pair_sweep(scores, labels, cfg, nullptr, &grad);
  return grad;
}

FlatDataset FlatDataset::from(const MultiLabelDataset& dataset) {
  dataset.validate();
  FlatDataset flat;
  flat.feature_dim = dataset.feature_dim;
  flat.labels.resize(dataset.label_count);
  flat.group_offsets.push_back(0);
  const std::size_t total = dataset.num_items();
  flat.features.reserve(total * dataset.feature_dim);
  for (auto& col : flat.labels) col.reserve(total);
  for (const auto& g : dataset.groups) {
    flat.query_ids.push_back(g.query_id);
    for (const auto& it : g.items) {
      flat.features.insert(flat.features.end(), it.features.begin(), it.features.end());
      for (std::size_t k = 0; k < dataset.label_count; ++k)
        flat.labels[k].push_back(it.labels[k]);
    }
    flat.group_offsets.push_back(flat.group_offsets.back() + g.items.size());
  }
  return flat;
}

CostState evaluate_costs_flat(const FlatDataset& flat, const std::vector<double>& scores,
                              const std::vector<LossConfig>& cfgs) {
  const std::size_t num_items = flat.num_items();
  const std::size_t m = flat.num_groups();
  const std::size_t K = flat.num_objectives();
  if (scores.size() != num_items) throw std::invalid_argument("evaluate_costs: score count mismatch");
  if (cfgs.empty()) throw std::invalid_argument("evaluate_costs: no loss configs");
  if (cfgs.size() != 1 && cfgs.size() != K)
    throw std::invalid_argument("evaluate_costs: need 1 or K loss configs");

  CostState cs;
  cs.costs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
  cs.gradients = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_items),
                                       static_cast<Eigen::Index>(K));

  std::vector<double> q_scores, q_labels, q_grad;
  for (std::size_t k = 0; k < K; ++k) {
    const LossConfig& cfg = cfgs.size() == 1 ? cfgs[0] : cfgs[k];
    cfg.validate();
    double total_loss = 0.0;
    for (std::size_t q = 0; q < m; ++q) {
      const std::size_t begin = flat.group_offsets[q];
      const std::size_t end = flat.group_offsets[q + 1];
      q_scores.assign(scores.begin() + begin, scores.begin() + end);
      q_labels.assign(flat.labels[k].begin() + begin, flat.labels[k].begin() + end);
      for (double s : q_scores)
        if (std::isnan(s)) throw std::invalid_argument("NaN score in group " + flat.query_ids[q]);
      double loss = 0.0;
      pair_sweep(q_scores, q_labels, cfg, &loss, &q_grad);
      total_loss += loss;
      for (std::size_t i = 0; i < q_grad.size(); ++i) {
        cs.gradients(static_cast<Eigen::Index>(begin + i), static_cast<Eigen::Index>(k)) =
            q_grad[i] / static_cast<double>(m);
      }
    }
    cs.costs[static_cast<Eigen::Index>(k)] = total_loss / static_cast<double>(m);
  }
  cs.gram = cs.gradients.transpose() * cs.gradients;
  cs.gram_sqrt = symmetric_sqrt(cs.gram);
  return cs;
}

std::vector<double> predict_all(const TreeEnsemble& ensemble, const FlatDataset& flat) {
  if (ensemble.feature_dim != flat.feature_dim)
    throw std::invalid_argument("predict_all: feature dimension mismatch");
  const std::size_t n = flat.num_items();
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i)
    scores[i] = ensemble.predict(flat.features.data() + i * flat.feature_dim, flat.feature_dim);
  return scores;
}

CostState evaluate_costs(const TreeEnsemble& ensemble, const MultiLabelDataset& dataset,
                         const std::vector<LossConfig>& cfgs) {
  FlatDataset flat = FlatDataset::from(dataset);
  return evaluate_costs_flat(flat, predict_all(ensemble, flat), cfgs);
}

double mean_ndcg_at_k(const FlatDataset& flat, const std::vector<double>& scores,
                      std::size_t objective, int k, NdcgGain gain, bool exclude_vacuous) {
  if (objective >= flat.num_objectives())
    throw std::invalid_argument("mean_ndcg_at_k: objective out of range");
  double total = 0.0;
  std::size_t counted = 0;
  std::vector<double> q_scores, q_labels;
  for (std::size_t q = 0; q < flat.num_groups(); ++q) {
    const std::size_t begin = flat.group_offsets[q];
    const std::size_t end = flat.group_offsets[q + 1];
    q_scores.assign(scores.begin() + begin, scores.begin() + end);
    q_labels.assign(flat.labels[objective].begin() + begin,
                    flat.labels[objective].begin() + end);
    if (exclude_vacuous && ideal_dcg(q_labels, gain) <= 0.0) continue;
    total += ndcg_at_k(q_scores, q_labels, k, gain);
    ++counted;
  }
  if (counted == 0) return 1.0;
  return total / static_cast<double>(counted);
}

}  // namespace mlltr
