#include "mlltr/synthetic.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace mlltr {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller; avoids std::normal_distribution so streams are portable.
double normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

MultiLabelDataset make_synthetic_conflict(const SyntheticConfig& cfg) {
  if (cfg.num_queries < 1 || cfg.items_per_query < 2 || cfg.feature_dim < 2)
    throw std::invalid_argument("synthetic: degenerate shape");
  if (!(cfg.conflict < 0.0) || cfg.conflict < -1.0)
    throw std::invalid_argument("synthetic: conflict must be in [-1, 0)");
  if (cfg.feature_dim % 2 != 0)
    throw std::invalid_argument("synthetic: feature_dim must be even");

  const std::size_t p = cfg.feature_dim;
  std::vector<double> w1(p), w2(p);
  const double inv_sqrt_p = 1.0 / std::sqrt(static_cast<double>(p));
  const double ortho = std::sqrt(1.0 - cfg.conflict * cfg.conflict);
  for (std::size_t f = 0; f < p; ++f) {
    w1[f] = inv_sqrt_p;
    const double v = (f % 2 == 0 ? 1.0 : -1.0) * inv_sqrt_p;  // orthogonal to w1
    w2[f] = cfg.conflict * w1[f] + ortho * v;
  }

  std::mt19937_64 rng(cfg.seed);
  MultiLabelDataset ds;
  ds.feature_dim = p;
  ds.label_count = 2;
  ds.label_names = {"objective_a", "objective_b"};
  ds.groups.reserve(cfg.num_queries);

  std::vector<double> u1(cfg.items_per_query), u2(cfg.items_per_query);
  for (std::size_t q = 0; q < cfg.num_queries; ++q) {
    QueryGroup g;
    g.query_id = std::to_string(q + 1);
    g.items.resize(cfg.items_per_query);
    for (std::size_t i = 0; i < cfg.items_per_query; ++i) {
      Item& item = g.items[i];
      item.features.resize(p);
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t f = 0; f < p; ++f) {
        const double x = uniform01(rng);
        item.features[f] = x;
        s1 += w1[f] * x;
        s2 += w2[f] * x;
      }
      u1[i] = s1 + cfg.noise_std * normal(rng);
      u2[i] = s2 + cfg.noise_std * normal(rng);
    }
    const std::vector<int> l1 = quantize_label(u1, cfg.levels);
    const std::vector<int> l2 = quantize_label(u2, cfg.levels);
    for (std::size_t i = 0; i < cfg.items_per_query; ++i) {
      g.items[i].labels = {static_cast<double>(l1[i]), static_cast<double>(l2[i])};
    }
    ds.groups.push_back(std::move(g));
  }
  return ds;
}

MultiLabelDataset demote_label_to_feature(const MultiLabelDataset& dataset,
                                          std::size_t label_index) {
  if (label_index >= dataset.label_count)
    throw std::invalid_argument("demote_label_to_feature: label index out of range");
  if (dataset.label_count < 2)
    throw std::invalid_argument("demote_label_to_feature: need at least two labels");
  MultiLabelDataset out;
  out.feature_dim = dataset.feature_dim + 1;
  out.label_count = dataset.label_count - 1;
  for (std::size_t k = 0; k < dataset.label_count; ++k)
    if (k != label_index) out.label_names.push_back(dataset.label_names[k]);
  out.groups.reserve(dataset.groups.size());
  for (const auto& g : dataset.groups) {
    QueryGroup ng;
    ng.query_id = g.query_id;
    ng.items.reserve(g.items.size());
    for (const auto& it : g.items) {
      Item ni;
      ni.features = it.features;
      ni.features.push_back(it.labels[label_index]);
      for (std::size_t k = 0; k < dataset.label_count; ++k)
        if (k != label_index) ni.labels.push_back(it.labels[k]);
      ng.items.push_back(std::move(ni));
    }
    out.groups.push_back(std::move(ng));
  }
  return out;
}

}  // namespace mlltr
