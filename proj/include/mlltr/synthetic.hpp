#ifndef MLLTR_SYNTHETIC_HPP_
#define MLLTR_SYNTHETIC_HPP_

#include <cstdint>

#include "mlltr/dataset.hpp"

namespace mlltr {

/*!
 * \brief Desk-scale two-label conflict workload: per query, label 1 orders
 * items by <w1, x> and label 2 by <w2, x> with <w1, w2> < 0, both quantized
 * to equal-frequency ordinal levels within the query.
 */
struct SyntheticConfig {
  std::size_t num_queries = 200;
  std::size_t items_per_query = 20;
  std::size_t feature_dim = 10;
  int levels = 5;
  double conflict = -0.5;  // <w1, w2> for unit-norm w1, w2; must be < 0
  double noise_std = 0.05;
  std::uint64_t seed = 1;
};

MultiLabelDataset make_synthetic_conflict(const SyntheticConfig& cfg);

/*!
 * \brief Move one label back into the feature block (appended as the last
 * feature column). Inverse of label promotion; used to exercise the
 * file-based pipeline on synthetic data.
 */
MultiLabelDataset demote_label_to_feature(const MultiLabelDataset& dataset,
                                          std::size_t label_index);

}  // namespace mlltr

#endif  // MLLTR_SYNTHETIC_HPP_
