#ifndef MLLTR_DATASET_HPP_
#define MLLTR_DATASET_HPP_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace mlltr {

/*! \brief One ranked item: a feature vector plus K relevance labels. */
struct Item {
  std::vector<double> features;
  std::vector<double> labels;
};

/*! \brief All items matched to one query, in file order. */
struct QueryGroup {
  std::string query_id;
  std::vector<Item> items;

  std::size_t size() const { return items.size(); }
};

/*!
 * \brief Query-grouped multi-label ranking dataset.
 *
 * Every group shares the same feature dimension and label count. The
 * structure is immutable after construction and safe to read from many
 * threads.
 */
struct MultiLabelDataset {
  std::vector<QueryGroup> groups;
  std::size_t feature_dim = 0;
  std::size_t label_count = 0;
  std::vector<std::string> label_names;

  std::size_t num_queries() const { return groups.size(); }
  std::size_t num_items() const;

  /*! \brief Dataset restricted to a subset of labels (indices kept in the
   *  given order). Features are untouched. */
  MultiLabelDataset select_labels(const std::vector<std::size_t>& label_indices) const;

  /*! \brief Throws std::invalid_argument if any invariant is broken. */
  void validate() const;
};

/*! \brief Which raw feature columns to promote to relevance labels. */
struct LabelPromotionSpec {
  std::vector<std::size_t> promoted_feature_indices;
  bool keep_original_label = true;
  /*! Promoted continuous columns are binned to this many ordinal levels;
   *  0 disables quantization and keeps the raw values. */
  int quantize_levels = 5;
};

/*!
 * \brief Parse LETOR/SVMlight text (`<label> qid:<id> <idx>:<val> ...`).
 *
 * Feature indices are 1-based in the file and strictly increasing per line;
 * missing indices are densified with 0.0. Text after '#' is ignored.
 * The result is a single-label dataset (label_count == 1).
 *
 * Throws std::runtime_error naming the offending line on malformed input,
 * and on an empty stream.
 */
MultiLabelDataset parse_letor(std::istream& input);
MultiLabelDataset parse_letor_file(const std::string& path);

/*! \brief Write a single-label dataset back to LETOR text (dense columns). */
void write_letor(const MultiLabelDataset& dataset, std::ostream& out);

/*!
 * \brief Promote feature columns to relevance labels.
 *
 * Promoted columns become labels (in spec order, after the original label
 * when kept) and are removed from every feature vector, so feature_dim
 * shrinks by the number of promoted indices. Indices refer to 0-based
 * feature columns of `raw`.
 */
MultiLabelDataset promote_labels(const MultiLabelDataset& raw, const LabelPromotionSpec& spec);

/*!
 * \brief Equal-frequency binning of `values` into n_levels ordinal levels.
 *
 * The map is monotone (v1 <= v2 implies level(v1) <= level(v2)) and equal
 * values always land in the same level. A constant column maps to all-zero
 * levels with a warning.
 */
std::vector<int> quantize_label(const std::vector<double>& values, int n_levels);

/*! \brief Binary cache (versioned header, little-endian). */
void save_cache(const MultiLabelDataset& dataset, const std::string& path);
MultiLabelDataset load_cache(const std::string& path);

}  // namespace mlltr

#endif  // MLLTR_DATASET_HPP_
