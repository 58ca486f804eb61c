#ifndef MLLTR_ENSEMBLE_HPP_
#define MLLTR_ENSEMBLE_HPP_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "mlltr/tree.hpp"

namespace mlltr {

/*!
 * \brief Boosted scoring function: prediction(x) = init_score - sum_t eta_t * tree_t(x).
 *
 * Trees are fit to cost gradients and therefore subtracted.
 */
struct TreeEnsemble {
  double init_score = 0.0;
  std::vector<RegressionTree> trees;
  std::vector<double> learning_rates;
  std::size_t feature_dim = 0;

  double predict(const double* features, std::size_t dim) const;
  double predict(const std::vector<double>& features) const {
    return predict(features.data(), features.size());
  }

  /*! \brief Versioned, human-diffable text format. */
  void serialize(std::ostream& out) const;
  std::string serialize_to_string() const;
  static TreeEnsemble deserialize(std::istream& in);

  void save(const std::string& path) const;
  static TreeEnsemble load(const std::string& path);
};

}  // namespace mlltr

#endif  // MLLTR_ENSEMBLE_HPP_
