#include "mlltr/ensemble.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mlltr/util.hpp"

namespace mlltr {

double TreeEnsemble::predict(const double* features, std::size_t dim) const {
  if (dim != feature_dim)
    throw std::invalid_argument("predict: expected " + std::to_string(feature_dim) +
                                " features, got " + std::to_string(dim));
  double score = init_score;
  for (std::size_t t = 0; t < trees.size(); ++t) {
    score -= learning_rates[t] * trees[t].predict(features);
  }
  return score;
}

void TreeEnsemble::serialize(std::ostream& out) const {
  out << "mlltr-ensemble v1\n";
  out << "feature_dim " << feature_dim << '\n';
  out << "init_score " << format_double(init_score) << '\n';
  out << "trees " << trees.size() << '\n';
  for (std::size_t t = 0; t < trees.size(); ++t) {
    out << "tree " << t << " learning_rate " << format_double(learning_rates[t]) << '\n';
    trees[t].serialize(out);
  }
}

std::string TreeEnsemble::serialize_to_string() const {
  std::ostringstream ss;
  serialize(ss);
  return ss.str();
}

TreeEnsemble TreeEnsemble::deserialize(std::istream& in) {
  std::string tok, version;
  if (!(in >> tok >> version) || tok != "mlltr-ensemble" || version != "v1")
    throw std::runtime_error("ensemble: unsupported header");
  TreeEnsemble e;
  std::size_t n_trees = 0;
  if (!(in >> tok >> e.feature_dim) || tok != "feature_dim")
    throw std::runtime_error("ensemble: expected feature_dim");
  if (!(in >> tok >> e.init_score) || tok != "init_score")
    throw std::runtime_error("ensemble: expected init_score");
  if (!(in >> tok >> n_trees) || tok != "trees")
    throw std::runtime_error("ensemble: expected trees count");
  e.trees.reserve(n_trees);
  e.learning_rates.reserve(n_trees);
  for (std::size_t t = 0; t < n_trees; ++t) {
    std::size_t idx;
    double lr;
    if (!(in >> tok >> idx) || tok != "tree" || idx != t)
      throw std::runtime_error("ensemble: malformed tree header");
    if (!(in >> tok >> lr) || tok != "learning_rate")
      throw std::runtime_error("ensemble: expected learning_rate");
    e.learning_rates.push_back(lr);
    e.trees.push_back(RegressionTree::deserialize(in));
  }
  return e;
}

void TreeEnsemble::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  serialize(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

TreeEnsemble TreeEnsemble::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return deserialize(in);
}

}  // namespace mlltr
