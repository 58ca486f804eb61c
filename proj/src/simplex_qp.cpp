#include "mlltr/simplex_qp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mlltr {

namespace {

constexpr double kFeasTol = 1e-10;

double objective(const Eigen::MatrixXd& h, const Eigen::VectorXd& lin, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(h * x) + lin.dot(x);
}

// Solve the KKT system for the face where exactly the coordinates in
// `support` are free. Returns false when the system has no reliable solution.
bool solve_face(const Eigen::MatrixXd& h, const Eigen::VectorXd& lin,
                const std::vector<int>& support, bool simplex, Eigen::VectorXd* out) {
  const int s = static_cast<int>(support.size());
  const int dim = simplex ? s + 1 : s;
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) kkt(a, b) = h(support[a], support[b]);
    rhs[a] = -lin[support[a]];
    if (simplex) {
      kkt(a, s) = -1.0;
      kkt(s, a) = 1.0;
    }
  }
  if (simplex) rhs[s] = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  Eigen::VectorXd sol;
  if (lu.isInvertible()) {
    sol = lu.solve(rhs);
  } else {
    // Singular face (rank-deficient H on this support): take the minimum
    // norm least-squares solution and accept it only if it actually solves
    // the system.
    sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    const double scale = std::max(1.0, rhs.norm());
    if ((kkt * sol - rhs).norm() > 1e-9 * scale) return false;
  }
  if (!sol.allFinite()) return false;

  out->setZero(h.rows());
  for (int a = 0; a < s; ++a) {
    if (sol[a] < -kFeasTol) return false;
    (*out)[support[a]] = std::max(sol[a], 0.0);
  }
  return true;
}

}  // namespace

Eigen::VectorXd simplex_qp(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& linear,
                           QpConstraint constraint) {
  const int k = static_cast<int>(linear.size());
  if (k < 1) throw std::invalid_argument("simplex_qp: empty problem");
  if (k > 16) throw std::invalid_argument("simplex_qp: K > 16 is out of the design envelope");
  if (hessian.rows() != k || hessian.cols() != k)
    throw std::invalid_argument("simplex_qp: hessian shape mismatch");

  const bool simplex = constraint == QpConstraint::kSimplex;
  Eigen::VectorXd best;
  double best_obj = std::numeric_limits<double>::infinity();

  Eigen::VectorXd candidate(k);
  std::vector<int> support;
  const unsigned mask_begin = simplex ? 1u : 0u;
  const unsigned mask_end = 1u << k;
  for (unsigned mask = mask_begin; mask < mask_end; ++mask) {
    support.clear();
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) support.push_back(i);

    if (support.empty()) {
      candidate.setZero(k);
    } else if (!solve_face(hessian, linear, support, simplex, &candidate)) {
      continue;
    }
    if (simplex) {
      const double total = candidate.sum();
      if (std::abs(total - 1.0) > 1e-8) continue;
      candidate /= total;
    }
    const double obj = objective(hessian, linear, candidate);
    if (obj < best_obj) {
      best_obj = obj;
      best = candidate;
    }
  }

  if (best.size() == 0) throw std::runtime_error("simplex_qp: no feasible face solved");
  return best;
}

}  // namespace mlltr
