#ifndef MLLTR_SIMPLEX_QP_HPP_
#define MLLTR_SIMPLEX_QP_HPP_

#include <Eigen/Dense>

namespace mlltr {

enum class QpConstraint {
  kSimplex,      // sum(x) = 1, x >= 0
  kNonNegative,  // x >= 0
};

/*!
 * \brief Global minimizer of 0.5 * xᵀ H x + linearᵀ x over the simplex or
 * the nonnegative orthant.
 *
 * H must be symmetric positive semidefinite and small (K <= 16). The solver
 * enumerates all active-set patterns, solving the equality-constrained KKT
 * system on each face and keeping the best feasible candidate; for PSD H
 * this is exact. Ties in the objective resolve to the face enumerated
 * first (ascending support bitmask), so e.g. a pure linear objective with
 * tied coefficients picks the lowest vertex index.
 *
 * Throws std::invalid_argument for K > 16 or shape mismatches.
 */
Eigen::VectorXd simplex_qp(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& linear,
                           QpConstraint constraint);

}  // namespace mlltr

#endif  // MLLTR_SIMPLEX_QP_HPP_
