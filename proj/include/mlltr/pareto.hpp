#ifndef MLLTR_PARETO_HPP_
#define MLLTR_PARETO_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace mlltr {

/*! \brief Whether objective values are costs (minimize) or gains (maximize). */
enum class Orientation { kCost, kGain };

/*! \brief A point in objective space. */
struct ObjectivePoint {
  Eigen::VectorXd values;
  Orientation orientation = Orientation::kCost;
};

/*!
 * \brief True iff p dominates q: componentwise at least as good with at
 * least one strict improvement. Both points must share K and orientation.
 */
bool dominates(const ObjectivePoint& p, const ObjectivePoint& q);
bool dominates(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
               Orientation orientation = Orientation::kCost);

/*! \brief The non-dominated subset, in stable input order. */
std::vector<Eigen::VectorXd> pareto_filter(const std::vector<Eigen::VectorXd>& points,
                                           Orientation orientation = Orientation::kCost);

/*! \brief Maximum weighted loss: max_k r_k c_k. */
double mwl(const Eigen::VectorXd& costs, const Eigen::VectorXd& r);

/*! \brief Volume of the axis-aligned box between the origin and c
 *  (negative coordinates clamped to 0). Tie-breaker for insignificant MWL
 *  differences. */
double vno(const Eigen::VectorXd& costs);

/*! \brief Ordering used when MWL differences are insignificant. */
enum class VnoOrdering { kLowerWins, kHigherWins };

/*!
 * \brief Compare two models by MWL with the VNO tie-breaker: negative when
 * a is better. When |mwl_a - mwl_b| is within `mwl_rel_tol` relative
 * tolerance, the VNO decides per `ordering` (default: lower VNO wins).
 */
int compare_by_mwl_then_vno(const Eigen::VectorXd& cost_a, const Eigen::VectorXd& cost_b,
                            const Eigen::VectorXd& r, double mwl_rel_tol = 1e-3,
                            VnoOrdering ordering = VnoOrdering::kLowerWins);

/*! \brief Hypervolume configuration: reference point, per-objective scaling
 *  divisors, and Monte Carlo controls for K > 3. */
struct HVIConfig {
  Eigen::VectorXd reference_point;
  Eigen::VectorXd scaling;  // empty = no scaling
  std::size_t mc_samples = 1'000'000;
  std::uint64_t mc_seed = 12345;
};

/*!
 * \brief Hypervolume dominated by `points` relative to the reference point
 * after per-objective scaling. Exact sweep for K = 2, slicing for K = 3,
 * seeded Monte Carlo otherwise. Gain orientation is handled by reflection.
 * Points beyond the reference are clipped with a warning.
 */
double hypervolume(const std::vector<Eigen::VectorXd>& points, const HVIConfig& cfg,
                   Orientation orientation = Orientation::kCost);

/*! \brief Monte Carlo estimate with the same clipping/scaling semantics
 *  (exposed for cross-checking the exact paths). */
double hypervolume_monte_carlo(const std::vector<Eigen::VectorXd>& points, const HVIConfig& cfg,
                               Orientation orientation = Orientation::kCost);

}  // namespace mlltr

#endif  // MLLTR_PARETO_HPP_
