#ifndef MLLTR_COMBINATORS_HPP_
#define MLLTR_COMBINATORS_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mlltr/ranking.hpp"

namespace mlltr {

/*! \brief Gradient-combination coefficients; the contract is the unit simplex. */
using CoefficientVector = Eigen::VectorXd;

enum class CombinatorKind {
  kLS,      // linear scalarization
  kSLA,     // stochastic label aggregation
  kWC,      // weighted Chebyshev
  kEPO,     // exact Pareto optimal search
  kWCMGDA,  // weighted Chebyshev + MGDA
  kECAL,    // epsilon-constraint, augmented Lagrangian
  kECDBGD,  // epsilon-constraint, dynamic barrier
};

std::string to_string(CombinatorKind kind);
CombinatorKind combinator_from_string(const std::string& name);

/*! \brief True for combinators driven by a priority vector r (vs. epsilon bounds). */
bool is_priority_kind(CombinatorKind kind);

/*! \brief Epsilon-constraint trade-off: primary objective plus upper bounds
 *  on the others (ascending label order, primary skipped). */
struct EpsilonConstraint {
  std::size_t primary_index = 0;
  Eigen::VectorXd bounds;  // K - 1 entries
  double mu = 10.0;        // multiplier growth rate, > 0

  std::vector<std::size_t> secondary_indices(std::size_t label_count) const;
};

/*!
 * \brief A trade-off specification: either a priority vector r or an
 * epsilon-bound set, optionally augmented with reference losses b and a
 * uniform slack u (WC-MGDA).
 */
struct Preference {
  std::optional<Eigen::VectorXd> weights;
  std::optional<EpsilonConstraint> epsilon;
  std::optional<Eigen::VectorXd> reference_losses;
  std::optional<double> uniform_slack;

  static Preference priorities(Eigen::VectorXd r);
  static Preference epsilon_bounds(std::size_t primary_index, Eigen::VectorXd bounds,
                                   double mu = 10.0);

  /*! \brief Throws std::invalid_argument when the preference does not fit the kind. */
  void validate(std::size_t label_count, CombinatorKind kind) const;
};

/*!
 * \brief Everything a combinator carries across iterations: previous and
 * smoothed coefficients, EC multipliers, RNG state, and tuning knobs.
 * Stateful combinators must be called sequentially per training run.
 */
struct CombinatorState {
  Eigen::VectorXd prev_alpha;      // last coefficients handed to the trainer
  Eigen::VectorXd smoothed_alpha;  // EMA state; initialized to the first raw alpha
  Eigen::VectorXd last_raw_alpha;  // pre-smoothing output of the last call
  Eigen::VectorXd ec_multipliers;  // EC-AL Lagrange multipliers per secondary
  std::mt19937_64 rng{0};

  bool smoothing = false;
  double nu = 0.1;                  // EMA factor, in (0, 1)
  double epo_far_threshold = 0.01;  // cosine distance triggering pull-to-ray
  double dbgd_beta = 1.0;           // EC-DBGD control function scale
  int wcmgda_max_iter = 200;
  std::optional<double> wcmgda_u;  // slack resolved at the first iteration

  std::vector<std::string> annotations;  // fallback notes, exported with traces
  int iteration = 0;

  void seed(std::uint64_t s) { rng.seed(s); }
};

/*! \brief Clamp tiny negatives and renormalize so the simplex contract holds. */
CoefficientVector to_simplex(CoefficientVector alpha);

/*! \brief Static coefficients r / ||r||_1. */
CoefficientVector ls_coefficients(const Eigen::VectorXd& r);

/*! \brief One-hot draw from the categorical distribution r / ||r||_1. */
CoefficientVector sla_coefficients(const Eigen::VectorXd& r, std::mt19937_64& rng);

/*! \brief One-hot at argmax_k r_k c_k; ties go to the lowest index. */
CoefficientVector wc_coefficients(const Eigen::VectorXd& costs, const Eigen::VectorXd& r);

/*! \brief Anchor direction steering the cost vector towards / along the r^-1 ray. */
struct AnchorDirection {
  enum class Mode { kPullToRay, kAlongRay };
  Eigen::VectorXd a;
  Mode mode = Mode::kAlongRay;
};

AnchorDirection epo_anchor(const Eigen::VectorXd& costs, const Eigen::VectorXd& r,
                           double far_threshold);

/*! \brief Solve min ||CᵀC alpha - a||² over the simplex. */
CoefficientVector epo_coefficients(const CostState& cost_state, const AnchorDirection& anchor,
                                   CombinatorState& state);

/*! \brief Objective of the WC-MGDA dual: alphaᵀ q - u * ||G_r alpha||₂. */
double wcmgda_objective(const Eigen::MatrixXd& g_r, const Eigen::VectorXd& q, double u,
                        const Eigen::VectorXd& alpha);

/*!
 * \brief Maximize alphaᵀ(r ⊙ (c - b)) - u * ||G_r alpha||₂ over the simplex,
 * where G_r = diag(√r) √(CᵀC) diag(√r).
 */
CoefficientVector wcmgda_coefficients(const CostState& cost_state, const Eigen::VectorXd& r,
                                      const Eigen::VectorXd& b, double u, CombinatorState& state);

/*! \brief Proximal multiplier update for the augmented-Lagrangian EC method. */
CoefficientVector ecal_coefficients(const Eigen::VectorXd& costs, const EpsilonConstraint& ec,
                                    CombinatorState& state);

/*! \brief Dynamic-barrier EC: min 0.5||C alpha||² - sum_k alpha_k phi_k with
 *  alpha_{k_p} = 1 and secondary alpha >= 0, phi_k = beta * max(0, c_k - eps_k). */
CoefficientVector ecdbgd_coefficients(const CostState& cost_state, const EpsilonConstraint& ec,
                                      CombinatorState& state);

/*! \brief Exponential moving average with factor nu; updates the state. */
CoefficientVector smooth_alpha(const CoefficientVector& raw_alpha, CombinatorState& state);

/*!
 * \brief Dispatch a combinator, apply smoothing when enabled, and keep the
 * state current. Reference-point mode shifts WC costs by b (clamped at 0);
 * WC-MGDA consumes b natively.
 */
CoefficientVector get_coefficients(CombinatorKind kind, const CostState& cost_state,
                                   const Preference& preference, CombinatorState& state);

}  // namespace mlltr

#endif  // MLLTR_COMBINATORS_HPP_
