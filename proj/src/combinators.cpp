#include "mlltr/combinators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mlltr/simplex_qp.hpp"
#include "mlltr/util.hpp"

namespace mlltr {

std::string to_string(CombinatorKind kind) {
  switch (kind) {
    case CombinatorKind::kLS: return "ls";
    case CombinatorKind::kSLA: return "sla";
    case CombinatorKind::kWC: return "wc";
    case CombinatorKind::kEPO: return "epo";
    case CombinatorKind::kWCMGDA: return "wc-mgda";
    case CombinatorKind::kECAL: return "ec-al";
    case CombinatorKind::kECDBGD: return "ec-dbgd";
  }
  throw std::logic_error("unknown combinator kind");
}

CombinatorKind combinator_from_string(const std::string& name) {
  if (name == "ls") return CombinatorKind::kLS;
  if (name == "sla") return CombinatorKind::kSLA;
  if (name == "wc") return CombinatorKind::kWC;
  if (name == "epo") return CombinatorKind::kEPO;
  if (name == "wc-mgda" || name == "wcmgda") return CombinatorKind::kWCMGDA;
  if (name == "ec-al" || name == "ecal") return CombinatorKind::kECAL;
  if (name == "ec-dbgd" || name == "ecdbgd") return CombinatorKind::kECDBGD;
  throw std::invalid_argument("unknown combinator '" + name + "'");
}

bool is_priority_kind(CombinatorKind kind) {
  return kind == CombinatorKind::kLS || kind == CombinatorKind::kSLA ||
         kind == CombinatorKind::kWC || kind == CombinatorKind::kEPO ||
         kind == CombinatorKind::kWCMGDA;
}

std::vector<std::size_t> EpsilonConstraint::secondary_indices(std::size_t label_count) const {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < label_count; ++k)
    if (k != primary_index) idx.push_back(k);
  return idx;
}

Preference Preference::priorities(Eigen::VectorXd r) {
  Preference p;
  p.weights = std::move(r);
  return p;
}

Preference Preference::epsilon_bounds(std::size_t primary_index, Eigen::VectorXd bounds,
                                      double mu) {
  Preference p;
  EpsilonConstraint ec;
  ec.primary_index = primary_index;
  ec.bounds = std::move(bounds);
  ec.mu = mu;
  p.epsilon = std::move(ec);
  return p;
}

void Preference::validate(std::size_t label_count, CombinatorKind kind) const {
  if (weights.has_value() == epsilon.has_value())
    throw std::invalid_argument("preference must set exactly one of priorities / epsilon bounds");
  if (is_priority_kind(kind)) {
    if (!weights) throw std::invalid_argument(to_string(kind) + " needs a priority vector");
    if (static_cast<std::size_t>(weights->size()) != label_count)
      throw std::invalid_argument("priority vector has wrong size");
    if ((weights->array() < 0.0).any() || !(weights->sum() > 0.0))
      throw std::invalid_argument("priorities must be nonnegative with positive sum");
    // EPO and WC-MGDA need r^-1 / sqrt(r): strictly positive priorities.
    if ((kind == CombinatorKind::kEPO || kind == CombinatorKind::kWCMGDA) &&
        (weights->array() <= 0.0).any())
      throw std::invalid_argument(to_string(kind) + " needs strictly positive priorities");
  } else {
    if (!epsilon) throw std::invalid_argument(to_string(kind) + " needs epsilon bounds");
    if (epsilon->primary_index >= label_count)
      throw std::invalid_argument("primary objective index out of range");
    if (static_cast<std::size_t>(epsilon->bounds.size()) != label_count - 1)
      throw std::invalid_argument("epsilon bounds must cover every secondary objective");
    if (!epsilon->bounds.allFinite()) throw std::invalid_argument("epsilon bounds must be finite");
    if (!(epsilon->mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  }
  if (reference_losses && static_cast<std::size_t>(reference_losses->size()) != label_count)
    throw std::invalid_argument("reference losses have wrong size");
  if (uniform_slack && !(*uniform_slack >= 0.0))
    throw std::invalid_argument("uniform slack must be >= 0");
}

CoefficientVector to_simplex(CoefficientVector alpha) {
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (alpha[i] < 0.0) alpha[i] = 0.0;
    if (!std::isfinite(alpha[i])) throw std::runtime_error("non-finite combination coefficient");
  }
  const double total = alpha.sum();
  if (total <= 0.0) {
    alpha.setConstant(1.0 / static_cast<double>(alpha.size()));
    return alpha;
  }
  return alpha / total;
}

CoefficientVector ls_coefficients(const Eigen::VectorXd& r) { return r / r.sum(); }

CoefficientVector sla_coefficients(const Eigen::VectorXd& r, std::mt19937_64& rng) {
  const double total = r.sum();
  // 53-bit uniform in [0, 1); implementation-independent.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  CoefficientVector alpha = Eigen::VectorXd::Zero(r.size());
  double cdf = 0.0;
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    cdf += r[k] / total;
    if (u < cdf) {
      alpha[k] = 1.0;
      return alpha;
    }
  }
  alpha[r.size() - 1] = 1.0;
  return alpha;
}

CoefficientVector wc_coefficients(const Eigen::VectorXd& costs, const Eigen::VectorXd& r) {
  Eigen::Index k_star = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < costs.size(); ++k) {
    const double weighted = r[k] * costs[k];
    if (weighted > best) {
      best = weighted;
      k_star = k;
    }
  }
  CoefficientVector alpha = Eigen::VectorXd::Zero(costs.size());
  alpha[k_star] = 1.0;
  return alpha;
}

AnchorDirection epo_anchor(const Eigen::VectorXd& costs, const Eigen::VectorXd& r,
                           double far_threshold) {
  AnchorDirection anchor;
  const Eigen::VectorXd r_inv = r.cwiseInverse();
  anchor.a = r_inv;
  anchor.mode = AnchorDirection::Mode::kAlongRay;
  if (costs.size() <= 1) return anchor;
  const double cost_norm = costs.norm();
  if (cost_norm <= 0.0) return anchor;

  const double cosine = costs.dot(r_inv) / (cost_norm * r_inv.norm());
  if (1.0 - cosine > far_threshold) {
    const Eigen::VectorXd ray = r_inv / r_inv.norm();
    anchor.a = costs - costs.dot(ray) * ray;
    anchor.mode = AnchorDirection::Mode::kPullToRay;
  }
  return anchor;
}

namespace {

bool degenerate_gram(const Eigen::MatrixXd& gram) {
  return !gram.allFinite() || gram.trace() < 1e-30;
}

}  // namespace

CoefficientVector epo_coefficients(const CostState& cost_state, const AnchorDirection& anchor,
                                   CombinatorState& state) {
  const Eigen::Index k = cost_state.costs.size();
  if (k == 1) return Eigen::VectorXd::Ones(1);
  if (degenerate_gram(cost_state.gram)) {
    state.annotations.push_back("epo: degenerate gram, kept previous coefficients (iteration " +
                                std::to_string(state.iteration) + ")");
    if (state.smoothed_alpha.size() == k) return state.smoothed_alpha;
    return Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  }
  const Eigen::MatrixXd& g = cost_state.gram;
  const Eigen::MatrixXd hessian = 2.0 * g.transpose() * g;
  const Eigen::VectorXd linear = -2.0 * g.transpose() * anchor.a;
  return simplex_qp(hessian, linear, QpConstraint::kSimplex);
}

double wcmgda_objective(const Eigen::MatrixXd& g_r, const Eigen::VectorXd& q, double u,
                        const Eigen::VectorXd& alpha) {
  return q.dot(alpha) - u * (g_r * alpha).norm();
}

CoefficientVector wcmgda_coefficients(const CostState& cost_state, const Eigen::VectorXd& r,
                                      const Eigen::VectorXd& b, double u,
                                      CombinatorState& state) {
  const Eigen::Index k = cost_state.costs.size();
  if (k == 1) return Eigen::VectorXd::Ones(1);

  const Eigen::VectorXd q = r.cwiseProduct(cost_state.costs - b);
  const Eigen::VectorXd sqrt_r = r.cwiseSqrt();
  const Eigen::MatrixXd g_r =
      sqrt_r.asDiagonal() * cost_state.gram_sqrt * sqrt_r.asDiagonal();
  const Eigen::MatrixXd quad = g_r * g_r;  // ||G_r a||² = aᵀ (G_r²) a

  // Majorize-minimize on the concave dual: u||G_r a|| <= (s/2) aᵀQa + u²/(2s)
  // with equality at s = u / ||G_r a||, so each exact QP step ascends.
  Eigen::VectorXd alpha = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  double value = wcmgda_objective(g_r, q, u, alpha);
  bool converged = false;
  for (int iter = 0; iter < state.wcmgda_max_iter; ++iter) {
    const double tau = std::max((g_r * alpha).norm(), 1e-12);
    const double s = u / tau;
    const Eigen::VectorXd next = simplex_qp(s * quad, -q, QpConstraint::kSimplex);
    const double next_value = wcmgda_objective(g_r, q, u, next);
    const bool done = std::abs(next_value - value) <= 1e-13 * (1.0 + std::abs(value));
    if (next_value >= value) {
      alpha = next;
      value = next_value;
    }
    if (done) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    state.annotations.push_back("wc-mgda: no convergence after " +
                                std::to_string(state.wcmgda_max_iter) +
                                " iterations, fell back to wc (iteration " +
                                std::to_string(state.iteration) + ")");
    return wc_coefficients((cost_state.costs - b).cwiseMax(0.0), r);
  }
  return alpha;
}

CoefficientVector ecal_coefficients(const Eigen::VectorXd& costs, const EpsilonConstraint& ec,
                                    CombinatorState& state) {
  const std::size_t k = static_cast<std::size_t>(costs.size());
  const auto secondaries = ec.secondary_indices(k);
  if (state.ec_multipliers.size() != static_cast<Eigen::Index>(secondaries.size()))
    state.ec_multipliers = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(secondaries.size()));

  for (std::size_t s = 0; s < secondaries.size(); ++s) {
    const double violation = costs[static_cast<Eigen::Index>(secondaries[s])] - ec.bounds[s];
    if (violation >= 0.0) {
      state.ec_multipliers[s] = ec.mu * violation + state.ec_multipliers[s];
    } else {
      state.ec_multipliers[s] = 0.0;  // reset, not decay
    }
  }

  CoefficientVector alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  alpha[static_cast<Eigen::Index>(ec.primary_index)] = 1.0;
  for (std::size_t s = 0; s < secondaries.size(); ++s)
    alpha[static_cast<Eigen::Index>(secondaries[s])] = state.ec_multipliers[s];
  return alpha / alpha.sum();
}

CoefficientVector ecdbgd_coefficients(const CostState& cost_state, const EpsilonConstraint& ec,
                                      CombinatorState& state) {
  const std::size_t k = static_cast<std::size_t>(cost_state.costs.size());
  if (k == 1) return Eigen::VectorXd::Ones(1);
  if (degenerate_gram(cost_state.gram)) {
    state.annotations.push_back("ec-dbgd: degenerate gram, fell back to ec-al (iteration " +
                                std::to_string(state.iteration) + ")");
    return ecal_coefficients(cost_state.costs, ec, state);
  }
  const auto secondaries = ec.secondary_indices(k);
  const Eigen::Index n_sec = static_cast<Eigen::Index>(secondaries.size());
  const Eigen::Index kp = static_cast<Eigen::Index>(ec.primary_index);

  // With alpha_{k_p} fixed at 1, 0.5 ||C alpha||² - phiᵀ alpha_sec reduces to
  // 0.5 zᵀ G_SS z + (G_{S,p} - phi)ᵀ z over z >= 0.
  Eigen::MatrixXd hessian(n_sec, n_sec);
  Eigen::VectorXd linear(n_sec);
  for (Eigen::Index a = 0; a < n_sec; ++a) {
    const Eigen::Index ia = static_cast<Eigen::Index>(secondaries[a]);
    for (Eigen::Index b2 = 0; b2 < n_sec; ++b2)
      hessian(a, b2) = cost_state.gram(ia, static_cast<Eigen::Index>(secondaries[b2]));
    const double violation = cost_state.costs[ia] - ec.bounds[a];
    const double phi = state.dbgd_beta * std::max(0.0, violation);
    linear[a] = cost_state.gram(ia, kp) - phi;
  }
  const Eigen::VectorXd z = simplex_qp(hessian, linear, QpConstraint::kNonNegative);

  CoefficientVector alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  alpha[kp] = 1.0;
  for (Eigen::Index a = 0; a < n_sec; ++a)
    alpha[static_cast<Eigen::Index>(secondaries[a])] = z[a];
  return alpha / alpha.sum();
}

CoefficientVector smooth_alpha(const CoefficientVector& raw_alpha, CombinatorState& state) {
  if (!(state.nu > 0.0 && state.nu < 1.0))
    throw std::invalid_argument("smoothing factor nu must be in (0, 1)");
  if (state.smoothed_alpha.size() != raw_alpha.size()) {
    state.smoothed_alpha = raw_alpha;
    return raw_alpha;
  }
  CoefficientVector smoothed = state.nu * raw_alpha + (1.0 - state.nu) * state.smoothed_alpha;
  smoothed /= smoothed.sum();
  state.smoothed_alpha = smoothed;
  return smoothed;
}

CoefficientVector get_coefficients(CombinatorKind kind, const CostState& cost_state,
                                   const Preference& preference, CombinatorState& state) {
  const std::size_t k = cost_state.num_objectives();
  preference.validate(k, kind);

  CoefficientVector alpha;
  switch (kind) {
    case CombinatorKind::kLS:
      alpha = ls_coefficients(*preference.weights);
      break;
    case CombinatorKind::kSLA:
      alpha = sla_coefficients(*preference.weights, state.rng);
      break;
    case CombinatorKind::kWC: {
      Eigen::VectorXd costs = cost_state.costs;
      if (preference.reference_losses)
        costs = (costs - *preference.reference_losses).cwiseMax(0.0);
      alpha = wc_coefficients(costs, *preference.weights);
      break;
    }
    case CombinatorKind::kEPO: {
      const AnchorDirection anchor =
          epo_anchor(cost_state.costs, *preference.weights, state.epo_far_threshold);
      alpha = epo_coefficients(cost_state, anchor, state);
      break;
    }
    case CombinatorKind::kWCMGDA: {
      const Eigen::VectorXd b = preference.reference_losses
                                    ? *preference.reference_losses
                                    : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
      double u;
      if (preference.uniform_slack) {
        u = *preference.uniform_slack;
      } else {
        if (!state.wcmgda_u) {
          // Scale-aware default: a tenth of the initial weighted cost norm.
          state.wcmgda_u = 0.1 * preference.weights->cwiseProduct(cost_state.costs).norm();
        }
        u = *state.wcmgda_u;
      }
      alpha = wcmgda_coefficients(cost_state, *preference.weights, b, u, state);
      break;
    }
    case CombinatorKind::kECAL:
      alpha = ecal_coefficients(cost_state.costs, *preference.epsilon, state);
      break;
    case CombinatorKind::kECDBGD:
      alpha = ecdbgd_coefficients(cost_state, *preference.epsilon, state);
      break;
  }

  alpha = to_simplex(std::move(alpha));
  state.last_raw_alpha = alpha;
  CoefficientVector effective;
  if (state.smoothing) {
    effective = smooth_alpha(alpha, state);
  } else {
    state.smoothed_alpha = alpha;
    effective = alpha;
  }
  state.prev_alpha = effective;
  ++state.iteration;
  return effective;
}

}  // namespace mlltr
