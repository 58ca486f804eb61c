#include "mlltr/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "mlltr/util.hpp"

namespace mlltr {

bool dominates(const Eigen::VectorXd& p, const Eigen::VectorXd& q, Orientation orientation) {
  if (p.size() != q.size()) throw std::invalid_argument("dominates: dimension mismatch");
  bool strict = false;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double a = orientation == Orientation::kCost ? p[k] : -p[k];
    const double b = orientation == Orientation::kCost ? q[k] : -q[k];
    if (a > b) return false;
    if (a < b) strict = true;
  }
  return strict;
}

bool dominates(const ObjectivePoint& p, const ObjectivePoint& q) {
  if (p.orientation != q.orientation)
    throw std::invalid_argument("dominates: orientation mismatch");
  return dominates(p.values, q.values, p.orientation);
}

std::vector<Eigen::VectorXd> pareto_filter(const std::vector<Eigen::VectorXd>& points,
                                           Orientation orientation) {
  std::vector<Eigen::VectorXd> kept;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (i != j && dominates(points[j], points[i], orientation)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(points[i]);
  }
  return kept;
}

double mwl(const Eigen::VectorXd& costs, const Eigen::VectorXd& r) {
  if (costs.size() != r.size()) throw std::invalid_argument("mwl: dimension mismatch");
  return (r.cwiseProduct(costs)).maxCoeff();
}

double vno(const Eigen::VectorXd& costs) {
  double volume = 1.0;
  for (Eigen::Index k = 0; k < costs.size(); ++k) volume *= std::max(costs[k], 0.0);
  return volume;
}

int compare_by_mwl_then_vno(const Eigen::VectorXd& cost_a, const Eigen::VectorXd& cost_b,
                            const Eigen::VectorXd& r, double mwl_rel_tol, VnoOrdering ordering) {
  const double ma = mwl(cost_a, r);
  const double mb = mwl(cost_b, r);
  const double scale = std::max({std::abs(ma), std::abs(mb), 1e-300});
  if (std::abs(ma - mb) > mwl_rel_tol * scale) return ma < mb ? -1 : 1;
  const double va = vno(cost_a);
  const double vb = vno(cost_b);
  if (va == vb) return 0;
  const bool a_better = ordering == VnoOrdering::kLowerWins ? va < vb : va > vb;
  return a_better ? -1 : 1;
}

namespace {

// Scale, reflect gains to costs, clip to the reference box. Returns the
// clipped point set plus the transformed reference.
std::vector<Eigen::VectorXd> prepare_points(const std::vector<Eigen::VectorXd>& points,
                                            const HVIConfig& cfg, Orientation orientation,
                                            Eigen::VectorXd* reference_out) {
  const Eigen::Index k = cfg.reference_point.size();
  if (k < 1) throw std::invalid_argument("hypervolume: empty reference point");
  Eigen::VectorXd ref = cfg.reference_point;
  if (cfg.scaling.size() != 0) {
    if (cfg.scaling.size() != k) throw std::invalid_argument("hypervolume: scaling size mismatch");
    if ((cfg.scaling.array() <= 0.0).any())
      throw std::invalid_argument("hypervolume: scaling divisors must be positive");
    ref = ref.cwiseQuotient(cfg.scaling);
  }
  if (orientation == Orientation::kGain) ref = -ref;

  std::vector<Eigen::VectorXd> out;
  out.reserve(points.size());
  bool clipped = false;
  for (const auto& p : points) {
    if (p.size() != k) throw std::invalid_argument("hypervolume: point dimension mismatch");
    Eigen::VectorXd v = p;
    if (cfg.scaling.size() != 0) v = v.cwiseQuotient(cfg.scaling);
    if (orientation == Orientation::kGain) v = -v;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (v[i] > ref[i]) {
        v[i] = ref[i];
        clipped = true;
      }
    }
    out.push_back(std::move(v));
  }
  if (clipped) Log::Warning("hypervolume: point beyond the reference point was clipped");
  *reference_out = ref;
  return out;
}

// Union of [p, ref] boxes in 2-D by a left-to-right sweep over the
// non-dominated set.
double hv2(std::vector<Eigen::VectorXd> pts, const Eigen::VectorXd& ref) {
  pts = pareto_filter(pts, Orientation::kCost);
  std::sort(pts.begin(), pts.end(), [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a[0] != b[0]) return a[0] < b[0];
    return a[1] < b[1];
  });
  double area = 0.0;
  double prev_y = ref[1];
  for (const auto& p : pts) {
    if (p[1] >= prev_y) continue;  // duplicate-ish after filtering
    area += (ref[0] - p[0]) * (prev_y - p[1]);
    prev_y = p[1];
  }
  return area;
}

// 3-D: slice along the third axis at point coordinates; each slab
// contributes (2-D hypervolume of points below the slab) * thickness.
double hv3(const std::vector<Eigen::VectorXd>& pts, const Eigen::VectorXd& ref) {
  std::vector<double> zs;
  for (const auto& p : pts) zs.push_back(p[2]);
  std::sort(zs.begin(), zs.end());
  zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
  double volume = 0.0;
  Eigen::VectorXd ref2(2);
  ref2 << ref[0], ref[1];
  for (std::size_t s = 0; s < zs.size(); ++s) {
    const double lo = zs[s];
    const double hi = (s + 1 < zs.size()) ? zs[s + 1] : ref[2];
    if (hi <= lo) continue;
    std::vector<Eigen::VectorXd> slab;
    for (const auto& p : pts) {
      if (p[2] <= lo) {
        Eigen::VectorXd q(2);
        q << p[0], p[1];
        slab.push_back(std::move(q));
      }
    }
    if (!slab.empty()) volume += hv2(slab, ref2) * (hi - lo);
  }
  return volume;
}

double mc_estimate(const std::vector<Eigen::VectorXd>& pts, const Eigen::VectorXd& ref,
                   std::size_t samples, std::uint64_t seed) {
  const Eigen::Index k = ref.size();
  Eigen::VectorXd lower = ref;
  for (const auto& p : pts) lower = lower.cwiseMin(p);
  double box = 1.0;
  for (Eigen::Index i = 0; i < k; ++i) box *= ref[i] - lower[i];
  if (box <= 0.0 || pts.empty()) return 0.0;

  std::mt19937_64 rng(seed);
  auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::size_t hit = 0;
  Eigen::VectorXd x(k);
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < k; ++i) x[i] = lower[i] + unit() * (ref[i] - lower[i]);
    for (const auto& p : pts) {
      if ((x.array() >= p.array()).all()) {
        ++hit;
        break;
      }
    }
  }
  return box * static_cast<double>(hit) / static_cast<double>(samples);
}

}  // namespace

double hypervolume(const std::vector<Eigen::VectorXd>& points, const HVIConfig& cfg,
                   Orientation orientation) {
  Eigen::VectorXd ref;
  std::vector<Eigen::VectorXd> pts = prepare_points(points, cfg, orientation, &ref);
  if (pts.empty()) return 0.0;
  switch (ref.size()) {
    case 1: {
      double best = ref[0];
      for (const auto& p : pts) best = std::min(best, p[0]);
      return ref[0] - best;
    }
    case 2:
      return hv2(std::move(pts), ref);
    case 3:
      return hv3(pts, ref);
    default:
      return mc_estimate(pts, ref, cfg.mc_samples, cfg.mc_seed);
  }
}

double hypervolume_monte_carlo(const std::vector<Eigen::VectorXd>& points, const HVIConfig& cfg,
                               Orientation orientation) {
  Eigen::VectorXd ref;
  std::vector<Eigen::VectorXd> pts = prepare_points(points, cfg, orientation, &ref);
  if (pts.empty()) return 0.0;
  return mc_estimate(pts, ref, cfg.mc_samples, cfg.mc_seed);
}

}  // namespace mlltr
