#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairreg/dist1d.hpp"

namespace fairreg::bounds {

using dist1d::EmpiricalDist1d;

// Per-group prediction errors under the l_p metric.
struct GroupErrors {
  double eps0 = 0.0;
  double eps1 = 0.0;
  double p = 2.0;
  double alpha = 0.5;  // fraction of the population in group 0
};

// Population error: the group errors themselves (not their p-th powers)
// combine linearly with the group marginal.
double joint_error(const GroupErrors& g);

// Average of the two group errors, weighting groups equally.
double balanced_error(const GroupErrors& g);

// One verified inequality: lower_bound is what the mathematics guarantees,
// measured_lhs is the quantity it constrains, slack = measured - lower.
// A certificate whose guarantee degenerates (lower bound <= 0, or an upper
// bound that exceeds the trivial one) is flagged vacuous rather than dropped.
struct BoundCertificate {
  std::string name;
  double lower_bound = 0.0;
  double measured_lhs = 0.0;
  double slack = 0.0;
  bool vacuous = false;
  std::string inputs_digest;

  nlohmann::json to_json() const;
};

// For SP predictors the group error sum cannot undercut the W_p distance
// between the group target distributions.
double sp_error_sum_lower_bound(const EmpiricalDist1d& y0,
                                const EmpiricalDist1d& y1, double p);

struct MeanGapBounds {
  double mae_bound = 0.0;  // lower bound on the sum of group MAEs
  double mse_bound = 0.0;  // lower bound on the sum of squared group l2 errors
};

// Bounds from the group mean gap alone: |gap| for MAE, gap^2/2 for MSE.
MeanGapBounds mean_gap_bounds(const EmpiricalDist1d& y0,
                              const EmpiricalDist1d& y1);

// Joint-error floor for SP predictors: min(alpha, 1-alpha) * W_p.
double joint_error_lower_bound(const EmpiricalDist1d& y0,
                               const EmpiricalDist1d& y1, double alpha,
                               double p);

// Finite-sample floor on the l1 group error sum of an SP predictor, holding
// with probability 1-delta: W1 of the empirical group targets minus
// (2*c1 + sqrt(2*ln(2/delta))) * sqrt(1/n). May be negative; callers must
// report such certificates as vacuous instead of clamping.
double finite_sample_lower_bound(const EmpiricalDist1d& y0,
                                 const EmpiricalDist1d& y1, std::size_t n,
                                 double delta, double c1);

struct ExcessRiskInputs {
  double opt_err0 = 0.0;      // best attainable group-0 error
  double opt_err1 = 0.0;      // best attainable group-1 error
  double opt_pred_dist = 0.0;  // W_p between the optimal group predictors' outputs
  double eps_sp = 0.0;         // Wasserstein SP slack of the constrained predictor
};

// Floor on the sum of group excess risks of an eps_sp-fair predictor.
double excess_risk_lower_bound(const ExcessRiskInputs& in);

// KS level implied by a Wasserstein SP slack under a density bound C.
double implied_sp_level(double eps_sp, double density_bound_c);

// KS distance from W1 when both densities are bounded by C: 2*sqrt(C*W1).
double ks_from_w1(double w1, double density_bound_c);

// Accuracy disparity of a rho-Lipschitz predictor: sqrt(rho^2+1) * W1 between
// the joint group distributions.
double accuracy_parity_bound(double rho, double w1_joint);

// KS disparity guaranteed by a rho-Lipschitz head on representations whose
// group W1 distance is w1_repr: 2*sqrt(C*rho*w1_repr).
double representation_sp_bound(double w1_repr, double rho,
                               double density_bound_c);

struct PriceComparison {
  double without_attribute = 0.0;  // error floor when predictions ignore A
  double with_attribute = 0.0;     // error floor when per-group outputs share a law
};

// l2 accuracy cost of exact SP, with and without access to the group
// attribute. The with-attribute price routes both groups to their W2
// barycenter and always dominates the without-attribute price.
PriceComparison price_comparison(const EmpiricalDist1d& y0,
                                 const EmpiricalDist1d& y1, double alpha);

GroupErrors measure_group_errors(const std::vector<double>& predictions,
                                 const std::vector<double>& targets,
                                 const std::vector<std::uint8_t>& groups,
                                 double p);

// Heuristic density-bound estimate: max histogram density over a
// Freedman-Diaconis binning. Only a plausibility check, not a guarantee.
double estimate_density_bound(const std::vector<double>& values);

}  // namespace fairreg::bounds
