#pragma once

#include <cstddef>
#include <vector>

#include "fairreg/dist1d.hpp"

namespace fairreg::metrics {

using dist1d::EmpiricalDist1d;
using dist1d::GaussianDist1d;

// Dense transport plan between two weighted supports, row-major.
// Row marginals match the source weights, column marginals the target's.
struct Coupling {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> mass;

  Coupling() = default;
  Coupling(std::size_t r, std::size_t c)
      : rows(r), cols(c), mass(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return mass[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return mass[i * cols + j]; }

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
};

// Order-p Wasserstein distance between discrete distributions on the line,
// computed in closed form by pairing quantile functions on the merged grid
// of cumulative weights. Exact up to roundoff; requires p >= 1.
double wasserstein_p(const EmpiricalDist1d& a, const EmpiricalDist1d& b,
                     double p);

// W1 as the area between the two CDFs, integrated exactly over the merged
// support. Agrees with wasserstein_p(a, b, 1) up to roundoff.
double wasserstein_1_cdf(const EmpiricalDist1d& a, const EmpiricalDist1d& b);

// Lower estimate of W1 from the dual side: the best 1-Lipschitz potential
// that is piecewise linear on the given grid. Each grid cell contributes the
// absolute signed area of (F_a - F_b) inside it, so the estimate never
// exceeds W1 and matches it when the grid contains every support point and
// spans the union of supports.
double wasserstein_1_dual_estimate(const EmpiricalDist1d& a,
                                   const EmpiricalDist1d& b,
                                   const std::vector<double>& grid);

// Same, with grid_points nodes equally spaced over the union of supports.
double wasserstein_1_dual_estimate(const EmpiricalDist1d& a,
                                   const EmpiricalDist1d& b,
                                   std::size_t grid_points);

// Kolmogorov-Smirnov distance: sup over z of |F_a(z) - F_b(z)|, evaluated
// exactly by checking the value and the left limit at every support point.
double ks_distance(const EmpiricalDist1d& a, const EmpiricalDist1d& b);
double ks_distance(const EmpiricalDist1d& a, const GaussianDist1d& b);

// W2 between two Gaussians: sqrt(dmean^2 + dstddev^2).
double gaussian_w2(const GaussianDist1d& a, const GaussianDist1d& b);

// Weighted W2 barycenter of discrete distributions on the line: its quantile
// function is the weighted average of the input quantile functions, assembled
// exactly on the merged grid of cumulative weights. Weights must be
// nonnegative and sum to one.
EmpiricalDist1d barycenter_1d(const std::vector<EmpiricalDist1d>& dists,
                              const std::vector<double>& weights);

// min(alpha, 1 - alpha); alpha must lie in [0, 1].
double zero_one_entropy(double alpha);

struct TransportResult {
  double distance = 0.0;
  Coupling coupling;
};

// Optimal transport between small discrete distributions (support <= 64) via
// the monotone north-west matching, which is optimal on the line for convex
// costs. Returns the distance and an explicit plan. With cross_check set, the
// plan's cost is compared against an independent LP solve and a mismatch
// throws, so the closed-form metrics above can be validated against a solver
// that never looks at the 1D structure.
TransportResult transport_lp_oracle(const EmpiricalDist1d& a,
                                    const EmpiricalDist1d& b, double p,
                                    bool cross_check = false);

struct TransportPlan {
  double cost = 0.0;
  Coupling coupling;
};

// Exact dense min-cost transport for arbitrary cost matrices (successive
// shortest paths with potentials). Test-scale only: at most 256 points per
// side. supply and demand must each sum to one.
TransportPlan transport_lp(const std::vector<double>& cost,
                           const std::vector<double>& supply,
                           const std::vector<double>& demand);

// W1 between two uniformly-weighted point clouds under the Euclidean metric,
// solved as a dense LP. Test-scale only: at most 64 points per side.
double w1_point_clouds(const std::vector<std::vector<double>>& xs,
                       const std::vector<std::vector<double>>& ys);

}  // namespace fairreg::metrics
