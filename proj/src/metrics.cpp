#include "fairreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fairreg::metrics {

namespace {

double pow_p(double d, double p) {
  d = std::abs(d);
  if (p == 1.0) return d;
  if (p == 2.0) return d * d;
  if (p == 3.0) return d * d * d;
  return std::pow(d, p);
}

double root_p(double x, double p) {
  if (p == 1.0) return x;
  if (p == 2.0) return std::sqrt(x);
  return std::pow(x, 1.0 / p);
}

void check_order(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("order below 1");
}

// F_a - F_b as a step function: value diff[k] on [z[k], z[k+1]), zero
// outside [z.front(), z.back()].
struct CdfDiff {
  std::vector<double> z;
  std::vector<double> diff;
};

CdfDiff cdf_difference(const EmpiricalDist1d& a, const EmpiricalDist1d& b) {
  const auto& xa = a.points();
  const auto& xb = b.points();
  const auto& ca = a.cumulative();
  const auto& cb = b.cumulative();
  CdfDiff out;
  out.z.reserve(xa.size() + xb.size());
  out.diff.reserve(xa.size() + xb.size());
  std::size_t ia = 0, ib = 0;
  double fa = 0.0, fb = 0.0;
  while (ia < xa.size() || ib < xb.size()) {
    const bool take_a =
        ia < xa.size() && (ib >= xb.size() || xa[ia] <= xb[ib]);
    const double z = take_a ? xa[ia] : xb[ib];
    if (ia < xa.size() && xa[ia] == z) fa = ca[ia++];
    if (ib < xb.size() && xb[ib] == z) fb = cb[ib++];
    out.z.push_back(z);
    out.diff.push_back(fa - fb);
  }
  return out;
}

}  // namespace

std::vector<double> Coupling::row_sums() const {
  std::vector<double> out(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[i] += at(i, j);
  return out;
}

std::vector<double> Coupling::col_sums() const {
  std::vector<double> out(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[j] += at(i, j);
  return out;
}

double wasserstein_p(const EmpiricalDist1d& a, const EmpiricalDist1d& b,
                     double p) {
  check_order(p);
  const auto& xa = a.points();
  const auto& xb = b.points();
  const auto& ca = a.cumulative();
  const auto& cb = b.cumulative();
  std::size_t ia = 0, ib = 0;
  double tprev = 0.0, acc = 0.0;
  // Both quantile functions are step functions on the shared level axis; the
  // merged jump levels split [0, 1] into intervals where both are constant.
  while (ia < xa.size() && ib < xb.size()) {
    const double tnext = std::min(ca[ia], cb[ib]);
    if (tnext > tprev) acc += (tnext - tprev) * pow_p(xa[ia] - xb[ib], p);
    if (ca[ia] == tnext) ++ia;
    if (cb[ib] == tnext) ++ib;
    tprev = tnext;
  }
  return root_p(acc, p);
}

double wasserstein_1_cdf(const EmpiricalDist1d& a, const EmpiricalDist1d& b) {
  const CdfDiff d = cdf_difference(a, b);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < d.z.size(); ++k)
    acc += std::abs(d.diff[k]) * (d.z[k + 1] - d.z[k]);
  return acc;
}

double wasserstein_1_dual_estimate(const EmpiricalDist1d& a,
                                   const EmpiricalDist1d& b,
                                   const std::vector<double>& grid) {
  std::vector<double> g = grid;
  for (double v : g)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite value");
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  if (g.size() < 2) throw std::invalid_argument("degenerate grid");

  const CdfDiff d = cdf_difference(a, b);
  // Within one grid cell the best 1-Lipschitz potential has slope +-1, so the
  // cell contributes |signed area of (F_a - F_b)|. Cancellation inside a cell
  // is exactly what makes this a lower estimate.
  double total = 0.0;
  std::size_t seg = 0;
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    const double lo = g[k], hi = g[k + 1];
    while (seg + 1 < d.z.size() && d.z[seg + 1] <= lo) ++seg;
    double cell = 0.0;
    for (std::size_t s = seg; s + 1 < d.z.size() && d.z[s] < hi; ++s) {
      const double s_lo = std::max(d.z[s], lo);
      const double s_hi = std::min(d.z[s + 1], hi);
      if (s_hi > s_lo) cell += d.diff[s] * (s_hi - s_lo);
    }
    total += std::abs(cell);
  }
  return total;
}

double wasserstein_1_dual_estimate(const EmpiricalDist1d& a,
                                   const EmpiricalDist1d& b,
                                   std::size_t grid_points) {
  if (grid_points < 2) throw std::invalid_argument("degenerate grid");
  const double lo = std::min(a.min(), b.min());
  const double hi = std::max(a.max(), b.max());
  if (hi == lo) return 0.0;  // both are the same point mass
  std::vector<double> g(grid_points);
  for (std::size_t k = 0; k < grid_points; ++k)
    g[k] = lo + (hi - lo) * static_cast<double>(k) /
                    static_cast<double>(grid_points - 1);
  return wasserstein_1_dual_estimate(a, b, g);
}

double ks_distance(const EmpiricalDist1d& a, const EmpiricalDist1d& b) {
  const auto& xa = a.points();
  const auto& xb = b.points();
  const auto& ca = a.cumulative();
  const auto& cb = b.cumulative();
  std::size_t ia = 0, ib = 0;
  double fa = 0.0, fb = 0.0, ks = 0.0;
  while (ia < xa.size() || ib < xb.size()) {
    const bool take_a =
        ia < xa.size() && (ib >= xb.size() || xa[ia] <= xb[ib]);
    const double z = take_a ? xa[ia] : xb[ib];
    ks = std::max(ks, std::abs(fa - fb));  // left limit at z
    if (ia < xa.size() && xa[ia] == z) fa = ca[ia++];
    if (ib < xb.size() && xb[ib] == z) fb = cb[ib++];
    ks = std::max(ks, std::abs(fa - fb));
  }
  return ks;
}

double ks_distance(const EmpiricalDist1d& a, const GaussianDist1d& b) {
  const auto& x = a.points();
  const auto& c = a.cumulative();
  double ks = 0.0;
  double left = 0.0;
  // The Gaussian CDF is continuous and increasing, so on every interval where
  // the empirical CDF is flat the gap is extremal at the interval ends.
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double phi = b.cdf(x[i]);
    ks = std::max(ks, std::abs(left - phi));
    ks = std::max(ks, std::abs(c[i] - phi));
    left = c[i];
  }
  return ks;
}

double gaussian_w2(const GaussianDist1d& a, const GaussianDist1d& b) {
  const double dm = a.mean - b.mean;
  const double ds = a.stddev() - b.stddev();
  return std::sqrt(dm * dm + ds * ds);
}

EmpiricalDist1d barycenter_1d(const std::vector<EmpiricalDist1d>& dists,
                              const std::vector<double>& weights) {
  if (dists.empty()) throw std::invalid_argument("no distributions");
  if (dists.size() != weights.size())
    throw std::invalid_argument("weights size mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw std::invalid_argument("non-finite value");
    if (w < 0.0) throw std::invalid_argument("negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("weights not normalized");

  // The barycenter's quantile function is the weighted mean of the input
  // quantile functions; walk the merged cumulative-weight levels so it is
  // assembled exactly.
  std::vector<std::size_t> idx(dists.size(), 0);
  std::vector<double> pts, wts;
  double tprev = 0.0;
  while (true) {
    double tnext = 1.0;
    for (std::size_t k = 0; k < dists.size(); ++k)
      tnext = std::min(tnext, dists[k].cumulative()[idx[k]]);
    double point = 0.0;
    for (std::size_t k = 0; k < dists.size(); ++k)
      point += (weights[k] / total) * dists[k].points()[idx[k]];
    if (tnext > tprev) {
      pts.push_back(point);
      wts.push_back(tnext - tprev);
    }
    if (tnext == 1.0) break;
    for (std::size_t k = 0; k < dists.size(); ++k)
      if (dists[k].cumulative()[idx[k]] == tnext) ++idx[k];
    tprev = tnext;
  }
  return EmpiricalDist1d(std::move(pts), std::move(wts));
}

double zero_one_entropy(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("not a probability");
  return std::min(alpha, 1.0 - alpha);
}

TransportPlan transport_lp(const std::vector<double>& cost,
                           const std::vector<double>& supply,
                           const std::vector<double>& demand) {
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();
  if (m == 0 || n == 0) throw std::invalid_argument("empty marginals");
  if (m > 256 || n > 256)
    throw std::invalid_argument("transport solver is test-scale only");
  if (cost.size() != m * n) throw std::invalid_argument("cost size mismatch");
  double ssum = 0.0, dsum = 0.0;
  for (double v : cost)
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("invalid cost");
  for (double v : supply) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("negative weight");
    ssum += v;
  }
  for (double v : demand) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("negative weight");
    dsum += v;
  }
  if (std::abs(ssum - 1.0) > 1e-9 || std::abs(dsum - 1.0) > 1e-9)
    throw std::invalid_argument("weights not normalized");

  // Successive shortest augmenting paths with node potentials. Nodes:
  // rows 0..m-1, cols m..m+n-1, source m+n, sink m+n+1. Residual arcs:
  //   source->row   while the row still has supply (cost 0)
  //   row->col      always (cost c_ij)
  //   col->row      while flow f_ij > 0 (cost -c_ij)
  //   col->sink     while the col still has demand (cost 0)
  // Potentials keep every residual reduced cost nonnegative, so plain
  // Dijkstra applies.
  const std::size_t nodes = m + n + 2;
  const std::size_t src = m + n, dst = m + n + 1;
  const double inf = std::numeric_limits<double>::infinity();
  const double mass_eps = 1e-15;

  std::vector<double> flow(m * n, 0.0);
  std::vector<double> rs = supply, ds = demand;
  std::vector<double> pot(nodes, 0.0);
  std::vector<double> dist(nodes);
  std::vector<int> parent(nodes);
  std::vector<char> done(nodes);

  const std::size_t max_iter = 64 * (m + n) + 64;
  std::size_t iter = 0;
  while (true) {
    double remaining = 0.0;
    for (double v : rs) remaining += v;
    if (remaining <= 1e-12) break;
    if (++iter > max_iter)
      throw std::logic_error("transport iteration limit");

    std::fill(dist.begin(), dist.end(), inf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), char{0});
    dist[src] = 0.0;

    for (std::size_t round = 0; round < nodes; ++round) {
      std::size_t u = nodes;
      double best = inf;
      for (std::size_t v = 0; v < nodes; ++v)
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      if (u == nodes) break;
      done[u] = 1;
      if (u == dst) break;
      if (u == src) {
        for (std::size_t i = 0; i < m; ++i)
          if (rs[i] > mass_eps) {
            const double rc = std::max(0.0, pot[src] - pot[i]);
            if (dist[src] + rc < dist[i]) {
              dist[i] = dist[src] + rc;
              parent[i] = static_cast<int>(src);
            }
          }
      } else if (u < m) {
        for (std::size_t j = 0; j < n; ++j) {
          const double rc = std::max(0.0, cost[u * n + j] + pot[u] - pot[m + j]);
          if (dist[u] + rc < dist[m + j]) {
            dist[m + j] = dist[u] + rc;
            parent[m + j] = static_cast<int>(u);
          }
        }
      } else {
        const std::size_t j = u - m;
        if (ds[j] > mass_eps) {
          const double rc = std::max(0.0, pot[u] - pot[dst]);
          if (dist[u] + rc < dist[dst]) {
            dist[dst] = dist[u] + rc;
            parent[dst] = static_cast<int>(u);
          }
        }
        for (std::size_t i = 0; i < m; ++i)
          if (flow[i * n + j] > mass_eps) {
            const double rc = std::max(0.0, -cost[i * n + j] + pot[u] - pot[i]);
            if (dist[u] + rc < dist[i]) {
              dist[i] = dist[u] + rc;
              parent[i] = static_cast<int>(u);
            }
          }
      }
    }
    if (dist[dst] == inf) throw std::logic_error("transport solve failed");

    for (std::size_t v = 0; v < nodes; ++v)
      pot[v] += std::min(dist[v], dist[dst]);

    // Bottleneck along the augmenting path, then push.
    double theta = inf;
    for (std::size_t v = dst; v != src;) {
      const std::size_t u = static_cast<std::size_t>(parent[v]);
      if (v == dst) {
        theta = std::min(theta, ds[u - m]);
      } else if (u == src) {
        theta = std::min(theta, rs[v]);
      } else if (u < m) {
        // forward row->col, uncapacitated
      } else {
        theta = std::min(theta, flow[v * n + (u - m)]);
      }
      v = u;
    }
    for (std::size_t v = dst; v != src;) {
      const std::size_t u = static_cast<std::size_t>(parent[v]);
      if (v == dst) {
        ds[u - m] -= theta;
      } else if (u == src) {
        rs[v] -= theta;
      } else if (u < m) {
        flow[u * n + (v - m)] += theta;
      } else {
        flow[v * n + (u - m)] -= theta;
      }
      v = u;
    }
  }

  TransportPlan out;
  out.coupling = Coupling(m, n);
  out.coupling.mass = std::move(flow);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out.cost += out.coupling.at(i, j) * cost[i * n + j];
  return out;
}

TransportResult transport_lp_oracle(const EmpiricalDist1d& a,
                                    const EmpiricalDist1d& b, double p,
                                    bool cross_check) {
  check_order(p);
  if (a.size() > 64 || b.size() > 64)
    throw std::invalid_argument("oracle is test-scale only");

  const auto& xa = a.points();
  const auto& xb = b.points();
  const auto& ca = a.cumulative();
  const auto& cb = b.cumulative();

  // Monotone (north-west) plan, driven by the cumulative weights so both
  // marginals close exactly at 1.
  Coupling plan(a.size(), b.size());
  std::size_t ia = 0, ib = 0;
  double tprev = 0.0;
  while (ia < xa.size() && ib < xb.size()) {
    const double tnext = std::min(ca[ia], cb[ib]);
    if (tnext > tprev) plan.at(ia, ib) += tnext - tprev;
    if (ca[ia] == tnext) ++ia;
    if (cb[ib] == tnext) ++ib;
    tprev = tnext;
  }

  double total = 0.0;
  for (std::size_t i = 0; i < plan.rows; ++i)
    for (std::size_t j = 0; j < plan.cols; ++j) {
      const double mass = plan.at(i, j);
      if (mass > 0.0) total += mass * pow_p(xa[i] - xb[j], p);
    }

  if (cross_check) {
    std::vector<double> cost(plan.rows * plan.cols);
    for (std::size_t i = 0; i < plan.rows; ++i)
      for (std::size_t j = 0; j < plan.cols; ++j)
        cost[i * plan.cols + j] = pow_p(xa[i] - xb[j], p);
    const TransportPlan lp = transport_lp(cost, a.weights(), b.weights());
    if (std::abs(lp.cost - total) > 1e-9 * std::max(1.0, total))
      throw std::logic_error("transport oracle mismatch");
  }

  TransportResult out;
  out.distance = root_p(total, p);
  out.coupling = std::move(plan);
  return out;
}

double w1_point_clouds(const std::vector<std::vector<double>>& xs,
                       const std::vector<std::vector<double>>& ys) {
  if (xs.empty() || ys.empty()) throw std::invalid_argument("empty sample");
  if (xs.size() > 64 || ys.size() > 64)
    throw std::invalid_argument("oracle is test-scale only");
  const std::size_t d = xs.front().size();
  for (const auto& v : xs)
    if (v.size() != d) throw std::invalid_argument("dimension mismatch");
  for (const auto& v : ys)
    if (v.size() != d) throw std::invalid_argument("dimension mismatch");

  std::vector<double> cost(xs.size() * ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = xs[i][k] - ys[j][k];
        s += diff * diff;
      }
      cost[i * ys.size() + j] = std::sqrt(s);
    }
  const std::vector<double> sup(xs.size(), 1.0 / static_cast<double>(xs.size()));
  const std::vector<double> dem(ys.size(), 1.0 / static_cast<double>(ys.size()));
  return transport_lp(cost, sup, dem).cost;
}

}  // namespace fairreg::metrics
