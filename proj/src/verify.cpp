#include "fairreg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fairreg/bounds.hpp"
#include "fairreg/dist1d.hpp"
#include "fairreg/metrics.hpp"
#include "fairreg/nn.hpp"
#include "fairreg/rng.hpp"

namespace fairreg::verify {

namespace {

using dist1d::EmpiricalDist1d;
using dist1d::GaussianDist1d;

template <typename F>
PropertyResult check(const std::string& name, F&& body) {
  PropertyResult r{name, false, ""};
  try {
    r.detail = body();
    r.pass = r.detail.empty();
  } catch (const std::exception& e) {
    r.detail = std::string("exception: ") + e.what();
  }
  return r;
}

std::string fail(const std::string& what, double got, double want) {
  std::ostringstream os;
  os << what << ": got " << got << ", expected " << want;
  return os.str();
}

EmpiricalDist1d random_dist(Rng& rng, std::size_t max_pts) {
  const std::size_t k = 1 + rng.below(max_pts);
  std::vector<double> pts(k), ws(k);
  double tot = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    // dyadic rounding provokes exact duplicate support points
    pts[i] = std::round(rng.normal(0.0, 2.0) * 8.0) / 8.0;
    ws[i] = 0.05 + rng.uniform();
    tot += ws[i];
  }
  for (double& w : ws) w /= tot;
  return EmpiricalDist1d(pts, ws);
}

double brute_force_assignment_cost(const std::vector<double>& cost,
                                   std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += cost[i * n + perm[i]];
    best = std::min(best, c / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// ---- metrics suite bodies ----------------------------------------------

std::string prop_quantile_inverse(Rng& rng) {
  for (int rep = 0; rep < 50; ++rep) {
    const EmpiricalDist1d d = random_dist(rng, 12);
    for (double t = 0.02; t <= 1.0; t += 0.02) {
      const double x = d.quantile(t);
      if (d.cdf(x) < t - 1e-12) return fail("cdf(quantile(t)) >= t", d.cdf(x), t);
    }
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d.quantile(d.cumulative()[i]) != d.points()[i])
        return "quantile(cumulative) must hit the support point";
  }
  return "";
}

std::string prop_sampling_convergence(Rng& rng) {
  for (int rep = 0; rep < 3; ++rep) {
    const EmpiricalDist1d d = random_dist(rng, 8);
    const EmpiricalDist1d emp =
        EmpiricalDist1d::from_samples(dist1d::sample(d, 4000, rng.below(1u << 30)));
    const double ks = metrics::ks_distance(d, emp);
    if (ks > 0.05) return fail("empirical KS to source", ks, 0.05);
  }
  const GaussianDist1d g(0.3, 2.0);
  const EmpiricalDist1d emp =
      EmpiricalDist1d::from_samples(dist1d::sample(g, 4000, 7));
  const double ks = metrics::ks_distance(emp, g);
  if (ks > 0.05) return fail("gaussian empirical KS", ks, 0.05);
  return "";
}

std::string prop_duplicate_merge(Rng&) {
  const EmpiricalDist1d d = EmpiricalDist1d::from_samples({1.0, 1.0, 2.0});
  if (d.size() != 2) return "duplicates must merge";
  if (std::abs(d.weights()[0] - 2.0 / 3.0) > 1e-15)
    return fail("merged weight", d.weights()[0], 2.0 / 3.0);
  if (d.cumulative().back() != 1.0) return "cumulative must end exactly at 1";
  return "";
}

std::string prop_oracle_equivalence(Rng& rng) {
  const double orders[3] = {1.0, 2.0, 3.0};
  for (int rep = 0; rep < 100; ++rep) {
    const EmpiricalDist1d a = random_dist(rng, 16);
    const EmpiricalDist1d b = random_dist(rng, 16);
    const double p = orders[rep % 3];
    const double direct = metrics::wasserstein_p(a, b, p);
    const double oracle = metrics::transport_lp_oracle(a, b, p, true).distance;
    if (std::abs(direct - oracle) > 1e-9)
      return fail("closed form vs coupling oracle", direct, oracle);
  }
  return "";
}

std::string prop_w1_two_forms(Rng& rng) {
  for (int rep = 0; rep < 100; ++rep) {
    const EmpiricalDist1d a = random_dist(rng, 20);
    const EmpiricalDist1d b = random_dist(rng, 20);
    const double quantile_form = metrics::wasserstein_p(a, b, 1.0);
    const double cdf_form = metrics::wasserstein_1_cdf(a, b);
    if (std::abs(quantile_form - cdf_form) > 1e-10)
      return fail("quantile form vs cdf form", quantile_form, cdf_form);
  }
  return "";
}

std::string prop_metric_axioms(Rng& rng) {
  for (int rep = 0; rep < 50; ++rep) {
    const EmpiricalDist1d a = random_dist(rng, 10);
    const EmpiricalDist1d b = random_dist(rng, 10);
    const EmpiricalDist1d c = random_dist(rng, 10);
    const double p = (rep % 2) ? 2.0 : 1.0;
    if (metrics::wasserstein_p(a, a, p) > 1e-12) return "W(a,a) must be 0";
    const double ab = metrics::wasserstein_p(a, b, p);
    const double ba = metrics::wasserstein_p(b, a, p);
    if (std::abs(ab - ba) > 1e-12) return fail("symmetry", ab, ba);
    const double ac = metrics::wasserstein_p(a, c, p);
    const double bc = metrics::wasserstein_p(b, c, p);
    if (ac > ab + bc + 1e-9) return fail("triangle inequality", ac, ab + bc);
  }
  return "";
}

std::string prop_dual_estimate(Rng& rng) {
  for (int rep = 0; rep < 60; ++rep) {
    const EmpiricalDist1d a = random_dist(rng, 12);
    const EmpiricalDist1d b = random_dist(rng, 12);
    const double w1 = metrics::wasserstein_1_cdf(a, b);
    const double coarse = metrics::wasserstein_1_dual_estimate(a, b, 64);
    if (coarse > w1 + 1e-12) return fail("dual must lower-bound W1", coarse, w1);
    std::vector<double> grid = a.points();
    grid.insert(grid.end(), b.points().begin(), b.points().end());
    // coincident point masses would dedup to a single node; pad below support
    grid.push_back(std::min(a.min(), b.min()) - 1.0);
    const double tight = metrics::wasserstein_1_dual_estimate(a, b, grid);
    if (std::abs(tight - w1) > 1e-8)
      return fail("dual on support grid must equal W1", tight, w1);
  }
  return "";
}

std::string prop_coupling_marginals(Rng& rng) {
  for (int rep = 0; rep < 50; ++rep) {
    const EmpiricalDist1d a = random_dist(rng, 12);
    const EmpiricalDist1d b = random_dist(rng, 12);
    const metrics::TransportResult r = metrics::transport_lp_oracle(a, b, 2.0);
    const std::vector<double> rows = r.coupling.row_sums();
    const std::vector<double> cols = r.coupling.col_sums();
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (std::abs(rows[i] - a.weights()[i]) > 1e-9)
        return fail("row marginal", rows[i], a.weights()[i]);
    for (std::size_t j = 0; j < cols.size(); ++j)
      if (std::abs(cols[j] - b.weights()[j]) > 1e-9)
        return fail("col marginal", cols[j], b.weights()[j]);
  }
  return "";
}

std::string prop_lp_vs_enumeration(Rng& rng) {
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 2 + rng.below(5);
    std::vector<double> xs(n), ys(n);
    for (double& v : xs) v = rng.normal(0.0, 2.0);
    for (double& v : ys) v = rng.normal(0.5, 2.0);
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double d = std::abs(xs[i] - ys[j]);
        cost[i * n + j] = (rep % 2) ? d * d : d;
      }
    const std::vector<double> w(n, 1.0 / static_cast<double>(n));
    const double lp = metrics::transport_lp(cost, w, w).cost;
    const double brute = brute_force_assignment_cost(cost, n);
    if (std::abs(lp - brute) > 1e-9)
      return fail("LP vs exhaustive assignment", lp, brute);
  }
  return "";
}

std::string prop_barycenter_geodesic(Rng& rng) {
  for (int rep = 0; rep < 50; ++rep) {
    const EmpiricalDist1d a = random_dist(rng, 10);
    const EmpiricalDist1d b = random_dist(rng, 10);
    const double t = rng.uniform(0.05, 0.95);
    const EmpiricalDist1d mid = metrics::barycenter_1d({a, b}, {1.0 - t, t});
    const double w = metrics::wasserstein_p(a, b, 2.0);
    const double wa = metrics::wasserstein_p(a, mid, 2.0);
    const double wb = metrics::wasserstein_p(mid, b, 2.0);
    if (std::abs(wa - t * w) > 1e-8) return fail("left geodesic leg", wa, t * w);
    if (std::abs(wb - (1.0 - t) * w) > 1e-8)
      return fail("right geodesic leg", wb, (1.0 - t) * w);
  }
  return "";
}

std::string prop_ks_exactness(Rng& rng) {
  for (int rep = 0; rep < 40; ++rep) {
    const EmpiricalDist1d a = random_dist(rng, 10);
    const EmpiricalDist1d b = random_dist(rng, 10);
    const double ks = metrics::ks_distance(a, b);
    std::vector<double> zs = a.points();
    zs.insert(zs.end(), b.points().begin(), b.points().end());
    double brute = 0.0;
    for (double z : zs) {
      brute = std::max(brute, std::abs(a.cdf(z) - b.cdf(z)));
      const double zl = std::nextafter(z, -std::numeric_limits<double>::infinity());
      brute = std::max(brute, std::abs(a.cdf(zl) - b.cdf(zl)));
    }
    if (std::abs(ks - brute) > 1e-15) return fail("KS vs pointwise sup", ks, brute);
  }
  return "";
}

std::string prop_gaussian_w2(Rng&) {
  const GaussianDist1d g0(-1.0, 1.0), g1(1.0, 1.0);
  if (metrics::gaussian_w2(g0, g1) != 2.0)
    return "closed-form W2 of the unit-variance pair must be exactly 2";
  if (std::abs(metrics::gaussian_w2(GaussianDist1d(0, 1), GaussianDist1d(0, 4)) - 1.0) > 1e-15)
    return "W2 of N(0,1) vs N(0,4) must be 1";
  const EmpiricalDist1d e0 = EmpiricalDist1d::from_samples(dist1d::sample(g0, 20000, 5));
  const EmpiricalDist1d e1 = EmpiricalDist1d::from_samples(dist1d::sample(g1, 20000, 6));
  const double w2 = metrics::wasserstein_p(e0, e1, 2.0);
  if (std::abs(w2 - 2.0) > 0.06) return fail("sampled W2", w2, 2.0);
  return "";
}

std::string prop_entropy(Rng& rng) {
  if (metrics::zero_one_entropy(0.0) != 0.0) return "H(0) must be 0";
  if (metrics::zero_one_entropy(1.0) != 0.0) return "H(1) must be 0";
  if (metrics::zero_one_entropy(0.5) != 0.5) return "H(1/2) must be 1/2";
  for (int rep = 0; rep < 20; ++rep) {
    const double a = rng.uniform();
    const double h = metrics::zero_one_entropy(a);
    if (std::abs(h - metrics::zero_one_entropy(1.0 - a)) > 1e-15)
      return "H must be symmetric";
    if (h < 0.0 || h > 0.5) return "H must lie in [0, 1/2]";
  }
  return "";
}

// ---- bounds suite bodies ------------------------------------------------

std::string prop_joint_grid_agreement(Rng&) {
  const double alphas[4] = {0.1, 0.25, 0.5, 0.77};
  const double ws[3] = {0.3, 1.0, 2.0};
  for (double alpha : alphas)
    for (double w : ws) {
      // optimum of alpha*e0 + (1-alpha)*e1 over the constraint e0 + e1 >= w,
      // enumerated on a grid that contains both corners
      double best = std::numeric_limits<double>::infinity();
      const int steps = 2000;
      for (int k = 0; k <= steps; ++k) {
        const double e0 = w * static_cast<double>(k) / steps;
        const double e1 = w - e0;
        best = std::min(best, alpha * e0 + (1.0 - alpha) * e1);
      }
      const double closed = metrics::zero_one_entropy(alpha) * w;
      if (std::abs(best - closed) > 1e-10)
        return fail("grid minimum vs closed form", best, closed);
    }
  return "";
}

std::string prop_price_ordering(Rng& rng) {
  for (int rep = 0; rep < 300; ++rep) {
    const EmpiricalDist1d y0 = random_dist(rng, 10);
    const EmpiricalDist1d y1 = random_dist(rng, 10);
    const double alpha = rng.uniform(0.01, 0.99);
    const bounds::PriceComparison pc = bounds::price_comparison(y0, y1, alpha);
    if (pc.with_attribute < pc.without_attribute - 1e-9)
      return fail("price with attribute must dominate", pc.with_attribute,
                  pc.without_attribute);
  }
  return "";
}

std::string prop_sp_error_floor(Rng& rng) {
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 8 + rng.below(40);
    std::vector<double> targets(n);
    std::vector<std::uint8_t> groups(n);
    for (std::size_t i = 0; i < n; ++i) {
      groups[i] = static_cast<std::uint8_t>(i % 2);
      targets[i] = rng.normal(groups[i] ? 0.7 : -0.4, 1.0);
    }
    const double c = rng.normal(0.0, 1.0);
    const std::vector<double> preds(n, c);  // constant => exact SP
    const double p = (rep % 2) ? 2.0 : 1.0;
    const bounds::GroupErrors ge =
        bounds::measure_group_errors(preds, targets, groups, p);
    std::vector<double> t0, t1;
    for (std::size_t i = 0; i < n; ++i) (groups[i] ? t1 : t0).push_back(targets[i]);
    const double floor = bounds::sp_error_sum_lower_bound(
        EmpiricalDist1d::from_samples(t0), EmpiricalDist1d::from_samples(t1), p);
    if (ge.eps0 + ge.eps1 < floor - 1e-8)
      return fail("SP error sum floor", ge.eps0 + ge.eps1, floor);
  }
  return "";
}

std::string prop_ks_w1_conversion(Rng&) {
  const std::size_t m = 400;
  for (double shift : {0.1, 0.3}) {
    std::vector<double> xs(m), ys(m);
    for (std::size_t i = 0; i < m; ++i) {
      xs[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
      ys[i] = xs[i] + shift;
    }
    const EmpiricalDist1d a = EmpiricalDist1d::from_samples(xs);
    const EmpiricalDist1d b = EmpiricalDist1d::from_samples(ys);
    const double w1 = metrics::wasserstein_1_cdf(a, b);
    const double ks = metrics::ks_distance(a, b);
    const double cap = bounds::ks_from_w1(w1, 1.0) + 2.0 / std::sqrt(static_cast<double>(m));
    if (ks > cap) return fail("KS above converted W1 cap", ks, cap);
  }
  return "";
}

std::string prop_finite_sample(Rng&) {
  const EmpiricalDist1d d0 = EmpiricalDist1d::point_mass(0.0);
  const EmpiricalDist1d d1 = EmpiricalDist1d::point_mass(1.0);
  const double same = bounds::finite_sample_lower_bound(d0, d0, 1000, 0.05, 1.0);
  if (!(same < 0.0)) return "identical targets must give a vacuous bound";
  // arithmetic cross-check, digits derived by hand
  const double v = bounds::finite_sample_lower_bound(d0, d1, 100, 0.05, 1.0);
  if (std::abs(v - 0.5283797) > 1e-6) return fail("frozen bound value", v, 0.5283797);
  const double near1 = bounds::finite_sample_lower_bound(
      d0, d1, 1000000000000ULL, 0.05, 1.0);
  if (std::abs(near1 - 1.0) > 1e-5) return fail("large-n limit", near1, 1.0);
  return "";
}

std::string prop_excess_risk(Rng& rng) {
  if (bounds::excess_risk_lower_bound({0, 0, 1.7, 0}) != 1.7)
    return "zero-noise case must return the distance";
  if (std::abs(bounds::excess_risk_lower_bound({0.1, 0.1, 2.0, 0.2}) - 1.4) > 1e-15)
    return "frozen arithmetic case must give 1.4";
  if (bounds::excess_risk_lower_bound({0, 0, 0, 0}) != 0.0) return "all zeros must give 0";

  // Noisy two-group instance: optimal per-group predictors are the group
  // means; the constant global mean is an SP predictor whose excess risk must
  // respect the bound.
  const std::size_t n = 400;
  std::vector<double> t0(n), t1(n);
  for (std::size_t i = 0; i < n; ++i) {
    t0[i] = -1.0 + rng.uniform(-0.05, 0.05);
    t1[i] = 1.0 + rng.uniform(-0.05, 0.05);
  }
  const EmpiricalDist1d y0 = EmpiricalDist1d::from_samples(t0);
  const EmpiricalDist1d y1 = EmpiricalDist1d::from_samples(t1);
  const auto l2err = [](const std::vector<double>& v, double c) {
    double s = 0.0;
    for (double x : v) s += (x - c) * (x - c);
    return std::sqrt(s / static_cast<double>(v.size()));
  };
  const double opt0 = l2err(t0, y0.mean());
  const double opt1 = l2err(t1, y1.mean());
  const double dist = std::abs(y0.mean() - y1.mean());
  const double global = 0.5 * (y0.mean() + y1.mean());
  const double r0 = l2err(t0, global) - opt0;
  const double r1 = l2err(t1, global) - opt1;
  const double bound = bounds::excess_risk_lower_bound({opt0, opt1, dist, 0.0});
  if (r0 + r1 < bound - 1e-9)
    return fail("simulated excess risk sum", r0 + r1, bound);
  return "";
}

std::string prop_density_estimate(Rng& rng) {
  std::vector<double> u(4000), g(4000);
  for (double& x : u) x = rng.uniform();
  for (double& x : g) x = rng.normal();
  const double du = bounds::estimate_density_bound(u);
  if (du < 0.7 || du > 1.6) return fail("uniform density estimate", du, 1.0);
  const double dg = bounds::estimate_density_bound(g);
  if (dg < 0.25 || dg > 0.6) return fail("gaussian density estimate", dg, 0.3989);
  return "";
}

std::string prop_bound_arithmetic(Rng&) {
  if (bounds::accuracy_parity_bound(0.0, 1.0) != 1.0) return "rho=0 case";
  if (std::abs(bounds::accuracy_parity_bound(1.0, 2.0) - 2.0 * std::sqrt(2.0)) > 1e-12)
    return "rho=1, W1=2 case";
  if (bounds::accuracy_parity_bound(3.0, 0.0) != 0.0) return "W1=0 case";
  if (bounds::ks_from_w1(0.0, 2.0) != 0.0) return "zero W1 conversion";
  if (std::abs(bounds::ks_from_w1(1.0, 1.0) - 2.0) > 1e-15) return "unit conversion";
  if (std::abs(bounds::ks_from_w1(0.25, 1.0) - 1.0) > 1e-15) return "quarter conversion";
  if (std::abs(bounds::representation_sp_bound(0.09, 4.0, 1.0) - 1.2) > 1e-12)
    return "representation level arithmetic";
  if (std::abs(bounds::implied_sp_level(0.25, 1.0) - 1.0) > 1e-15)
    return "implied SP level arithmetic";
  const bounds::MeanGapBounds mg = bounds::mean_gap_bounds(
      EmpiricalDist1d::point_mass(0.0), EmpiricalDist1d::point_mass(1.0));
  if (mg.mae_bound != 1.0 || mg.mse_bound != 0.5) return "point-mass gap bounds";
  return "";
}

std::string prop_group_errors(Rng&) {
  {
    const bounds::GroupErrors ge = bounds::measure_group_errors(
        {0.0, 0.0}, {0.0, 1.0}, {0, 1}, 1.0);
    if (ge.eps0 != 0.0 || ge.eps1 != 1.0 || ge.alpha != 0.5)
      return "two-point case";
  }
  {
    const bounds::GroupErrors ge = bounds::measure_group_errors(
        {0.3, -0.2, 0.8}, {0.3, -0.2, 0.8}, {0, 1, 0}, 2.0);
    if (ge.eps0 != 0.0 || ge.eps1 != 0.0) return "perfect predictor case";
  }
  {
    // worst-case instance: constant 1/2 against targets equal to the group
    const bounds::GroupErrors ge = bounds::measure_group_errors(
        {0.5, 0.5, 0.5, 0.5}, {0.0, 0.0, 1.0, 1.0}, {0, 0, 1, 1}, 1.0);
    if (std::abs(ge.eps0 + ge.eps1 - 1.0) > 1e-15)
      return fail("constant-half error sum", ge.eps0 + ge.eps1, 1.0);
  }
  return "";
}

// ---- nn suite bodies ----------------------------------------------------

double tape_entry(const nn::GradientTape& tape, std::size_t layer,
                  bool is_bias, std::size_t k) {
  return is_bias ? tape.bias_grads[layer][k] : tape.weight_grads[layer][k];
}

double& param_entry(nn::FeedForwardModel& m, std::size_t layer, bool is_bias,
                    std::size_t k) {
  return is_bias ? m.layers[layer].bias[k] : m.layers[layer].weights[k];
}

// Central finite differences on every parameter of dot(model(x), g).
std::string gradient_check_once(nn::FeedForwardModel& m,
                                const std::vector<double>& x,
                                const std::vector<double>& g) {
  const nn::ForwardCache cache = nn::forward(m, x);
  const nn::GradientTape tape = nn::backward(m, cache, g);
  const auto value = [&]() {
    const nn::ForwardCache c = nn::forward(m, x);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += c.output[i] * g[i];
    return s;
  };
  const double h = 1e-5;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    for (int pass = 0; pass < 2; ++pass) {
      const bool is_bias = pass == 1;
      const std::size_t count =
          is_bias ? m.layers[l].bias.size() : m.layers[l].weights.size();
      for (std::size_t k = 0; k < count; ++k) {
        double& param = param_entry(m, l, is_bias, k);
        const double saved = param;
        param = saved + h;
        const double up = value();
        param = saved - h;
        const double down = value();
        param = saved;
        const double fd = (up - down) / (2.0 * h);
        const double an = tape_entry(tape, l, is_bias, k);
        const double err = std::abs(fd - an);
        if (err > 1e-7 && err > 1e-4 * std::max(std::abs(fd), std::abs(an)))
          return fail("finite difference mismatch", an, fd);
      }
    }
  }
  // and the input gradient
  std::vector<double> xv = x;
  for (std::size_t k = 0; k < xv.size(); ++k) {
    const double saved = xv[k];
    xv[k] = saved + h;
    const nn::ForwardCache cu = nn::forward(m, xv);
    xv[k] = saved - h;
    const nn::ForwardCache cd = nn::forward(m, xv);
    xv[k] = saved;
    double up = 0.0, down = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      up += cu.output[i] * g[i];
      down += cd.output[i] * g[i];
    }
    const double fd = (up - down) / (2.0 * h);
    const double an = tape.input_grad[k];
    const double err = std::abs(fd - an);
    if (err > 1e-7 && err > 1e-4 * std::max(std::abs(fd), std::abs(an)))
      return fail("input finite difference mismatch", an, fd);
  }
  return "";
}

// A model/input pair with any pre-activation within margin of a relu kink
// would make finite differences disagree with the subgradient; resample those.
bool near_kink(const nn::FeedForwardModel& m, const nn::ForwardCache& cache,
               double margin) {
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    if (m.layers[l].activation != nn::Activation::relu) continue;
    for (double z : cache.pre[l])
      if (std::abs(z) < margin) return true;
  }
  return false;
}

std::string prop_gradient_fd(Rng& rng) {
  int done = 0, attempts = 0;
  while (done < 6 && attempts < 200) {
    ++attempts;
    const std::size_t depth = 2 + rng.below(3);
    std::vector<std::size_t> sizes;
    for (std::size_t l = 0; l <= depth; ++l) sizes.push_back(1 + rng.below(8));
    nn::FeedForwardModel m = nn::init_model(sizes, rng.below(1u << 30));
    std::vector<double> x(sizes.front()), g(sizes.back());
    for (double& v : x) v = rng.normal(0.0, 1.5);
    for (double& v : g) v = rng.normal(0.0, 1.0);
    if (near_kink(m, nn::forward(m, x), 1e-3)) continue;
    const std::string err = gradient_check_once(m, x, g);
    if (!err.empty()) return err;
    ++done;
  }
  if (done < 6) return "could not find enough kink-free instances";
  return "";
}

std::string prop_clip_contract(Rng& rng) {
  nn::FeedForwardModel m = nn::init_model({4, 6, 2}, rng.below(1u << 30), 0.5);
  for (nn::Layer& l : m.layers)
    for (double& w : l.weights) w *= 10.0;
  nn::clip_weights(m);
  if (nn::max_abs_parameter(m) > 0.5) return "clip must cap every parameter";
  const nn::FeedForwardModel once = m;
  nn::clip_weights(m);
  for (std::size_t l = 0; l < m.layers.size(); ++l)
    if (m.layers[l].weights != once.layers[l].weights ||
        m.layers[l].bias != once.layers[l].bias)
      return "clip must be idempotent";
  nn::FeedForwardModel bare = nn::init_model({2, 2}, 1);
  try {
    nn::clip_weights(bare);
    return "clip without a bound must throw";
  } catch (const std::logic_error&) {
  }
  return "";
}

std::string prop_lipschitz_sandwich(Rng& rng) {
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t depth = 1 + rng.below(3);
    std::vector<std::size_t> sizes;
    for (std::size_t l = 0; l <= depth; ++l) sizes.push_back(1 + rng.below(6));
    const nn::FeedForwardModel m = nn::init_model(sizes, rng.below(1u << 30));
    const double upper = nn::lipschitz_upper(m);
    const double lower = nn::lipschitz_lower_estimate(m, 40, rng.below(1u << 30));
    if (lower > upper + 1e-9) return fail("lower estimate above upper bound", lower, upper);
  }
  return "";
}

std::string prop_frobenius_ceiling(Rng& rng) {
  for (int rep = 0; rep < 10; ++rep) {
    const std::vector<std::size_t> sizes{5, 7, 3, 2};
    const double c = 0.02;
    nn::FeedForwardModel m = nn::init_model(sizes, rng.below(1u << 30), c);
    for (nn::Layer& l : m.layers)
      for (double& w : l.weights) w *= 3.0;
    nn::clip_weights(m);
    double ceiling = 1.0;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k)
      ceiling *= std::sqrt(static_cast<double>(sizes[k] * sizes[k + 1])) * c;
    const double upper = nn::lipschitz_upper(m);
    if (upper > ceiling + 1e-9) return fail("spectral above Frobenius ceiling", upper, ceiling);
  }
  return "";
}

std::string prop_linear_lipschitz(Rng&) {
  nn::FeedForwardModel m = nn::init_model({1, 1}, 1);
  m.layers[0].weights = {2.0};
  if (std::abs(nn::lipschitz_upper(m) - 2.0) > 1e-9) return "1x1 spectral norm";
  if (std::abs(nn::lipschitz_lower_estimate(m, 8, 3) - 2.0) > 1e-6)
    return "1x1 lower estimate";
  nn::FeedForwardModel two = nn::init_model({1, 1, 1}, 1);
  two.layers[0].weights = {2.0};
  two.layers[0].activation = nn::Activation::identity;
  two.layers[1].weights = {3.0};
  if (std::abs(nn::lipschitz_upper(two) - 6.0) > 1e-8) return "layer product";
  nn::FeedForwardModel diag = nn::init_model({2, 2}, 1);
  diag.layers[0].weights = {1.0, 0.0, 0.0, 3.0};
  if (std::abs(nn::lipschitz_upper(diag) - 3.0) > 1e-8) return "diagonal spectral norm";
  nn::FeedForwardModel zero = nn::init_model({3, 2}, 1);
  for (double& w : zero.layers[0].weights) w = 0.0;
  if (nn::lipschitz_lower_estimate(zero, 6, 4) != 0.0) return "constant model estimate";
  return "";
}

std::string prop_checkpoint_roundtrip(Rng& rng) {
  const nn::FeedForwardModel m =
      nn::init_model({3, 5, 2}, rng.below(1u << 30), 1.5);
  const nn::FeedForwardModel back = nn::from_checkpoint(nn::to_checkpoint(m));
  if (back.layers.size() != m.layers.size()) return "layer count changed";
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    if (back.layers[l].weights != m.layers[l].weights) return "weights changed";
    if (back.layers[l].bias != m.layers[l].bias) return "biases changed";
    if (back.layers[l].activation != m.layers[l].activation)
      return "activation changed";
  }
  if (!back.clip_bound || *back.clip_bound != 1.5) return "clip bound changed";
  std::vector<double> x{0.3, -0.7, 1.1};
  if (nn::forward(m, x).output != nn::forward(back, x).output)
    return "forward output changed";
  return "";
}

std::string prop_init_determinism(Rng&) {
  const nn::FeedForwardModel a = nn::init_model({4, 5, 1}, 99);
  const nn::FeedForwardModel b = nn::init_model({4, 5, 1}, 99);
  for (std::size_t l = 0; l < a.layers.size(); ++l)
    if (a.layers[l].weights != b.layers[l].weights) return "init must be seed-deterministic";
  for (const nn::Layer& l : a.layers)
    for (double bv : l.bias)
      if (bv != 0.0) return "biases must start at zero";
  return "";
}

}  // namespace

bool all_passed(const std::vector<PropertyResult>& results) {
  for (const PropertyResult& r : results)
    if (!r.pass) return false;
  return true;
}

std::vector<PropertyResult> metrics_suite(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PropertyResult> out;
  out.push_back(check("quantile_cdf_inverse", [&] { return prop_quantile_inverse(rng); }));
  out.push_back(check("sampling_convergence", [&] { return prop_sampling_convergence(rng); }));
  out.push_back(check("duplicate_merge", [&] { return prop_duplicate_merge(rng); }));
  out.push_back(check("oracle_equivalence", [&] { return prop_oracle_equivalence(rng); }));
  out.push_back(check("w1_two_forms", [&] { return prop_w1_two_forms(rng); }));
  out.push_back(check("metric_axioms", [&] { return prop_metric_axioms(rng); }));
  out.push_back(check("dual_lower_estimate", [&] { return prop_dual_estimate(rng); }));
  out.push_back(check("coupling_marginals", [&] { return prop_coupling_marginals(rng); }));
  out.push_back(check("lp_vs_enumeration", [&] { return prop_lp_vs_enumeration(rng); }));
  out.push_back(check("barycenter_geodesic", [&] { return prop_barycenter_geodesic(rng); }));
  out.push_back(check("ks_exactness", [&] { return prop_ks_exactness(rng); }));
  out.push_back(check("gaussian_w2", [&] { return prop_gaussian_w2(rng); }));
  out.push_back(check("zero_one_entropy", [&] { return prop_entropy(rng); }));
  return out;
}

std::vector<PropertyResult> bounds_suite(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PropertyResult> out;
  out.push_back(check("joint_grid_agreement", [&] { return prop_joint_grid_agreement(rng); }));
  out.push_back(check("price_ordering", [&] { return prop_price_ordering(rng); }));
  out.push_back(check("sp_error_floor", [&] { return prop_sp_error_floor(rng); }));
  out.push_back(check("ks_w1_conversion", [&] { return prop_ks_w1_conversion(rng); }));
  out.push_back(check("finite_sample_bound", [&] { return prop_finite_sample(rng); }));
  out.push_back(check("excess_risk_bound", [&] { return prop_excess_risk(rng); }));
  out.push_back(check("density_estimate", [&] { return prop_density_estimate(rng); }));
  out.push_back(check("bound_arithmetic", [&] { return prop_bound_arithmetic(rng); }));
  out.push_back(check("group_error_measurement", [&] { return prop_group_errors(rng); }));
  return out;
}

std::vector<PropertyResult> nn_suite(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PropertyResult> out;
  out.push_back(check("gradient_finite_difference", [&] { return prop_gradient_fd(rng); }));
  out.push_back(check("clip_contract", [&] { return prop_clip_contract(rng); }));
  out.push_back(check("lipschitz_sandwich", [&] { return prop_lipschitz_sandwich(rng); }));
  out.push_back(check("frobenius_ceiling", [&] { return prop_frobenius_ceiling(rng); }));
  out.push_back(check("linear_lipschitz_values", [&] { return prop_linear_lipschitz(rng); }));
  out.push_back(check("checkpoint_roundtrip", [&] { return prop_checkpoint_roundtrip(rng); }));
  out.push_back(check("init_determinism", [&] { return prop_init_determinism(rng); }));
  return out;
}

}  // namespace fairreg::verify
