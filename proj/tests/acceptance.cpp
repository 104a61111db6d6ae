#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "fairreg/bounds.hpp"
#include "fairreg/data.hpp"
#include "fairreg/dist1d.hpp"
#include "fairreg/metrics.hpp"
#include "fairreg/nn.hpp"
#include "fairreg/rng.hpp"
#include "fairreg/train.hpp"

// Acceptance gate: one line per criterion, each with its measured values and
// a wall-clock budget. Any failure (including a blown budget) fails the run.

using fairreg::Rng;
namespace bounds = fairreg::bounds;
namespace data = fairreg::data;
namespace dist1d = fairreg::dist1d;
namespace metrics = fairreg::metrics;
namespace nn = fairreg::nn;
namespace train = fairreg::train;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

dist1d::EmpiricalDist1d random_dist(Rng& rng, std::size_t max_points) {
  const std::size_t m = 1 + rng.below(max_points);
  std::vector<double> pts(m), wts(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    // dyadic values collide often, exercising the duplicate-merge path
    pts[i] = std::round(rng.normal(0.0, 2.0) * 8.0) / 8.0;
    wts[i] = 0.05 + rng.uniform();
    total += wts[i];
  }
  for (double& w : wts) w /= total;
  return dist1d::EmpiricalDist1d(std::move(pts), std::move(wts));
}

// --------------------------------------------------------------------------
// 1. separated gaussians, end to end: closed form, sampled distance, blind
//    predictor errors

Outcome separated_gaussians() {
  const double exact =
      metrics::gaussian_w2(dist1d::GaussianDist1d(-1.0, 1.0),
                           dist1d::GaussianDist1d(1.0, 1.0));
  bool ok = exact == 2.0;

  const data::GroupedDataset ds = data::gen_example2(100000, 10, 1);
  std::vector<double> raw(ds.n), preds(ds.n), y0, y1;
  for (std::size_t i = 0; i < ds.n; ++i) {
    raw[i] = ds.rescale.to_raw(ds.target[i]);
    preds[i] = ds.features[i * ds.d];  // the target's own linear part
    (ds.groups[i] ? y1 : y0).push_back(raw[i]);
  }
  const double sampled =
      metrics::wasserstein_p(dist1d::EmpiricalDist1d::from_samples(y0),
                             dist1d::EmpiricalDist1d::from_samples(y1), 2.0);
  ok = ok && sampled >= 1.95 && sampled <= 2.05;

  const bounds::GroupErrors ge =
      bounds::measure_group_errors(preds, raw, ds.groups, 2.0);
  const double blind_sum = ge.eps0 + ge.eps1;
  ok = ok && blind_sum >= 1.95 && blind_sum <= 2.05;

  return {ok, "closed_form=" + num(exact) + " sampled_w2=" + num(sampled) +
                  " blind_error_sum=" + num(blind_sum)};
}

// --------------------------------------------------------------------------
// 2. worst-case floor: exhaustive two-value predictor search, then the
//    adversarially trained model on the same family

Outcome worst_case_floor() {
  const data::GroupedDataset ds = data::gen_example1(200000, 1);
  // feature-value counts per group make each grid cell O(1) to score
  double cnt[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  for (std::size_t i = 0; i < ds.n; ++i)
    cnt[ds.groups[i]][ds.features[i] > 0.5 ? 1 : 0] += 1.0;
  const double n0 = cnt[0][0] + cnt[0][1], n1 = cnt[1][0] + cnt[1][1];

  const auto error_sum = [&](double h0, double h1) {
    const double e0 = (cnt[0][0] * std::abs(h0) + cnt[0][1] * std::abs(h1)) / n0;
    const double e1 = (cnt[1][0] * std::abs(h0 - 1.0) +
                       cnt[1][1] * std::abs(h1 - 1.0)) / n1;
    return e0 + e1;
  };

  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 300; ++i)
    for (int j = 0; j <= 300; ++j)
      best = std::min(best, error_sum(-1.0 + 0.01 * i, -1.0 + 0.01 * j));

  // spot-check the count-based scorer against the row-by-row measurement
  Rng rng(99);
  double spot_gap = 0.0;
  for (int t = 0; t < 5; ++t) {
    const double h0 = -1.0 + 0.01 * static_cast<double>(rng.below(301));
    const double h1 = -1.0 + 0.01 * static_cast<double>(rng.below(301));
    std::vector<double> preds(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i)
      preds[i] = ds.features[i] > 0.5 ? h1 : h0;
    const bounds::GroupErrors ge =
        bounds::measure_group_errors(preds, ds.target, ds.groups, 1.0);
    spot_gap = std::max(spot_gap,
                        std::abs(ge.eps0 + ge.eps1 - error_sum(h0, h1)));
  }

  bool ok = std::abs(best - 1.0) <= 0.01 && spot_gap <= 1e-9;

  const data::GroupedDataset small = data::gen_example1(4000, 2);
  train::TrainConfig cfg;
  cfg.tau = 10.0;
  cfg.clip_bound = 10.0;
  const train::AdversarialModels m = train::train_adversarial(small, cfg);
  const train::FairnessReport rep =
      train::evaluate(&m.encoder, m.predictor, small, cfg.p);
  ok = ok && rep.ks_disparity <= 0.1 && rep.group_error_sum >= 0.9;

  return {ok, "grid_min=" + num(best) + " spot_gap=" + num(spot_gap) +
                  " trained_ks=" + num(rep.ks_disparity) +
                  " trained_sum=" + num(rep.group_error_sum)};
}

// --------------------------------------------------------------------------
// 3. the closed-form distances against the blind LP solver

Outcome transport_oracles_agree() {
  Rng rng(7);
  double worst_lp = 0.0, worst_cdf = 0.0;
  for (int k = 0; k < 500; ++k) {
    const dist1d::EmpiricalDist1d a = random_dist(rng, 20);
    const dist1d::EmpiricalDist1d b = random_dist(rng, 20);
    const double p = static_cast<double>(1 + k % 3);
    const double wp = metrics::wasserstein_p(a, b, p);
    const metrics::TransportResult oracle =
        metrics::transport_lp_oracle(a, b, p, /*cross_check=*/true);
    worst_lp = std::max(worst_lp, std::abs(wp - oracle.distance));
    worst_cdf = std::max(worst_cdf,
                         std::abs(metrics::wasserstein_1_cdf(a, b) -
                                  metrics::wasserstein_p(a, b, 1.0)));
  }
  const bool ok = worst_lp <= 1e-8 && worst_cdf <= 1e-10;
  return {ok, "max_lp_gap=" + num(worst_lp) + " max_cdf_gap=" + num(worst_cdf)};
}

// --------------------------------------------------------------------------
// 4. inequality fuzzing: error-sum floor on exactly-SP predictors and the
//    with/without-attribute price ordering

Outcome certificate_fuzzing() {
  Rng rng(11);
  double worst_floor = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000; ++k) {
    const std::size_t m = 2 + rng.below(39);
    const double shift0 = rng.uniform(-1.5, 1.5), shift1 = rng.uniform(-1.5, 1.5);
    const double scale0 = 0.2 + rng.uniform(), scale1 = 0.2 + rng.uniform();
    std::vector<double> y0(m), y1(m), f(m), h(m);
    for (std::size_t i = 0; i < m; ++i) {
      y0[i] = rng.normal(shift0, scale0);
      y1[i] = rng.normal(shift1, scale1);
      f[i] = rng.normal();
      h[i] = rng.normal(0.0, 0.5);
    }
    // group-blind prediction on group-identical features: both groups carry
    // the same feature multiset, so any per-feature rule is exactly SP; even
    // instances use a constant rule instead
    std::vector<double> preds(2 * m), targets(2 * m);
    std::vector<std::uint8_t> groups(2 * m);
    const double c = rng.uniform(-2.0, 2.0);
    for (std::size_t i = 0; i < m; ++i) {
      preds[i] = (k % 2 == 0) ? c : h[i];
      preds[m + i] = preds[i];
      targets[i] = y0[i];
      targets[m + i] = y1[i];
      groups[i] = 0;
      groups[m + i] = 1;
    }
    const double p = static_cast<double>(1 + k % 3);
    const bounds::GroupErrors ge =
        bounds::measure_group_errors(preds, targets, groups, p);
    const double wp =
        metrics::wasserstein_p(dist1d::EmpiricalDist1d::from_samples(y0),
                               dist1d::EmpiricalDist1d::from_samples(y1), p);
    worst_floor = std::min(worst_floor, ge.eps0 + ge.eps1 - wp);
  }

  Rng rng2(12);
  double worst_price = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000; ++k) {
    const dist1d::EmpiricalDist1d a = random_dist(rng2, 24);
    const dist1d::EmpiricalDist1d b = random_dist(rng2, 24);
    const double alpha = rng2.uniform(0.02, 0.98);
    const bounds::PriceComparison pc = bounds::price_comparison(a, b, alpha);
    worst_price = std::min(worst_price, pc.with_attribute - pc.without_attribute);
  }

  const bool ok = worst_floor >= -1e-6 && worst_price >= -1e-9;
  return {ok, "min_floor_slack=" + num(worst_floor) +
                  " min_price_gap=" + num(worst_price)};
}

// --------------------------------------------------------------------------
// 5. gradients against central finite differences on random architectures

Outcome gradient_finite_differences() {
  Rng rng(13);
  const double h = 1e-5;
  int passed = 0;
  double worst_rel = 0.0;
  for (int arch = 0; arch < 20; ++arch) {
    std::vector<std::size_t> sizes{1 + rng.below(5)};
    const std::size_t hidden = 1 + rng.below(3);
    for (std::size_t l = 0; l < hidden; ++l) sizes.push_back(1 + rng.below(8));
    sizes.push_back(1 + rng.below(3));
    nn::FeedForwardModel model = nn::init_model(
        sizes, 1000 + static_cast<std::uint64_t>(arch), std::nullopt,
        arch % 2 == 0 ? nn::Activation::identity : nn::Activation::relu);
    // random biases keep a fully dead layer from pinning downstream units
    // exactly onto the relu kink, where the one-sided difference quotient
    // disagrees with the subgradient convention
    for (nn::Layer& l : model.layers)
      for (double& b : l.bias) b = rng.normal(0.0, 0.2);

    std::vector<double> x(sizes.front()), g(sizes.back());
    nn::ForwardCache cache;
    // keep every pre-activation away from the relu kink so the loss is
    // differentiable throughout the finite-difference stencil
    for (int attempt = 0; attempt < 200; ++attempt) {
      for (double& v : x) v = rng.normal(0.0, 1.5);
      cache = nn::forward(model, x);
      double nearest = std::numeric_limits<double>::infinity();
      for (const std::vector<double>& pre : cache.pre)
        for (double v : pre) nearest = std::min(nearest, std::abs(v));
      if (nearest > 1e-3) break;
    }
    for (double& v : g) v = rng.normal();

    const auto loss = [&]() {
      const std::vector<double> out = nn::forward(model, x).output;
      double s = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * g[i];
      return s;
    };
    const nn::GradientTape tape = nn::backward(model, cache, g);

    bool arch_ok = true;
    const auto check = [&](double* param, double analytic) {
      const double keep = *param;
      *param = keep + h;
      const double up = loss();
      *param = keep - h;
      const double down = loss();
      *param = keep;
      const double fd = (up - down) / (2.0 * h);
      const double rel = std::abs(fd - analytic) /
                         std::max({1e-7, std::abs(fd), std::abs(analytic)});
      worst_rel = std::max(worst_rel, rel);
      if (rel > 1e-4) arch_ok = false;
    };
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      for (std::size_t i = 0; i < model.layers[l].weights.size(); ++i)
        check(&model.layers[l].weights[i], tape.weight_grads[l][i]);
      for (std::size_t i = 0; i < model.layers[l].bias.size(); ++i)
        check(&model.layers[l].bias[i], tape.bias_grads[l][i]);
    }
    for (std::size_t i = 0; i < x.size(); ++i)
      check(&x[i], tape.input_grad[i]);
    if (arch_ok) ++passed;
  }
  return {passed == 20,
          "architectures=" + std::to_string(passed) + "/20 worst_rel=" +
              num(worst_rel)};
}

// --------------------------------------------------------------------------
// 6. tau sweep trends on the synthetic admissions table

Outcome tau_sweep_trends() {
  const data::GroupedDataset full = data::gen_lawschool_like(1823, 1, 0.15);
  const data::Split sp = data::split(full, {0.8, 7});
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const std::vector<double> taus{0.1, 1.0, 5.0, 10.0};

  double baseline_sum = 0.0;
  for (std::uint64_t seed : seeds) {
    train::TrainConfig cfg;
    cfg.seed = seed;
    const nn::FeedForwardModel m = train::train_baseline(sp.train, cfg);
    baseline_sum += train::evaluate(nullptr, m, sp.test, cfg.p).group_error_sum;
  }
  baseline_sum /= static_cast<double>(seeds.size());

  std::vector<double> ks_means, acc_means, sum_means;
  for (double tau : taus) {
    double ks = 0.0, acc = 0.0, sum = 0.0;
    for (std::uint64_t seed : seeds) {
      train::TrainConfig cfg;
      cfg.tau = tau;
      cfg.clip_bound = tau;
      cfg.seed = seed;
      const train::AdversarialModels m = train::train_adversarial(sp.train, cfg);
      const train::FairnessReport rep =
          train::evaluate(&m.encoder, m.predictor, sp.test, cfg.p);
      ks += rep.ks_disparity;
      acc += rep.accuracy_disparity;
      sum += rep.group_error_sum;
    }
    const double ns = static_cast<double>(seeds.size());
    ks_means.push_back(ks / ns);
    acc_means.push_back(acc / ns);
    sum_means.push_back(sum / ns);
  }

  bool strictly_decreasing = true;
  for (std::size_t i = 1; i < ks_means.size(); ++i)
    if (!(ks_means[i] < ks_means[i - 1])) strictly_decreasing = false;
  const bool acc_ok = acc_means.back() <= acc_means.front();
  const bool sum_ok = sum_means.back() <= 1.5 * baseline_sum;

  std::ostringstream d;
  d << "ks_means=";
  for (std::size_t i = 0; i < ks_means.size(); ++i)
    d << (i ? "," : "") << num(ks_means[i]);
  d << " acc_first=" << num(acc_means.front())
    << " acc_last=" << num(acc_means.back())
    << " sum_last=" << num(sum_means.back())
    << " baseline_sum=" << num(baseline_sum);
  return {strictly_decreasing && acc_ok && sum_ok, d.str()};
}

// --------------------------------------------------------------------------
// 7. mean-gap domination and dual/primal agreement on breakpoint grids

Outcome dual_agreement() {
  Rng rng(17);
  double worst_gap = -std::numeric_limits<double>::infinity();
  double worst_dual = 0.0;
  for (int k = 0; k < 200; ++k) {
    const dist1d::EmpiricalDist1d a = random_dist(rng, 30);
    const dist1d::EmpiricalDist1d b = random_dist(rng, 30);
    const double w1 = metrics::wasserstein_p(a, b, 1.0);
    worst_gap = std::max(worst_gap, std::abs(a.mean() - b.mean()) - w1);

    std::vector<double> grid = a.points();
    grid.insert(grid.end(), b.points().begin(), b.points().end());
    // pad below the support so single-point unions still make a valid grid
    grid.push_back(std::min(a.min(), b.min()) - 1.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    worst_dual = std::max(
        worst_dual, std::abs(metrics::wasserstein_1_dual_estimate(a, b, grid) - w1));
  }
  const bool ok = worst_gap <= 1e-10 && worst_dual <= 1e-8;
  return {ok, "max_meangap_minus_w1=" + num(worst_gap) +
                  " max_dual_gap=" + num(worst_dual)};
}

// --------------------------------------------------------------------------
// 8. ks caps from w1 on fine approximations of bounded-density families

Outcome ks_w1_conversion() {
  Rng rng(23);
  const std::size_t n = 10000;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 50; ++k) {
    double density[2];
    dist1d::EmpiricalDist1d dists[2] = {dist1d::EmpiricalDist1d::point_mass(0),
                                        dist1d::EmpiricalDist1d::point_mass(0)};
    for (int s = 0; s < 2; ++s) {
      const double lo = rng.uniform(-2.0, 2.0);
      std::vector<double> pts(n);
      if (rng.bernoulli(0.5)) {
        const double w = rng.uniform(0.4, 2.5);
        density[s] = 1.0 / w;
        for (std::size_t i = 0; i < n; ++i) {
          const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
          pts[i] = lo + w * t;
        }
      } else {
        const double len = rng.uniform(0.5, 3.0);
        density[s] = 2.0 / len;  // symmetric triangle peaks at the midpoint
        for (std::size_t i = 0; i < n; ++i) {
          const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
          pts[i] = t <= 0.5 ? lo + len * std::sqrt(t / 2.0)
                            : lo + len * (1.0 - std::sqrt((1.0 - t) / 2.0));
        }
      }
      dists[s] = dist1d::EmpiricalDist1d::from_samples(pts);
    }
    const double c = std::max(density[0], density[1]);
    const double ks = metrics::ks_distance(dists[0], dists[1]);
    const double cap =
        bounds::ks_from_w1(metrics::wasserstein_1_cdf(dists[0], dists[1]), c) +
        0.02;
    worst_margin = std::min(worst_margin, cap - ks);
  }
  return {worst_margin >= 0.0, "min_cap_minus_ks=" + num(worst_margin)};
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"separated gaussians end to end", 30.0, separated_gaussians},
      {"worst-case error floor", 120.0, worst_case_floor},
      {"transport oracle agreement", 60.0, transport_oracles_agree},
      {"certificate inequality fuzzing", 120.0, certificate_fuzzing},
      {"gradient finite differences", 30.0, gradient_finite_differences},
      {"tau sweep trends", 900.0, tau_sweep_trends},
      {"mean gap and dual agreement", 120.0, dual_agreement},
      {"ks caps from w1", 120.0, ks_w1_conversion},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const bool in_budget = elapsed <= criteria[i].budget_seconds;
    const bool pass = out.pass && in_budget;
    if (!pass) ++failures;
    std::printf("[%s] %zu. %s: %s (%.1fs%s)\n", pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name, out.detail.c_str(), elapsed,
                in_budget ? "" : ", over budget");
  }
  std::printf("%d/8 criteria hold\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}
