#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fairreg/bounds.hpp"
#include "fairreg/dist1d.hpp"
#include "fairreg/metrics.hpp"
#include "fairreg/rng.hpp"

using fairreg::Rng;
using fairreg::dist1d::EmpiricalDist1d;
using fairreg::dist1d::GaussianDist1d;
namespace bounds = fairreg::bounds;
namespace metrics = fairreg::metrics;

namespace {
EmpiricalDist1d delta(double x) { return EmpiricalDist1d::point_mass(x); }

EmpiricalDist1d random_dist(Rng& rng, std::size_t max_pts) {
  std::vector<double> pts(1 + rng.below(max_pts));
  for (double& v : pts) v = rng.normal(0.0, 2.0);
  return EmpiricalDist1d::from_samples(pts);
}
}  // namespace

TEST_CASE("sp error-sum floor values") {
  CHECK(bounds::sp_error_sum_lower_bound(delta(0), delta(1), 1.0) == 1.0);
  const EmpiricalDist1d d = EmpiricalDist1d::from_samples({0.4, 1.1});
  CHECK(bounds::sp_error_sum_lower_bound(d, d, 2.0) == 0.0);
  // target proportional to the group with factor 3
  CHECK(bounds::sp_error_sum_lower_bound(delta(0), delta(3), 2.0) == 3.0);
}

TEST_CASE("mean-gap bounds") {
  const bounds::MeanGapBounds g = bounds::mean_gap_bounds(delta(0), delta(1));
  CHECK(g.mae_bound == 1.0);
  CHECK(g.mse_bound == 0.5);
  const EmpiricalDist1d d = EmpiricalDist1d::from_samples({0.2, 0.9});
  const bounds::MeanGapBounds z = bounds::mean_gap_bounds(d, d);
  CHECK(z.mae_bound == 0.0);
  CHECK(z.mse_bound == 0.0);
}

TEST_CASE("mean-gap bound on sampled gaussians") {
  const EmpiricalDist1d y0 = EmpiricalDist1d::from_samples(
      fairreg::dist1d::sample(GaussianDist1d(-1, 1), 100000, 41));
  const EmpiricalDist1d y1 = EmpiricalDist1d::from_samples(
      fairreg::dist1d::sample(GaussianDist1d(1, 1), 100000, 42));
  CHECK(bounds::mean_gap_bounds(y0, y1).mae_bound ==
        doctest::Approx(2.0).epsilon(0.025));
}

TEST_CASE("joint error floor") {
  CHECK(bounds::joint_error_lower_bound(delta(0), delta(1), 0.5, 1.0) == 0.5);
  CHECK(bounds::joint_error_lower_bound(delta(0), delta(1), 0.99, 1.0) ==
        doctest::Approx(0.01).epsilon(1e-12));
  CHECK(bounds::joint_error_lower_bound(delta(0), delta(2), 0.25, 2.0) == 0.5);
}

TEST_CASE("joint error floor matches constrained grid minimum") {
  // minimize alpha*e0 + (1-alpha)*e1 subject to e0 + e1 >= W, on a grid that
  // contains the corner optima
  const double alpha = 0.25, w = 2.0;
  double best = 1e300;
  for (int k = 0; k <= 4000; ++k) {
    const double e0 = w * k / 4000.0;
    best = std::min(best, alpha * e0 + (1 - alpha) * (w - e0));
  }
  CHECK(bounds::joint_error_lower_bound(delta(0), delta(2), alpha, 2.0) ==
        doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("finite-sample floor") {
  CHECK(bounds::finite_sample_lower_bound(delta(0), delta(1), 1000000000000ULL,
                                          0.05, 1.0) == doctest::Approx(1.0).epsilon(1e-5));
  const EmpiricalDist1d d = EmpiricalDist1d::from_samples({0.1, 0.6});
  CHECK(bounds::finite_sample_lower_bound(d, d, 50, 0.05, 1.0) < 0.0);
  // hand-derived digits: 1 - (2 + sqrt(2 ln 40)) / 10
  CHECK(bounds::finite_sample_lower_bound(delta(0), delta(1), 100, 0.05, 1.0) ==
        doctest::Approx(0.5283797).epsilon(1e-6));
  CHECK_THROWS_WITH_AS(bounds::finite_sample_lower_bound(delta(0), delta(1), 10, 0.0, 1.0),
                       "delta out of range", std::invalid_argument);
  CHECK_THROWS_AS(bounds::finite_sample_lower_bound(delta(0), delta(1), 10, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_WITH_AS(bounds::finite_sample_lower_bound(delta(0), delta(1), 10, 0.05, 0.0),
                       "c1 must be positive", std::invalid_argument);
}

TEST_CASE("excess risk floor") {
  CHECK(bounds::excess_risk_lower_bound({0, 0, 1.7, 0}) == 1.7);
  CHECK(bounds::excess_risk_lower_bound({0.1, 0.1, 2.0, 0.2}) ==
        doctest::Approx(1.4).epsilon(1e-15));
  CHECK(bounds::excess_risk_lower_bound({0, 0, 0, 0}) == 0.0);
}

TEST_CASE("ks from w1 conversion") {
  CHECK(bounds::ks_from_w1(0.0, 3.0) == 0.0);
  CHECK(bounds::ks_from_w1(1.0, 1.0) == 2.0);
  CHECK(bounds::ks_from_w1(0.25, 1.0) == 1.0);
  CHECK_THROWS_WITH_AS(bounds::ks_from_w1(1.0, 0.0), "density bound must be positive",
                       std::invalid_argument);
}

TEST_CASE("ks from w1 dominates a shifted uniform pair") {
  // Uniform[0,1] vs Uniform[0.25,1.25] discretized on quantile grids: true
  // KS is 0.25, well under the converted cap of 1.
  const std::size_t m = 2000;
  std::vector<double> xs(m), ys(m);
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = (i + 0.5) / static_cast<double>(m);
    ys[i] = xs[i] + 0.25;
  }
  const EmpiricalDist1d a = EmpiricalDist1d::from_samples(xs);
  const EmpiricalDist1d b = EmpiricalDist1d::from_samples(ys);
  const double ks = metrics::ks_distance(a, b);
  CHECK(ks == doctest::Approx(0.25).epsilon(0.01));
  CHECK(ks <= bounds::ks_from_w1(metrics::wasserstein_1_cdf(a, b), 1.0));
}

TEST_CASE("accuracy parity bound") {
  CHECK(bounds::accuracy_parity_bound(0.0, 1.0) == 1.0);
  CHECK(bounds::accuracy_parity_bound(7.3, 0.0) == 0.0);
  CHECK(bounds::accuracy_parity_bound(1.0, 2.0) ==
        doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("representation sp level") {
  CHECK(bounds::representation_sp_bound(0.0, 5.0, 2.0) == 0.0);
  CHECK(bounds::representation_sp_bound(1.0, 1.0, 1.0) == 2.0);
  CHECK(bounds::representation_sp_bound(0.09, 4.0, 1.0) ==
        doctest::Approx(1.2).epsilon(1e-12));
  CHECK_THROWS_AS(bounds::representation_sp_bound(1.0, 1.0, -1.0),
                  std::invalid_argument);
}

TEST_CASE("implied sp level") {
  CHECK(bounds::implied_sp_level(0.25, 1.0) == 1.0);
  CHECK(bounds::implied_sp_level(0.0, 1.0) == 0.0);
}

TEST_CASE("price comparison frozen values") {
  const bounds::PriceComparison eq = bounds::price_comparison(delta(0), delta(2), 0.5);
  CHECK(eq.without_attribute == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eq.with_attribute == doctest::Approx(1.0).epsilon(1e-12));

  const EmpiricalDist1d d = EmpiricalDist1d::from_samples({0.1, 0.4});
  const bounds::PriceComparison zero = bounds::price_comparison(d, d, 0.3);
  CHECK(zero.without_attribute == 0.0);
  CHECK(zero.with_attribute == doctest::Approx(0.0));

  // alpha=0.9: barycenter sits at 0.2, giving sqrt(0.9*0.04 + 0.1*3.24) = 0.6
  const bounds::PriceComparison skew = bounds::price_comparison(delta(0), delta(2), 0.9);
  CHECK(skew.without_attribute == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(skew.with_attribute == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(skew.with_attribute >= skew.without_attribute);
}

TEST_CASE("group error measurement") {
  const bounds::GroupErrors a =
      bounds::measure_group_errors({0.0, 0.0}, {0.0, 1.0}, {0, 1}, 1.0);
  CHECK(a.eps0 == 0.0);
  CHECK(a.eps1 == 1.0);
  CHECK(a.alpha == 0.5);

  const bounds::GroupErrors b =
      bounds::measure_group_errors({0.3, -0.2}, {0.3, -0.2}, {1, 0}, 2.0);
  CHECK(b.eps0 == 0.0);
  CHECK(b.eps1 == 0.0);

  // the constant 1/2 on targets equal to the group hits the error-sum floor
  const bounds::GroupErrors c = bounds::measure_group_errors(
      {0.5, 0.5, 0.5, 0.5}, {0.0, 1.0, 0.0, 1.0}, {0, 1, 0, 1}, 1.0);
  CHECK(c.eps0 + c.eps1 == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_WITH_AS(bounds::measure_group_errors({0.0}, {0.0}, {0}, 1.0),
                       "empty group", std::invalid_argument);
  CHECK_THROWS_AS(bounds::measure_group_errors({0.0}, {0.0, 1.0}, {0, 1}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("joint and balanced error combinations") {
  CHECK(bounds::balanced_error({1.0, 0.0, 1.0, 0.7}) == 0.5);
  CHECK(bounds::balanced_error({0.0, 0.0, 2.0, 0.5}) == 0.0);
  CHECK(bounds::balanced_error({0.6, 0.2, 1.0, 0.5}) == doctest::Approx(0.4));
  CHECK(bounds::joint_error({0.6, 0.2, 1.0, 0.25}) ==
        doctest::Approx(0.25 * 0.6 + 0.75 * 0.2));
}

TEST_CASE("mean-gap bound never exceeds W1") {
  Rng rng(77);
  for (int rep = 0; rep < 50; ++rep) {
    const EmpiricalDist1d a = random_dist(rng, 12);
    const EmpiricalDist1d b = random_dist(rng, 12);
    CHECK(bounds::mean_gap_bounds(a, b).mae_bound <=
          metrics::wasserstein_1_cdf(a, b) + 1e-10);
  }
}

TEST_CASE("density bound estimate") {
  CHECK(std::isinf(bounds::estimate_density_bound({0.3, 0.3, 0.3})));
  Rng rng(5);
  std::vector<double> u(4000);
  for (double& x : u) x = rng.uniform();
  const double est = bounds::estimate_density_bound(u);
  CHECK(est >= 0.7);
  CHECK(est <= 1.6);
}
