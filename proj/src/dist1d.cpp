#include "fairreg/dist1d.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fairreg/rng.hpp"

namespace fairreg::dist1d {

EmpiricalDist1d::EmpiricalDist1d(std::vector<double> points,
                                 std::vector<double> weights) {
  if (points.empty()) throw std::invalid_argument("empty sample");
  if (points.size() != weights.size())
    throw std::invalid_argument("points/weights size mismatch");

  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i]) || !std::isfinite(weights[i]))
      throw std::invalid_argument("non-finite value");
    if (weights[i] < 0.0) throw std::invalid_argument("negative weight");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("weights not normalized");

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });

  points_.reserve(points.size());
  weights_.reserve(points.size());
  for (std::size_t k : order) {
    const double w = weights[k] / total;
    if (w == 0.0) continue;
    if (!points_.empty() && points_.back() == points[k]) {
      weights_.back() += w;
    } else {
      points_.push_back(points[k]);
      weights_.push_back(w);
    }
  }
  if (points_.empty()) throw std::invalid_argument("no mass");

  cum_.resize(points_.size());
  double run = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    run += weights_[i];
    cum_[i] = run;
  }
  cum_.back() = 1.0;
}

EmpiricalDist1d EmpiricalDist1d::from_samples(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  const double w = 1.0 / static_cast<double>(values.size());
  return EmpiricalDist1d(values, std::vector<double>(values.size(), w));
}

EmpiricalDist1d EmpiricalDist1d::point_mass(double x) {
  return EmpiricalDist1d({x}, {1.0});
}

double EmpiricalDist1d::cdf(double z) const {
  if (std::isnan(z)) throw std::invalid_argument("non-finite value");
  const auto it = std::upper_bound(points_.begin(), points_.end(), z);
  if (it == points_.begin()) return 0.0;
  return cum_[static_cast<std::size_t>(it - points_.begin()) - 1];
}

double EmpiricalDist1d::quantile(double t) const {
  if (!(t > 0.0) || !(t <= 1.0))
    throw std::invalid_argument("quantile level out of range");
  const auto it = std::lower_bound(cum_.begin(), cum_.end(), t);
  // cum_.back() == 1.0 exactly, so t <= 1 always lands inside.
  return points_[static_cast<std::size_t>(it - cum_.begin())];
}

double EmpiricalDist1d::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) m += weights_[i] * points_[i];
  return m;
}

GaussianDist1d::GaussianDist1d(double mean_, double variance_)
    : mean(mean_), variance(variance_) {
  if (!std::isfinite(mean) || !std::isfinite(variance) || variance <= 0.0)
    throw std::invalid_argument("variance must be positive");
}

double GaussianDist1d::stddev() const { return std::sqrt(variance); }

double GaussianDist1d::cdf(double z) const {
  return 0.5 * std::erfc((mean - z) / (stddev() * std::sqrt(2.0)));
}

std::vector<double> sample(const EmpiricalDist1d& d, std::size_t n,
                           std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("empty draw");
  Rng rng(seed);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = d.quantile(rng.uniform_open_closed());
  return out;
}

std::vector<double> sample(const GaussianDist1d& d, std::size_t n,
                           std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("empty draw");
  Rng rng(seed);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rng.normal(d.mean, d.stddev());
  return out;
}

}  // namespace fairreg::dist1d
