#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fairreg::dist1d {

// Discrete distribution on the real line: strictly increasing support points
// with positive weights summing to one. Construction sorts the input, merges
// exactly equal points and drops zero-weight points, so support equality is
// well defined. cumulative().back() is exactly 1.0.
class EmpiricalDist1d {
public:
  EmpiricalDist1d(std::vector<double> points, std::vector<double> weights);

  // Uniform weight 1/n per sample (duplicates merge). Throws on an empty or
  // non-finite input.
  static EmpiricalDist1d from_samples(const std::vector<double>& values);

  static EmpiricalDist1d point_mass(double x);

  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& cumulative() const { return cum_; }
  std::size_t size() const { return points_.size(); }
  double min() const { return points_.front(); }
  double max() const { return points_.back(); }

  // Right-continuous CDF: P(X <= z).
  double cdf(double z) const;

  // Generalized inverse CDF, defined for t in (0, 1]:
  // the smallest support point whose cumulative weight reaches t.
  double quantile(double t) const;

  double mean() const;

private:
  EmpiricalDist1d() = default;

  std::vector<double> points_;
  std::vector<double> weights_;
  std::vector<double> cum_;
};

struct GaussianDist1d {
  double mean = 0.0;
  double variance = 1.0;

  GaussianDist1d(double mean_, double variance_);

  double stddev() const;
  double cdf(double z) const;
};

// Seeded i.i.d. draws; n must be positive. Empirical sampling inverts the CDF
// at uniform levels in (0, 1].
std::vector<double> sample(const EmpiricalDist1d& d, std::size_t n,
                           std::uint64_t seed);
std::vector<double> sample(const GaussianDist1d& d, std::size_t n,
                           std::uint64_t seed);

}  // namespace fairreg::dist1d
