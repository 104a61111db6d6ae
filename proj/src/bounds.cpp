#include "fairreg/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fairreg/metrics.hpp"

namespace fairreg::bounds {

namespace {

void check_density_bound(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("density bound must be positive");
}

void check_nonnegative(double v, const char* what) {
  if (!(v >= 0.0)) throw std::invalid_argument(what);
}

}  // namespace

double joint_error(const GroupErrors& g) {
  return g.alpha * g.eps0 + (1.0 - g.alpha) * g.eps1;
}

double balanced_error(const GroupErrors& g) { return 0.5 * (g.eps0 + g.eps1); }

nlohmann::json BoundCertificate::to_json() const {
  return nlohmann::json{{"name", name},
                        {"lower_bound", lower_bound},
                        {"measured_lhs", measured_lhs},
                        {"slack", slack},
                        {"vacuous", vacuous},
                        {"inputs_digest", inputs_digest}};
}

double sp_error_sum_lower_bound(const EmpiricalDist1d& y0,
                                const EmpiricalDist1d& y1, double p) {
  return metrics::wasserstein_p(y0, y1, p);
}

MeanGapBounds mean_gap_bounds(const EmpiricalDist1d& y0,
                              const EmpiricalDist1d& y1) {
  MeanGapBounds out;
  out.mae_bound = std::abs(y0.mean() - y1.mean());
  out.mse_bound = 0.5 * out.mae_bound * out.mae_bound;
  return out;
}

double joint_error_lower_bound(const EmpiricalDist1d& y0,
                               const EmpiricalDist1d& y1, double alpha,
                               double p) {
  return metrics::zero_one_entropy(alpha) * metrics::wasserstein_p(y0, y1, p);
}

double finite_sample_lower_bound(const EmpiricalDist1d& y0,
                                 const EmpiricalDist1d& y1, std::size_t n,
                                 double delta, double c1) {
  if (n < 1) throw std::invalid_argument("sample size must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("delta out of range");
  if (!(c1 > 0.0)) throw std::invalid_argument("c1 must be positive");
  const double w1 = metrics::wasserstein_1_cdf(y0, y1);
  const double correction = (2.0 * c1 + std::sqrt(2.0 * std::log(2.0 / delta))) *
                            std::sqrt(1.0 / static_cast<double>(n));
  return w1 - correction;
}

double excess_risk_lower_bound(const ExcessRiskInputs& in) {
  check_nonnegative(in.opt_err0, "negative error");
  check_nonnegative(in.opt_err1, "negative error");
  check_nonnegative(in.opt_pred_dist, "negative distance");
  check_nonnegative(in.eps_sp, "negative distance");
  return in.opt_pred_dist - 2.0 * (in.opt_err0 + in.opt_err1) - in.eps_sp;
}

double implied_sp_level(double eps_sp, double density_bound_c) {
  check_nonnegative(eps_sp, "negative distance");
  check_density_bound(density_bound_c);
  return 2.0 * std::sqrt(density_bound_c * eps_sp);
}

double ks_from_w1(double w1, double density_bound_c) {
  check_nonnegative(w1, "negative distance");
  check_density_bound(density_bound_c);
  return 2.0 * std::sqrt(density_bound_c * w1);
}

double accuracy_parity_bound(double rho, double w1_joint) {
  check_nonnegative(rho, "negative Lipschitz constant");
  check_nonnegative(w1_joint, "negative distance");
  return std::sqrt(rho * rho + 1.0) * w1_joint;
}

double representation_sp_bound(double w1_repr, double rho,
                               double density_bound_c) {
  check_nonnegative(w1_repr, "negative distance");
  check_nonnegative(rho, "negative Lipschitz constant");
  check_density_bound(density_bound_c);
  return 2.0 * std::sqrt(density_bound_c * rho * w1_repr);
}

PriceComparison price_comparison(const EmpiricalDist1d& y0,
                                 const EmpiricalDist1d& y1, double alpha) {
  PriceComparison out;
  out.without_attribute =
      metrics::zero_one_entropy(alpha) * metrics::wasserstein_p(y0, y1, 2.0);
  const EmpiricalDist1d mid =
      metrics::barycenter_1d({y0, y1}, {alpha, 1.0 - alpha});
  const double w0 = metrics::wasserstein_p(y0, mid, 2.0);
  const double w1 = metrics::wasserstein_p(y1, mid, 2.0);
  out.with_attribute =
      std::sqrt(alpha * w0 * w0 + (1.0 - alpha) * w1 * w1);
  return out;
}

GroupErrors measure_group_errors(const std::vector<double>& predictions,
                                 const std::vector<double>& targets,
                                 const std::vector<std::uint8_t>& groups,
                                 double p) {
  if (predictions.empty() || predictions.size() != targets.size() ||
      predictions.size() != groups.size())
    throw std::invalid_argument("aligned nonempty sequences required");
  if (!(p >= 1.0)) throw std::invalid_argument("order below 1");

  double acc[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int a = groups[i] ? 1 : 0;
    const double r = std::abs(predictions[i] - targets[i]);
    acc[a] += (p == 1.0) ? r : (p == 2.0 ? r * r : std::pow(r, p));
    ++count[a];
  }
  if (count[0] == 0 || count[1] == 0) throw std::invalid_argument("empty group");

  GroupErrors out;
  out.p = p;
  out.alpha = static_cast<double>(count[0]) /
              static_cast<double>(predictions.size());
  const double m0 = acc[0] / static_cast<double>(count[0]);
  const double m1 = acc[1] / static_cast<double>(count[1]);
  if (p == 1.0) {
    out.eps0 = m0;
    out.eps1 = m1;
  } else if (p == 2.0) {
    out.eps0 = std::sqrt(m0);
    out.eps1 = std::sqrt(m1);
  } else {
    out.eps0 = std::pow(m0, 1.0 / p);
    out.eps1 = std::pow(m1, 1.0 / p);
  }
  return out;
}

double estimate_density_bound(const std::vector<double>& values) {
  if (values.size() < 2) throw std::invalid_argument("empty sample");
  std::vector<double> v = values;
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite value");
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  const double lo = v.front(), hi = v.back();
  if (hi == lo) return std::numeric_limits<double>::infinity();

  const auto quantile = [&](double t) {
    const double pos = t * (n - 1.0);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return (i + 1 < v.size()) ? v[i] * (1.0 - frac) + v[i + 1] * frac : v[i];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double width = 2.0 * iqr * std::pow(n, -1.0 / 3.0);
  if (width <= 0.0) width = (hi - lo) / std::ceil(std::sqrt(n));

  const std::size_t bins =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi - lo) / width)));
  std::vector<std::size_t> counts(bins, 0);
  for (double x : v) {
    std::size_t b = static_cast<std::size_t>((x - lo) / (hi - lo) *
                                             static_cast<double>(bins));
    if (b >= bins) b = bins - 1;
    ++counts[b];
  }
  const double bin_width = (hi - lo) / static_cast<double>(bins);
  std::size_t peak = 0;
  for (std::size_t c : counts) peak = std::max(peak, c);
  return static_cast<double>(peak) / (n * bin_width);
}

}  // namespace fairreg::bounds
