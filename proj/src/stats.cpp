#include "mtf/stats.hpp"

#include <algorithm>
#include <cmath>

#include "mtf/errors.hpp"

namespace mtf::stats {

EmpiricalCdf::EmpiricalCdf(std::vector<double> values) : sorted_(std::move(values)) {
  if (sorted_.empty()) throw InvalidArgument("empirical CDF needs at least one value");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double ks_distance(std::span<const double> values, const CdfFn& cdf) {
  if (values.empty()) throw InvalidArgument("ks_distance needs at least one value");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double m = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    d = std::max(d, static_cast<double>(i + 1) / m - f);
    d = std::max(d, f - static_cast<double>(i) / m);
  }
  return d;
}

double ks_distance(const SampleBatch& batch, const CdfFn& cdf) {
  return ks_distance(batch.values, cdf);
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("two-sample KS needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

double ks_two_sample_pvalue(double d, std::size_t m, std::size_t n) {
  const double ne = static_cast<double>(m) * static_cast<double>(n) / static_cast<double>(m + n);
  const double root = std::sqrt(ne);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double tv_discrete(const exact::DiscretePmf& a, const exact::DiscretePmf& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += std::abs(a[k] - b[k]);
  return 0.5 * s;
}

exact::DiscretePmf empirical_pmf(const SampleBatch& batch, std::size_t n) {
  if (batch.raw.empty()) throw InvalidArgument("batch carries no raw costs");
  exact::DiscretePmf pmf{std::vector<double>(n, 0.0)};
  const double w = 1.0 / static_cast<double>(batch.raw.size());
  for (auto c : batch.raw) {
    if (c < 1 || static_cast<std::size_t>(c) > n) throw OutOfRange("cost outside [1, n]");
    pmf.probabilities[static_cast<std::size_t>(c - 1)] += w;
  }
  return pmf;
}

double dkw_band(std::size_t m, double confidence) {
  if (m == 0) throw InvalidArgument("dkw_band needs m >= 1");
  if (!(confidence > 0.0 && confidence <= 1.0 - 1e-12)) {
    throw InvalidArgument("confidence must lie in (0, 1 - 1e-12]");
  }
  return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(m)));
}

double histogram_tv(std::span<const double> values, const CdfFn& cdf, std::size_t bins) {
  if (values.empty() || bins == 0) throw InvalidArgument("histogram_tv needs values and bins");
  std::vector<double> counts(bins, 0.0);
  for (double v : values) {
    auto b = static_cast<std::size_t>(std::clamp(v, 0.0, 1.0) * static_cast<double>(bins));
    counts[std::min(b, bins - 1)] += 1.0;
  }
  const double m = static_cast<double>(values.size());
  double s = 0.0;
  double prev = cdf(0.0);
  for (std::size_t b = 0; b < bins; ++b) {
    const double next = b + 1 == bins ? 1.0 : cdf(static_cast<double>(b + 1) / bins);
    s += std::abs(counts[b] / m - (next - prev));
    prev = next;
  }
  return 0.5 * s;
}

OrderReport stochastic_order_check(const CdfFn& lower, const CdfFn& upper, std::size_t grid,
                                   double slack) {
  if (grid < 2) throw InvalidArgument("order check needs a grid of at least 2 points");
  OrderReport r;
  r.grid = grid;
  r.slack = slack;
  for (std::size_t k = 0; k < grid; ++k) {
    const double x = static_cast<double>(k) / static_cast<double>(grid - 1);
    const double v = upper(x) - lower(x);
    if (v > r.max_violation) {
      r.max_violation = v;
      r.worst_x = x;
    }
  }
  r.pass = r.max_violation <= slack;
  return r;
}

OrderReport stochastic_order_check(const analytic::SearchCostLaw& lower,
                                   const analytic::SearchCostLaw& upper, std::size_t grid,
                                   double tolerance) {
  return stochastic_order_check([&](double x) { return lower.cdf(x); },
                                [&](double x) { return upper.cdf(x); }, grid, tolerance);
}

OrderReport stochastic_order_check(const SampleBatch& lower, const SampleBatch& upper,
                                   std::size_t grid, double confidence) {
  const EmpiricalCdf fl(lower.values);
  const EmpiricalCdf fu(upper.values);
  const double slack = dkw_band(lower.values.size(), confidence) +
                       dkw_band(upper.values.size(), confidence);
  return stochastic_order_check(fl, fu, grid, slack);
}

OrderReport stochastic_order_check(const SampleBatch& lower, const analytic::SearchCostLaw& upper,
                                   std::size_t grid, double confidence) {
  const EmpiricalCdf fl(lower.values);
  return stochastic_order_check(fl, [&](double x) { return upper.cdf(x); }, grid,
                                dkw_band(lower.values.size(), confidence));
}

OrderReport stochastic_order_check(const analytic::SearchCostLaw& lower, const SampleBatch& upper,
                                   std::size_t grid, double confidence) {
  const EmpiricalCdf fu(upper.values);
  return stochastic_order_check([&](double x) { return lower.cdf(x); }, fu, grid,
                                dkw_band(upper.values.size(), confidence));
}

nlohmann::json Report::to_json() const {
  auto d = details;
  d["name"] = name;
  return {{"statistic", statistic}, {"threshold", threshold}, {"pass", pass}, {"details", d}};
}

}  // namespace mtf::stats
