#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtf/analytic.hpp"
#include "mtf/exact_oracle.hpp"
#include "mtf/sample_batch.hpp"

namespace mtf::stats {

using CdfFn = std::function<double(double)>;

class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> values);
  /// Fraction of values ≤ x.
  double operator()(double x) const;
  std::span<const double> sorted_values() const { return sorted_; }
  std::size_t count() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

/// sup_x |F_m(x) − F(x)|, evaluated at both sides of every jump.
double ks_distance(std::span<const double> values, const CdfFn& cdf);
double ks_distance(const SampleBatch& batch, const CdfFn& cdf);

/// sup_x |F_a(x) − F_b(x)| for two samples.
double ks_two_sample(std::span<const double> a, std::span<const double> b);
/// Asymptotic p-value of the two-sample statistic d (Kolmogorov distribution
/// with the usual small-sample correction).
double ks_two_sample_pvalue(double d, std::size_t m, std::size_t n);

/// ½ Σ |a_k − b_k|, the shorter pmf padded with zeros.
double tv_discrete(const exact::DiscretePmf& a, const exact::DiscretePmf& b);
/// Pmf of the 0-based predecessor counts (raw cost − 1) of a batch over n positions.
exact::DiscretePmf empirical_pmf(const SampleBatch& batch, std::size_t n);

/// √(ln(2/(1 − confidence)) / (2m)).
double dkw_band(std::size_t m, double confidence);

/// TV between a batch in [0, 1] and a continuous law given by its CDF, on equal bins.
double histogram_tv(std::span<const double> values, const CdfFn& cdf, std::size_t bins = 200);

struct OrderReport {
  double max_violation = 0.0;  // max over the grid of CDF_upper − CDF_lower
  double worst_x = 0.0;
  double slack = 0.0;
  std::size_t grid = 0;
  bool pass = true;
};

/// Checks CDF_lower(x) ≥ CDF_upper(x) − slack on a uniform grid of [0, 1].
OrderReport stochastic_order_check(const CdfFn& lower, const CdfFn& upper, std::size_t grid,
                                   double slack);
OrderReport stochastic_order_check(const analytic::SearchCostLaw& lower,
                                   const analytic::SearchCostLaw& upper, std::size_t grid = 200,
                                   double tolerance = 1e-8);
/// Slack is the sum of the DKW bands of the batches at the given confidence.
OrderReport stochastic_order_check(const SampleBatch& lower, const SampleBatch& upper,
                                   std::size_t grid = 200, double confidence = 0.99);
OrderReport stochastic_order_check(const SampleBatch& lower, const analytic::SearchCostLaw& upper,
                                   std::size_t grid = 200, double confidence = 0.99);
OrderReport stochastic_order_check(const analytic::SearchCostLaw& lower, const SampleBatch& upper,
                                   std::size_t grid = 200, double confidence = 0.99);

/// Validation outcome, exported as {statistic, threshold, pass, details}.
struct Report {
  std::string name;  // which statistic, stored under details.name
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  nlohmann::json details = nlohmann::json::object();

  nlohmann::json to_json() const;
};

}  // namespace mtf::stats
