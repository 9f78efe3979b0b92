#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "mtf/popularity.hpp"
#include "mtf/rng.hpp"
#include "mtf/sample_batch.hpp"

namespace mtf::analytic {

namespace detail {
struct OutShape;
}

/// Distinguished time value for the stationary regime.
inline constexpr double kStationary = std::numeric_limits<double>::infinity();

/// φ⁻¹(y) for y ∈ (p₀, 1], by bisection on a geometrically grown bracket.
double inverse_laplace(const PopularityLaw& law, double y);

/// Density of S∞: −(1/μ) φ″(s)/φ′(s) with s = φ⁻¹(1 − x) on [0, 1 − p₀), 0 beyond.
double stationary_density(const PopularityLaw& law, double x);
/// CDF of S∞, 1 − |φ′(s)|/μ in closed form.
double stationary_cdf(const PopularityLaw& law, double x);
/// Inverse of stationary_cdf.
double stationary_quantile(const PopularityLaw& law, double u);

/// 1 − φ(t); 1 − p₀ for the stationary regime.
double threshold(const PopularityLaw& law, double t);
/// |φ′(t)|/μ, the mass above the threshold.
double out_mass(const PopularityLaw& law, double t);

/// Decreasing: ∫_[0,y] e^{−zt} P(dz). Increasing: ∫_(y,∞) e^{−zt} P(dz).
double g_t(const PopularityLaw& law, Ordering ordering, double t, double y);

/// Generalized inverse shaping the out-of-equilibrium density:
/// inf{y : G(y) ≥ 1 − x} (decreasing) or inf{y : 1 − g_t(y) ≥ x} (increasing)
/// for x ∈ [1 − φ(t), 1]. Unbounded supports are capped at weight_cap().
double tilde_g_t(const PopularityLaw& law, Ordering ordering, double t, double x);

double transient_density(const PopularityLaw& law, Ordering ordering, double t, double x);

/// (1/μ) ∫₀ᵗ φ″(u) exp(−λ(1 − φ(u))) du.
double laplace_equilibrium_limit(const PopularityLaw& law, double t, double lambda);
/// Laplace transform of the part of S(t) above the threshold.
double laplace_out_limit(const PopularityLaw& law, Ordering ordering, double t, double lambda);

struct TvDistance {
  double exact;
  double bound;
};
/// ½ ∫ |f_{S(t)} − f_{S∞}| and the bound 2|φ′(t)|/μ.
TvDistance tv_distance_to_stationary(const PopularityLaw& law, Ordering ordering, double t);

/// P(S(t) > δ), the limiting LRU fault probability for a cache of δn items.
double lru_fault_probability(const PopularityLaw& law, Ordering ordering, double t, double delta);
/// Same quantity for the decreasing Zipf profile i^α, through incomplete gamma functions.
double pac_fault_probability(double alpha, double t, double delta);

/// The limiting law of S(t) on [0, 1], split at the threshold 1 − φ(t).
class SearchCostLaw {
 public:
  /// Verifies normalization and the threshold mass; throws ConstructionError.
  SearchCostLaw(LawPtr law, Ordering ordering, double t);

  double t() const { return t_; }
  bool stationary() const { return t_ == kStationary; }
  Ordering ordering() const { return ordering_; }
  double threshold() const { return threshold_; }
  double out_mass() const { return out_mass_; }
  const PopularityLaw& law() const { return *law_; }
  const LawPtr& law_ptr() const { return law_; }

  double density(double x) const;
  double cdf(double x) const;
  /// Points in [0, 1] where the density may jump.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  double sample(Rng& rng) const;
  /// ∫₀¹ e^{−λx} f(x) dx by quadrature.
  double laplace(double lambda) const;

 private:
  double out_cdf(double x) const;  // ∫_threshold^x f, monotone orderings only
  double sample_out(double u) const;

  LawPtr law_;
  Ordering ordering_;
  double t_;
  double threshold_;
  double out_mass_;
  double mu_;
  std::vector<double> breakpoints_;
  std::vector<double> out_table_;  // out_cdf on a uniform grid of [threshold, 1]
  std::shared_ptr<const detail::OutShape> shape_;
};

SearchCostLaw transient_law(const LawPtr& law, Ordering ordering, double t);
SearchCostLaw stationary_law(const LawPtr& law);

/// count i.i.d. draws of S(t). Draw k uses stream (seed, k).
SampleBatch sample_limiting(const SearchCostLaw& law, std::size_t count, std::uint64_t seed);

}  // namespace mtf::analytic
