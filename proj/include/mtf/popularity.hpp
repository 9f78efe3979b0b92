#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtf/numerics.hpp"
#include "mtf/rng.hpp"

namespace mtf {

/// Initial arrangement of the list relative to popularity (position i holds item i).
enum class Ordering { exchangeable, decreasing, increasing };

std::string_view to_string(Ordering o);
/// Accepts "ex", "dec", "inc" and the full names.
Ordering parse_ordering(std::string_view s);

struct Atom {
  double location;
  double mass;
};

/// Set of reals with explicit endpoint closedness; hi may be +inf.
struct WeightRange {
  double lo = 0.0;
  bool lo_closed = true;
  double hi = std::numeric_limits<double>::infinity();
  bool hi_closed = false;

  bool contains(double x) const {
    return (lo_closed ? x >= lo : x > lo) && (hi_closed ? x <= hi : x < hi);
  }
  static WeightRange closed(double lo, double hi) { return {lo, true, hi, true}; }
  static WeightRange above(double lo) {
    return {lo, false, std::numeric_limits<double>::infinity(), false};
  }
  static WeightRange below(double hi) { return {0.0, true, hi, false}; }
  static WeightRange all() { return {}; }
};

/// A probability law P on [0, ∞) with finite positive mean: the limiting
/// empirical law of scaled request weights.
///
/// A law is a continuous part (density, or positional integrals for
/// push-forward laws) plus a list of atoms. Everything that integrates
/// against P goes through integrate(), so derived laws only have to say how
/// to integrate their continuous part.
class PopularityLaw {
 public:
  virtual ~PopularityLaw() = default;

  /// Family descriptor, e.g. "exp(1)" or "pareto(-0.5)".
  virtual std::string name() const = 0;
  virtual double mean() const = 0;

  /// φ(s) = ∫ e^{−sx} P(dx) and its first two derivatives, s ≥ 0.
  virtual double laplace(double s) const;
  virtual double dlaplace(double s) const;
  virtual double d2laplace(double s) const;

  virtual double cdf(double x) const;
  /// inf{x : F(x) ≥ u}.
  virtual double quantile(double u) const;
  virtual double sample(Rng& rng) const { return quantile(rng.uniform()); }

  /// Density of the absolutely continuous part (0 when there is none).
  virtual double density(double /*x*/) const { return 0.0; }
  virtual std::vector<Atom> atoms() const { return {}; }
  virtual bool has_continuous_part() const { return true; }
  virtual double support_lower() const { return 0.0; }
  virtual double support_upper() const { return std::numeric_limits<double>::infinity(); }

  /// ∫_[lo,hi] h dP over the continuous part. decay_rate > 0 means h decays at
  /// least like e^{−decay_rate·x} and selects an exponential change of variable.
  virtual double integrate_continuous(const numerics::RealFn& h, double lo, double hi,
                                      double decay_rate) const;

  /// ∫_[0,y] z^k e^{−zt} P(dz), atoms at y included; y may be +inf.
  virtual double truncated_moment(int k, double t, double y) const;

  /// ∫_range h dP, atoms included according to the range's closedness.
  double integrate(const numerics::RealFn& h, const WeightRange& range,
                   double decay_rate = 0.0) const;

  /// P({0}).
  double zero_atom() const;

  /// Largest weight used as an inversion bracket: the support maximum, or the
  /// 1 − 1e−12 quantile for unbounded support.
  double weight_cap() const;

  /// Resolution shared by the law's generalized inverses.
  static numerics::QuadratureSpec quadrature() { return {1e-13, 1e-12, 60}; }
};

using LawPtr = std::shared_ptr<const PopularityLaw>;

class DiracLaw final : public PopularityLaw {
 public:
  explicit DiracLaw(double c);
  std::string name() const override;
  double mean() const override { return c_; }
  double laplace(double s) const override;
  double dlaplace(double s) const override;
  double d2laplace(double s) const override;
  double cdf(double x) const override { return x >= c_ ? 1.0 : 0.0; }
  double quantile(double) const override { return c_; }
  double sample(Rng&) const override { return c_; }
  double truncated_moment(int k, double t, double y) const override;
  std::vector<Atom> atoms() const override { return {{c_, 1.0}}; }
  bool has_continuous_part() const override { return false; }
  double support_lower() const override { return c_; }
  double support_upper() const override { return c_; }

 private:
  double c_;
};

/// Weights in {0, 1} with P(w = 1) = p.
class BernoulliLaw final : public PopularityLaw {
 public:
  explicit BernoulliLaw(double p);
  std::string name() const override;
  double mean() const override { return p_; }
  double laplace(double s) const override;
  double dlaplace(double s) const override;
  double d2laplace(double s) const override;
  double cdf(double x) const override;
  double quantile(double u) const override;
  std::vector<Atom> atoms() const override;
  bool has_continuous_part() const override { return false; }
  double support_upper() const override { return 1.0; }

 private:
  double p_;
};

/// Gamma law with shape α and unit scale, φ(s) = (1 + s)^{−α}. Shape 1 is Exp(1).
class GammaLaw final : public PopularityLaw {
 public:
  explicit GammaLaw(double shape);
  std::string name() const override;
  double mean() const override { return shape_; }
  double laplace(double s) const override;
  double dlaplace(double s) const override;
  double d2laplace(double s) const override;
  double cdf(double x) const override;
  double quantile(double u) const override;
  double sample(Rng& rng) const override;
  double density(double x) const override;
  double truncated_moment(int k, double t, double y) const override;

 private:
  double shape_;
  double log_norm_;
};

/// Geometric law on {0, 1, 2, …}: P(w = k) = p(1 − p)^k, φ(s) = p / (1 − (1 − p)e^{−s}).
class GeometricLaw final : public PopularityLaw {
 public:
  explicit GeometricLaw(double p);
  std::string name() const override;
  double mean() const override { return (1.0 - p_) / p_; }
  double laplace(double s) const override;
  double dlaplace(double s) const override;
  double d2laplace(double s) const override;
  double cdf(double x) const override;
  double quantile(double u) const override;
  std::vector<Atom> atoms() const override;
  bool has_continuous_part() const override { return false; }

 private:
  double p_;
};

/// Pareto law P_α(dx) = |α|^{−1} x^{1/α − 1} dx on [1, ∞), α ∈ (−1, 0); the
/// limit of Zipf weights i^α.
class ParetoLaw final : public PopularityLaw {
 public:
  explicit ParetoLaw(double alpha);
  std::string name() const override;
  double mean() const override { return 1.0 / (1.0 + alpha_); }
  double laplace(double s) const override;
  double dlaplace(double s) const override;
  double d2laplace(double s) const override;
  double cdf(double x) const override;
  double quantile(double u) const override;
  double density(double x) const override;
  double truncated_moment(int k, double t, double y) const override;
  double support_lower() const override { return 1.0; }
  double alpha() const { return alpha_; }

 private:
  // s^{−(k+1/α)} Γ(k + 1/α, s) / |α|, the k-th absolute moment transform.
  double moment_transform(int k, double s) const;
  double alpha_;
};

/// Beta(a, b) on [0, 1] with density ∝ x^{a−1}(1 − x)^{b−1}. Beta(a, 1) is the
/// limit of increasing Zipf weights i^{1/a}.
class BetaLaw final : public PopularityLaw {
 public:
  BetaLaw(double a, double b);
  std::string name() const override;
  double mean() const override { return a_ / (a_ + b_); }
  double laplace(double s) const override;
  double dlaplace(double s) const override;
  double d2laplace(double s) const override;
  double cdf(double x) const override;
  double quantile(double u) const override;
  double sample(Rng& rng) const override;
  double density(double x) const override;
  double truncated_moment(int k, double t, double y) const override;
  double support_upper() const override { return 1.0; }

 private:
  // Binomial expansion of (1 − x)^{b−1}, used when b is a small integer.
  bool expandable() const { return expand_terms_ > 0; }
  double a_;
  double b_;
  double log_norm_;
  int expand_terms_ = 0;
};

/// Push-forward of the normalized Lebesgue measure on [0, c] by a density q;
/// the limit of increments Q(ci/n) − Q(c(i−1)/n) scaled by n/c. q must be
/// strictly monotone on [0, c] (constant q is a Dirac law, built separately).
class PushforwardLaw final : public PopularityLaw {
 public:
  PushforwardLaw(numerics::RealFn q, double c, std::string label);
  std::string name() const override { return label_; }
  double mean() const override { return 1.0 / c_; }
  double laplace(double s) const override;
  double dlaplace(double s) const override;
  double d2laplace(double s) const override;
  double cdf(double x) const override;
  double quantile(double u) const override;
  double sample(Rng& rng) const override { return q_(c_ * rng.uniform()); }
  double support_lower() const override { return qmin_; }
  double support_upper() const override { return qmax_; }
  double integrate_continuous(const numerics::RealFn& h, double lo, double hi,
                              double decay_rate) const override;
  bool decreasing() const { return decreasing_; }
  double length() const { return c_; }
  const numerics::RealFn& shape() const { return q_; }

 private:
  // Position where q crosses the weight value y (clamped to [0, c]).
  double position_of(double y) const;
  double positional(const numerics::RealFn& h) const;

  numerics::RealFn q_;
  double c_;
  std::string label_;
  bool decreasing_;
  double qmin_;
  double qmax_;
};

/// m̄(dy) = y m(dy) / ⟨m, x⟩, the waiting-time-paradox reweighting.
class SizeBiasedLaw final : public PopularityLaw {
 public:
  explicit SizeBiasedLaw(LawPtr base);
  std::string name() const override;
  double mean() const override { return mean_; }
  double laplace(double s) const override;
  double dlaplace(double s) const override;
  double d2laplace(double s) const override;
  double cdf(double x) const override;
  double density(double x) const override;
  std::vector<Atom> atoms() const override;
  bool has_continuous_part() const override { return base_->has_continuous_part(); }
  double support_lower() const override { return base_->support_lower(); }
  double support_upper() const override { return base_->support_upper(); }
  double integrate_continuous(const numerics::RealFn& h, double lo, double hi,
                              double decay_rate) const override;

 private:
  LawPtr base_;
  double base_mean_;
  double mean_;
};

LawPtr size_biased(const LawPtr& law);

/// Parse a law descriptor such as "exp(1)", "gamma(2)", "dirac(1)",
/// "bernoulli(0.5)", "geometric(0.5)", "pareto(-0.5)", "beta(1,2)",
/// "linear(1)" (q(x) = 2(c − x)/c² on [0, c]) or "uniform(c)".
LawPtr make_law(std::string_view descriptor);

/// A concrete list: weights in list order (item i starts at position i).
class RequestProfile {
 public:
  RequestProfile(std::vector<double> weights, Ordering ordering, double scale,
                 std::uint64_t seed, std::string family, LawPtr limit_law = nullptr);

  std::size_t n() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  Ordering ordering() const { return ordering_; }
  double scale() const { return scale_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& family() const { return family_; }
  const LawPtr& limit_law() const { return limit_law_; }
  double total_weight() const { return total_; }
  std::span<const double> popularities() const { return popularities_; }
  /// All-zero draws rejected while generating this profile.
  std::size_t resample_count() const { return resamples_; }
  void set_resample_count(std::size_t r) { resamples_ = r; }

 private:
  std::vector<double> weights_;
  std::vector<double> popularities_;
  Ordering ordering_;
  double scale_;
  std::uint64_t seed_;
  std::string family_;
  LawPtr limit_law_;
  double total_ = 0.0;
  std::size_t resamples_ = 0;
};

/// Weight vector of n i.i.d. draws from law using stream (seed, stream),
/// sorted per ordering (stable, so ties keep draw order). All-zero draws are
/// rejected and redrawn.
std::vector<double> draw_iid_weights(const PopularityLaw& law, std::size_t n, Ordering ordering,
                                     Rng& rng, std::size_t* resamples = nullptr);

RequestProfile make_iid_profile(const LawPtr& law, std::size_t n, Ordering ordering,
                                std::uint64_t seed);
/// Weights i^α, scale n^{−α}; the limit law is attached.
RequestProfile make_zipf_profile(double alpha, std::size_t n);
/// Weights Q(ci/n) − Q(c(i−1)/n); scale n/c.
RequestProfile make_density_increment_profile(const numerics::RealFn& q, double c, std::size_t n,
                                              std::string label = "density");
/// Limit law of Zipf weights i^α (α > −1).
LawPtr zipf_limit_law(double alpha);

class DiscreteMeasure {
 public:
  explicit DiscreteMeasure(std::vector<Atom> atoms);
  std::span<const Atom> atoms() const { return atoms_; }
  double mean() const;
  /// inf{x : F(x) ≥ u}.
  double quantile(double u) const;

 private:
  std::vector<Atom> atoms_;  // sorted by location, merged
};

/// ν = (1/n) Σ δ_{nμ p_i}.
DiscreteMeasure empirical_measure(const RequestProfile& profile, double mu);

double wasserstein1(const DiscreteMeasure& a, const DiscreteMeasure& b);
/// Quantile coupling on a midpoint grid of `grid` levels.
double wasserstein1(const DiscreteMeasure& a, const PopularityLaw& b, std::size_t grid = 100000);

}  // namespace mtf
