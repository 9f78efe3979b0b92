#include "mtf/analytic.hpp"

#include <algorithm>
#include <cmath>

#include "mtf/errors.hpp"

namespace mtf::analytic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

numerics::QuadratureSpec fine_spec() { return {1e-12, 1e-10, 60}; }

double checked_mean(const PopularityLaw& law) {
  const double mu = law.mean();
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DegenerateLaw("law needs a mean in (0, inf)");
  return mu;
}

void check_time(double t) {
  if (!(t > 0.0)) throw InvalidArgument("transient time must be > 0");
}

}  // namespace

namespace detail {

// Everything about (law, ordering, t) that the out-of-equilibrium piece needs.
struct OutShape {
  const PopularityLaw* law;
  Ordering ordering;
  double t;
  double mu;
  double phi_t;
  double dphi_abs;  // |φ′(t)|
  double thr;
  double lower;  // smallest weight in the support
  double cap;    // largest weight used by the inversions
  std::vector<Atom> atoms;

  OutShape(const PopularityLaw& l, Ordering o, double time) : law(&l), ordering(o), t(time) {
    mu = checked_mean(l);
    phi_t = l.laplace(t);
    dphi_abs = -l.dlaplace(t);
    thr = 1.0 - phi_t;
    lower = l.support_lower();
    if (o != Ordering::exchangeable) {
      cap = l.weight_cap();
      for (const auto& a : l.atoms()) {
        if (a.mass > 0.0) atoms.push_back(a);
      }
    } else {
      cap = std::numeric_limits<double>::infinity();
    }
  }

  // ∫_[0,y] e^{−zt} P(dz) and ∫_[0,y] z e^{−zt} P(dz).
  double G(double y) const { return law->truncated_moment(0, t, y); }
  double M1(double y) const { return law->truncated_moment(1, t, y); }

  double atom_mass(double z) const {
    for (const auto& a : atoms) {
      if (a.location == z) return a.mass;
    }
    return 0.0;
  }

  // inf{y : G(y) ≥ target}, capped at the support bound.
  double inverse_G(double target) const {
    if (target <= 0.0) return 0.0;
    double lo = lower;
    double hi = cap;
    if (G(lo) >= target) return lo;
    if (G(hi) < target) return hi;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (G(mid) >= target) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    for (const auto& a : atoms) {
      if (std::abs(a.location - hi) <= 1e-9 * std::max(1.0, a.location)) return a.location;
    }
    return hi;
  }

  double tilde(double x) const {
    const double target = ordering == Ordering::decreasing ? 1.0 - x : x - thr;
    return inverse_G(std::clamp(target, 0.0, phi_t));
  }

  double out_density(double x) const {
    if (ordering == Ordering::exchangeable) return dphi_abs / (mu * phi_t);
    return tilde(x) / mu;
  }

  // ∫_thr^x of the out-of-equilibrium density, exact.
  double out_cdf(double x) const {
    if (x <= thr) return 0.0;
    x = std::min(x, 1.0);
    if (ordering == Ordering::exchangeable) return (x - thr) * dphi_abs / (mu * phi_t);
    const double z = tilde(x);
    const double tie = atom_mass(z) * std::exp(-z * t);
    if (ordering == Ordering::decreasing) {
      const double above = dphi_abs - M1(z);
      return std::max(0.0, (above + z * (x - 1.0 + G(z))) / mu);
    }
    const double below = M1(z) - z * tie;
    const double knee = thr + G(z) - tie;
    return std::max(0.0, (below + z * (x - knee)) / mu);
  }

  // Places in (thr, 1) where ties at an atom start or end.
  std::vector<double> jumps() const {
    std::vector<double> out;
    if (ordering == Ordering::exchangeable) return out;
    for (const auto& a : atoms) {
      const double tie = a.mass * std::exp(-a.location * t);
      if (tie < 1e-15) continue;
      const double g = G(a.location);
      if (ordering == Ordering::decreasing) {
        out.push_back(1.0 - g);
        out.push_back(1.0 - g + tie);
      } else {
        out.push_back(thr + g - tie);
        out.push_back(thr + g);
      }
    }
    return out;
  }
};

}  // namespace detail

namespace {

using Shape = detail::OutShape;

std::vector<double> sorted_inside(std::vector<double> pts, double lo, double hi) {
  std::vector<double> out;
  for (double p : pts) {
    if (p > lo && p < hi) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Decreasing convex h on [0, ∞): inf{s : h(s) ≤ y} by bracketing and bisection.
template <class H>
double solve_decreasing(const H& h, double y) {
  double lo = 0.0;
  double hi = 1.0;
  while (h(hi) > y) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw EvaluationError("inversion bracket diverged");
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) <= y) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// (1/μ) ∫₀ᵗ h(1 − φ(s)) φ″(s) ds, the equilibrium piece written in s = φ⁻¹(1 − x).
// Heavy tails make φ″ blow up like a power at s = 0 and put visible mass below
// machine epsilon in x, so the head [0, min(t, 1)] goes through s = head·e^{−v}.
template <class H>
double equilibrium_integral(const PopularityLaw& law, double t, const H& h,
                            const numerics::QuadratureSpec& spec) {
  const double mu = checked_mean(law);
  const auto g = [&](double s) {
    const double d2 = law.d2laplace(s);
    return d2 == 0.0 ? 0.0 : d2 * h(1.0 - law.laplace(s));
  };
  const double head = std::min(t, 1.0);
  const auto mapped = [&](double v) {
    const double s = head * std::exp(-v);
    return s > 0.0 ? g(s) * s : 0.0;
  };
  double total = numerics::integrate_to_infinity(mapped, 0.0, spec);
  if (t > head) {
    total += std::isfinite(t) ? numerics::integrate(g, head, t, spec)
                              : numerics::integrate_to_infinity(g, head, spec);
  }
  return total / mu;
}

}  // namespace

double inverse_laplace(const PopularityLaw& law, double y) {
  if (y >= 1.0) return 0.0;
  const double p0 = law.zero_atom();
  if (!(y > p0)) throw OutOfRange("φ⁻¹ is only defined above P({0})");
  if (const auto* dirac = dynamic_cast<const DiracLaw*>(&law)) return -std::log(y) / dirac->mean();
  // Newton from the left never overshoots a convex decreasing function.
  double s = 0.0;
  for (int it = 0; it < 100; ++it) {
    const double f = law.laplace(s) - y;
    const double d = law.dlaplace(s);
    if (!(f > 0.0)) return s;
    if (!(d < 0.0) || !std::isfinite(d)) break;
    const double step = f / -d;
    s += step;
    if (step <= 1e-16 * std::max(1.0, s)) return s;
  }
  return solve_decreasing([&law](double v) { return law.laplace(v); }, y);
}

double stationary_density(const PopularityLaw& law, double x) {
  const double mu = checked_mean(law);
  if (x < 0.0 || x >= 1.0 - law.zero_atom()) return 0.0;
  const double s = inverse_laplace(law, 1.0 - x);
  const double d1 = law.dlaplace(s);
  if (d1 == 0.0) return 0.0;
  return -law.d2laplace(s) / (mu * d1);
}

double stationary_cdf(const PopularityLaw& law, double x) {
  const double mu = checked_mean(law);
  if (x <= 0.0) return 0.0;
  if (x >= 1.0 - law.zero_atom()) return 1.0;
  const double s = inverse_laplace(law, 1.0 - x);
  return std::clamp(1.0 + law.dlaplace(s) / mu, 0.0, 1.0);
}

double stationary_quantile(const PopularityLaw& law, double u) {
  const double mu = checked_mean(law);
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0 - law.zero_atom();
  const double s =
      solve_decreasing([&law](double v) { return -law.dlaplace(v); }, mu * (1.0 - u));
  return 1.0 - law.laplace(s);
}

double threshold(const PopularityLaw& law, double t) {
  if (t == kStationary) return 1.0 - law.zero_atom();
  return 1.0 - law.laplace(t);
}

double out_mass(const PopularityLaw& law, double t) {
  if (t == kStationary) return 0.0;
  return -law.dlaplace(t) / checked_mean(law);
}

double g_t(const PopularityLaw& law, Ordering ordering, double t, double y) {
  check_time(t);
  if (ordering == Ordering::exchangeable) {
    throw InvalidArgument("g_t is defined for monotone orderings only");
  }
  const double below = law.truncated_moment(0, t, y);
  return ordering == Ordering::decreasing ? below : std::max(0.0, law.laplace(t) - below);
}

double tilde_g_t(const PopularityLaw& law, Ordering ordering, double t, double x) {
  check_time(t);
  if (ordering == Ordering::exchangeable) {
    throw InvalidArgument("tilde_g_t is defined for monotone orderings only");
  }
  const Shape shape(law, ordering, t);
  if (x < shape.thr - 1e-12 || x > 1.0 + 1e-12) {
    throw OutOfRange("tilde_g_t needs x in [1 - φ(t), 1]");
  }
  return shape.tilde(x);
}

double transient_density(const PopularityLaw& law, Ordering ordering, double t, double x) {
  check_time(t);
  if (!std::isfinite(t)) throw InvalidArgument("use stationary_density for the stationary regime");
  if (x < 0.0 || x > 1.0) return 0.0;
  const double thr = 1.0 - law.laplace(t);
  if (x < thr) return stationary_density(law, x);
  return Shape(law, ordering, t).out_density(x);
}

double laplace_equilibrium_limit(const PopularityLaw& law, double t, double lambda) {
  if (!(t >= 0.0) || !(lambda >= 0.0)) throw InvalidArgument("need t >= 0 and lambda >= 0");
  checked_mean(law);
  if (t == 0.0) return 0.0;
  return equilibrium_integral(law, t, [lambda](double x) { return std::exp(-lambda * x); },
                              fine_spec());
}

double laplace_out_limit(const PopularityLaw& law, Ordering ordering, double t, double lambda) {
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
  if (t == kStationary) return 0.0;
  check_time(t);
  const Shape shape(law, ordering, t);
  const double phi = shape.phi_t;
  const double thr = shape.thr;
  if (ordering == Ordering::exchangeable) {
    const double a = lambda * phi;
    double ratio;
    if (lambda < 1e-6) {
      ratio = 1.0 - 0.5 * a + a * a / 6.0;
    } else {
      ratio = -std::expm1(-a) / a;
    }
    return shape.dphi_abs / shape.mu * std::exp(-lambda * thr) * ratio;
  }
  const bool dec = ordering == Ordering::decreasing;
  // Mass of the out-density located before weight z in x-order.
  const auto front = [&](double z) { return dec ? phi - shape.G(z) : shape.G(z); };
  double total = 0.0;
  if (law.has_continuous_part()) {
    const auto h = [&](double z) {
      return z * std::exp(-z * t) * std::exp(-lambda * (thr + front(z)));
    };
    total += law.integrate_continuous(h, 0.0, kInf, t);
  }
  for (const auto& a : shape.atoms) {
    const double tie = a.mass * std::exp(-a.location * t);
    const double ahead = dec ? front(a.location) : front(a.location) - tie;
    const double b = lambda * tie;
    const double spread = b < 1e-12 ? 1.0 - 0.5 * b : -std::expm1(-b) / b;
    total += a.location * tie * std::exp(-lambda * (thr + ahead)) * spread;
  }
  return total / shape.mu;
}

TvDistance tv_distance_to_stationary(const PopularityLaw& law, Ordering ordering, double t) {
  check_time(t);
  if (t == kStationary) return {0.0, 0.0};
  const Shape shape(law, ordering, t);
  const double bound = 2.0 * shape.dphi_abs / shape.mu;
  auto pts = shape.jumps();
  pts.push_back(1.0 - law.zero_atom());
  const auto breaks = sorted_inside(pts, shape.thr, 1.0);
  const auto f = [&](double x) {
    return std::abs(shape.out_density(x) - stationary_density(law, x));
  };
  const auto res = numerics::integrate_adaptive(f, shape.thr, 1.0, breaks, fine_spec());
  return {0.5 * res.value, bound};
}

double lru_fault_probability(const PopularityLaw& law, Ordering ordering, double t,
                             double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (t == kStationary) return 1.0 - stationary_cdf(law, delta);
  check_time(t);
  const Shape shape(law, ordering, t);
  if (delta < shape.thr) {
    const double eta = inverse_laplace(law, 1.0 - delta);
    return -law.dlaplace(eta) / shape.mu;
  }
  if (ordering == Ordering::exchangeable) {
    return (1.0 - delta) * shape.dphi_abs / (shape.mu * shape.phi_t);
  }
  const auto breaks = sorted_inside(shape.jumps(), delta, 1.0);
  return numerics::integrate([&](double x) { return shape.out_density(x); }, delta, 1.0, breaks,
                             fine_spec());
}

double pac_fault_probability(double alpha, double t, double delta) {
  if (!(alpha > -1.0 && alpha < 0.0)) throw InvalidArgument("alpha must lie in (-1, 0)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (!(t > 0.0)) throw InvalidArgument("t must be > 0");
  const ParetoLaw law(alpha);
  const double z = 1.0 + 1.0 / alpha;
  const double kappa = -(alpha + 1.0) / alpha;
  const double phi_t = std::isfinite(t) ? law.laplace(t) : 0.0;
  if (delta < 1.0 - phi_t) {
    const double eta = inverse_laplace(law, 1.0 - delta);
    return kappa * std::exp(-z * std::log(eta)) * numerics::upper_incomplete_gamma(z, eta);
  }
  const Shape shape(law, Ordering::decreasing, t);
  const double eps = shape.inverse_G(1.0 - delta);
  return kappa * std::exp(-z * std::log(t)) *
         (numerics::upper_incomplete_gamma(z, t) - numerics::upper_incomplete_gamma(z, t * eps));
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::size_t kTableCells = 4096;
}

SearchCostLaw::SearchCostLaw(LawPtr law, Ordering ordering, double t)
    : law_(std::move(law)), ordering_(ordering), t_(t) {
  if (!law_) throw InvalidArgument("missing popularity law");
  if (!(t > 0.0)) throw InvalidArgument("search-cost law needs t > 0 (or the stationary value)");
  mu_ = checked_mean(*law_);
  threshold_ = analytic::threshold(*law_, t_);
  out_mass_ = analytic::out_mass(*law_, t_);

  std::vector<double> pts{threshold_, 1.0 - law_->zero_atom()};
  if (!stationary()) {
    shape_ = std::make_shared<const detail::OutShape>(*law_, ordering_, t_);
    const auto jumps = shape_->jumps();
    pts.insert(pts.end(), jumps.begin(), jumps.end());
  }
  breakpoints_ = sorted_inside(pts, 0.0, 1.0);

  if (!stationary() && ordering_ != Ordering::exchangeable) {
    out_table_.resize(kTableCells + 1);
    for (std::size_t k = 0; k <= kTableCells; ++k) {
      const double x = threshold_ + (1.0 - threshold_) * static_cast<double>(k) / kTableCells;
      out_table_[k] = shape_->out_cdf(x);
    }
    for (std::size_t k = 1; k <= kTableCells; ++k) {
      out_table_[k] = std::max(out_table_[k], out_table_[k - 1]);
    }
  }

  // Integrate φ″ and the out density: catches laws whose φ, φ′, φ″ disagree.
  const numerics::QuadratureSpec spec{1e-10, 1e-9, 60};
  const auto f = [this](double x) { return density(x); };
  std::vector<double> above;
  for (double b : breakpoints_) {
    if (b > threshold_) above.push_back(b);
  }
  const double eq =
      threshold_ > 0.0 ? equilibrium_integral(*law_, t_, [](double) { return 1.0; }, spec) : 0.0;
  const double out =
      threshold_ < 1.0 ? numerics::integrate_adaptive(f, threshold_, 1.0, above, spec).value : 0.0;
  if (std::abs(eq + out - 1.0) > 1e-6 || std::abs(out - out_mass_) > 1e-6) {
    throw ConstructionError("search-cost density of " + law_->name() +
                            " fails normalization: total " + std::to_string(eq + out) +
                            ", out mass " + std::to_string(out) + " vs " +
                            std::to_string(out_mass_));
  }
}

double SearchCostLaw::density(double x) const {
  if (x < 0.0 || x > 1.0) return 0.0;
  if (x < threshold_) return stationary_density(*law_, x);
  if (stationary()) return 0.0;
  if (ordering_ == Ordering::exchangeable) return out_mass_ / (1.0 - threshold_);
  return shape_->tilde(x) / mu_;
}

double SearchCostLaw::out_cdf(double x) const { return shape_->out_cdf(x); }

double SearchCostLaw::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x < threshold_) return std::min(stationary_cdf(*law_, x), 1.0 - out_mass_);
  if (stationary()) return 1.0;
  if (ordering_ == Ordering::exchangeable) {
    return 1.0 - out_mass_ + out_mass_ * (x - threshold_) / (1.0 - threshold_);
  }
  return std::min(1.0, 1.0 - out_mass_ + out_cdf(x));
}

double SearchCostLaw::sample_out(double u) const {
  const double span = 1.0 - threshold_;
  if (ordering_ == Ordering::exchangeable) return threshold_ + u * span;
  const double target = u * out_table_.back();
  auto it = std::lower_bound(out_table_.begin(), out_table_.end(), target);
  if (it == out_table_.begin()) return threshold_;
  if (it == out_table_.end()) return 1.0;
  const auto k = static_cast<std::size_t>(it - out_table_.begin());
  const double lo = out_table_[k - 1];
  const double hi = out_table_[k];
  const double frac = hi > lo ? (target - lo) / (hi - lo) : 0.0;
  return threshold_ + span * (static_cast<double>(k - 1) + frac) / kTableCells;
}

double SearchCostLaw::sample(Rng& rng) const {
  const double u = rng.uniform();
  if (stationary() || u <= 1.0 - out_mass_) {
    return std::min(stationary_quantile(*law_, u), stationary() ? 1.0 : threshold_);
  }
  return sample_out(rng.uniform());
}

double SearchCostLaw::laplace(double lambda) const {
  const auto h = [lambda](double x) { return std::exp(-lambda * x); };
  const double eq = threshold_ > 0.0 ? equilibrium_integral(*law_, t_, h, fine_spec()) : 0.0;
  if (stationary() || threshold_ >= 1.0) return eq;
  std::vector<double> above;
  for (double b : breakpoints_) {
    if (b > threshold_) above.push_back(b);
  }
  const auto f = [&](double x) { return h(x) * density(x); };
  return eq + numerics::integrate_adaptive(f, threshold_, 1.0, above, fine_spec()).value;
}

SearchCostLaw transient_law(const LawPtr& law, Ordering ordering, double t) {
  if (!std::isfinite(t)) throw InvalidArgument("use stationary_law for the stationary regime");
  return SearchCostLaw(law, ordering, t);
}

SearchCostLaw stationary_law(const LawPtr& law) {
  return SearchCostLaw(law, Ordering::exchangeable, kStationary);
}

SampleBatch sample_limiting(const SearchCostLaw& law, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw InvalidArgument("count must be >= 1");
  SampleBatch batch;
  batch.values.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng(seed, k);
    batch.values[k] = law.sample(rng);
  }
  batch.normalized = true;
  batch.profile_descriptor =
      "limit:" + law.law().name() + ":" + std::string(to_string(law.ordering()));
  batch.t_scaled = law.t();
  batch.t_unit_rate = law.t();
  batch.seed = seed;
  batch.count = count;
  return batch;
}

}  // namespace mtf::analytic
