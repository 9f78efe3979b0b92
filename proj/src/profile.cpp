#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numeric>

#include "mtf/errors.hpp"
#include "mtf/popularity.hpp"

namespace mtf {

namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void check_order(std::span<const double> w, Ordering ordering) {
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (ordering == Ordering::decreasing && w[i] > w[i - 1]) {
      throw InvalidArgument("decreasing profile has w[" + std::to_string(i + 1) + "] > w[" +
                            std::to_string(i) + "]");
    }
    if (ordering == Ordering::increasing && w[i] < w[i - 1]) {
      throw InvalidArgument("increasing profile has w[" + std::to_string(i + 1) + "] < w[" +
                            std::to_string(i) + "]");
    }
  }
}

}  // namespace

RequestProfile::RequestProfile(std::vector<double> weights, Ordering ordering, double scale,
                               std::uint64_t seed, std::string family, LawPtr limit_law)
    : weights_(std::move(weights)),
      ordering_(ordering),
      scale_(scale),
      seed_(seed),
      family_(std::move(family)),
      limit_law_(std::move(limit_law)) {
  if (weights_.empty()) throw SizeError("a request profile needs n >= 1 items");
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) throw InvalidArgument("scale must be > 0");
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("weights must be finite and nonnegative");
    }
  }
  check_order(weights_, ordering_);
  total_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (!(total_ > 0.0)) throw DegenerateLaw("all weights are zero");
  popularities_.resize(weights_.size());
  for (std::size_t i = 0; i < weights_.size(); ++i) popularities_[i] = weights_[i] / total_;
}

std::vector<double> draw_iid_weights(const PopularityLaw& law, std::size_t n, Ordering ordering,
                                     Rng& rng, std::size_t* resamples) {
  if (n == 0) throw SizeError("n must be >= 1");
  constexpr std::size_t kMaxAttempts = 100000;
  std::vector<double> w(n);
  std::size_t rejected = 0;
  for (;;) {
    bool any = false;
    for (auto& x : w) {
      x = law.sample(rng);
      any = any || x > 0.0;
    }
    if (any) break;
    if (++rejected >= kMaxAttempts) throw DegenerateLaw("could not draw a nonzero weight vector");
  }
  if (ordering == Ordering::decreasing) {
    std::stable_sort(w.begin(), w.end(), std::greater<>());
  } else if (ordering == Ordering::increasing) {
    std::stable_sort(w.begin(), w.end());
  }
  if (resamples) *resamples = rejected;
  return w;
}

RequestProfile make_iid_profile(const LawPtr& law, std::size_t n, Ordering ordering,
                                std::uint64_t seed) {
  if (!law) throw InvalidArgument("missing law");
  if (law->zero_atom() >= 1.0) throw DegenerateLaw("law is concentrated at 0");
  Rng rng(seed, 0);
  std::size_t rejected = 0;
  auto w = draw_iid_weights(*law, n, ordering, rng, &rejected);
  RequestProfile profile(std::move(w), ordering, 1.0, seed, law->name(), law);
  profile.set_resample_count(rejected);
  return profile;
}

LawPtr zipf_limit_law(double alpha) {
  if (!(alpha > -1.0) || !std::isfinite(alpha)) {
    throw OutOfRange("zipf exponent must exceed -1 for a nondegenerate limit");
  }
  if (alpha < 0.0) return std::make_shared<ParetoLaw>(alpha);
  if (alpha == 0.0) return std::make_shared<DiracLaw>(1.0);
  return std::make_shared<BetaLaw>(1.0 / alpha, 1.0);
}

RequestProfile make_zipf_profile(double alpha, std::size_t n) {
  if (n == 0) throw SizeError("n must be >= 1");
  auto law = zipf_limit_law(alpha);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(static_cast<double>(i + 1), alpha);
  const Ordering ordering = alpha < 0.0   ? Ordering::decreasing
                            : alpha > 0.0 ? Ordering::increasing
                                          : Ordering::exchangeable;
  const double scale = std::pow(static_cast<double>(n), -alpha);
  return RequestProfile(std::move(w), ordering, scale, 0, "zipf(" + num(alpha) + ")",
                        std::move(law));
}

RequestProfile make_density_increment_profile(const numerics::RealFn& q, double c, std::size_t n,
                                              std::string label) {
  if (n == 0) throw SizeError("n must be >= 1");
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("c must be > 0");
  constexpr int kGrid = 1024;
  bool nonincreasing = true;
  bool nondecreasing = true;
  bool constant = true;
  const double q0 = q(0.0);
  double prev = q0;
  for (int i = 1; i <= kGrid; ++i) {
    const double v = q(c * i / kGrid);
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("density must be finite and >= 0");
    if (v > prev) nonincreasing = false;
    if (v < prev) nondecreasing = false;
    if (v != q0) constant = false;
    prev = v;
  }
  if (!nonincreasing && !nondecreasing) {
    throw InvalidArgument("density increments need a monotone density");
  }
  const numerics::QuadratureSpec spec{1e-14, 1e-12, 60};
  const double mass = numerics::integrate(q, 0.0, c, spec);
  if (std::abs(mass - 1.0) > 1e-6) {
    throw InvalidArgument("density must integrate to 1 on [0, c], got " + num(mass));
  }

  std::vector<double> w(n);
  LawPtr law;
  Ordering ordering;
  if (constant) {
    std::fill(w.begin(), w.end(), q0 * c / static_cast<double>(n));
    law = std::make_shared<DiracLaw>(q0);
    ordering = Ordering::exchangeable;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = c * static_cast<double>(i) / static_cast<double>(n);
      const double b = c * static_cast<double>(i + 1) / static_cast<double>(n);
      w[i] = std::max(0.0, numerics::integrate(q, a, b, spec));
    }
    ordering = nonincreasing ? Ordering::decreasing : Ordering::increasing;
    // Quadrature noise must not break the ordering invariant.
    for (std::size_t i = 1; i < n; ++i) {
      w[i] = nonincreasing ? std::min(w[i], w[i - 1]) : std::max(w[i], w[i - 1]);
    }
    law = std::make_shared<PushforwardLaw>(q, c, label);
  }
  return RequestProfile(std::move(w), ordering, static_cast<double>(n) / c, 0, std::move(label),
                        std::move(law));
}

// ---------------------------------------------------------------------------

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) {
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.mass >= 0.0) || !std::isfinite(a.location)) {
      throw InvalidArgument("discrete measure needs finite locations and masses >= 0");
    }
    total += a.mass;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("discrete measure must have mass 1");
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& x, const Atom& y) { return x.location < y.location; });
  for (const auto& a : atoms) {
    if (!atoms_.empty() && atoms_.back().location == a.location) {
      atoms_.back().mass += a.mass;
    } else {
      atoms_.push_back(a);
    }
  }
}

double DiscreteMeasure::mean() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.location * a.mass;
  return m;
}

double DiscreteMeasure::quantile(double u) const {
  double acc = 0.0;
  for (const auto& a : atoms_) {
    acc += a.mass;
    if (acc >= u) return a.location;
  }
  return atoms_.back().location;
}

DiscreteMeasure empirical_measure(const RequestProfile& profile, double mu) {
  const double n = static_cast<double>(profile.n());
  std::vector<Atom> atoms;
  atoms.reserve(profile.n());
  for (double p : profile.popularities()) atoms.push_back({n * mu * p, 1.0 / n});
  return DiscreteMeasure(std::move(atoms));
}

double wasserstein1(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  // ∫ |F_a − F_b| dx over the merged support.
  const auto xa = a.atoms();
  const auto xb = b.atoms();
  std::size_t i = 0;
  std::size_t j = 0;
  double fa = 0.0;
  double fb = 0.0;
  double total = 0.0;
  double prev = 0.0;
  bool started = false;
  while (i < xa.size() || j < xb.size()) {
    double x;
    if (j >= xb.size() || (i < xa.size() && xa[i].location <= xb[j].location)) {
      x = xa[i].location;
    } else {
      x = xb[j].location;
    }
    if (started) total += std::abs(fa - fb) * (x - prev);
    while (i < xa.size() && xa[i].location == x) fa += xa[i++].mass;
    while (j < xb.size() && xb[j].location == x) fb += xb[j++].mass;
    prev = x;
    started = true;
  }
  return total;
}

double wasserstein1(const DiscreteMeasure& a, const PopularityLaw& b, std::size_t grid) {
  if (grid == 0) throw InvalidArgument("grid must be >= 1");
  if (!std::isfinite(b.mean())) throw InvalidArgument("W1 needs a law with finite mean");
  const auto atoms = a.atoms();
  std::size_t idx = 0;
  double acc = atoms[0].mass;
  double total = 0.0;
  for (std::size_t k = 0; k < grid; ++k) {
    const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(grid);
    while (acc < u && idx + 1 < atoms.size()) acc += atoms[++idx].mass;
    total += std::abs(atoms[idx].location - b.quantile(u));
  }
  return total / static_cast<double>(grid);
}

}  // namespace mtf
