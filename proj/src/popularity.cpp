#include "mtf/popularity.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <charconv>
#include <cmath>
#include <random>

#include "mtf/errors.hpp"

namespace mtf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string_view to_string(Ordering o) {
  switch (o) {
    case Ordering::exchangeable:
      return "exchangeable";
    case Ordering::decreasing:
      return "decreasing";
    case Ordering::increasing:
      return "increasing";
  }
  return "exchangeable";
}

Ordering parse_ordering(std::string_view s) {
  if (s == "ex" || s == "exchangeable") return Ordering::exchangeable;
  if (s == "dec" || s == "decreasing") return Ordering::decreasing;
  if (s == "inc" || s == "increasing") return Ordering::increasing;
  throw InvalidArgument("unknown ordering '" + std::string(s) + "' (expected ex, dec or inc)");
}

// ---------------------------------------------------------------------------
// PopularityLaw defaults

double PopularityLaw::integrate_continuous(const numerics::RealFn& h, double lo, double hi,
                                           double decay_rate) const {
  lo = std::max(lo, support_lower());
  hi = std::min(hi, support_upper());
  if (!(hi > lo)) return 0.0;
  const auto f = [&](double x) {
    const double d = density(x);
    return d == 0.0 ? 0.0 : h(x) * d;
  };
  const auto spec = quadrature();
  if (decay_rate > 0.0) return numerics::integrate_exponential_map(f, lo, hi, decay_rate, spec);
  if (std::isfinite(hi)) return numerics::integrate(f, lo, hi, spec);
  return numerics::integrate_to_infinity(f, lo, spec);
}

double PopularityLaw::integrate(const numerics::RealFn& h, const WeightRange& range,
                                double decay_rate) const {
  double total = 0.0;
  if (has_continuous_part()) total += integrate_continuous(h, range.lo, range.hi, decay_rate);
  for (const auto& atom : atoms()) {
    if (range.contains(atom.location)) total += atom.mass * h(atom.location);
  }
  return total;
}

double PopularityLaw::truncated_moment(int k, double t, double y) const {
  if (y < 0.0) return 0.0;
  const auto h = [k, t](double z) { return std::pow(z, k) * std::exp(-t * z); };
  return integrate(h, WeightRange::closed(0.0, y), t);
}

double PopularityLaw::laplace(double s) const {
  return integrate([s](double x) { return std::exp(-s * x); }, WeightRange::all(), s);
}

double PopularityLaw::dlaplace(double s) const {
  return -integrate([s](double x) { return x * std::exp(-s * x); }, WeightRange::all(), s);
}

double PopularityLaw::d2laplace(double s) const {
  return integrate([s](double x) { return x * x * std::exp(-s * x); }, WeightRange::all(), s);
}

double PopularityLaw::cdf(double x) const {
  if (x < 0.0) return 0.0;
  return std::min(1.0, integrate([](double) { return 1.0; }, WeightRange::closed(0.0, x)));
}

double PopularityLaw::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  const double lo = support_lower();
  double hi = support_upper();
  if (!std::isfinite(hi)) {
    hi = std::max(1.0, 2.0 * lo);
    while (cdf(hi) < u && hi < 1e300) hi *= 2.0;
  }
  return numerics::invert_monotone([this](double x) { return cdf(x); }, u, lo, hi,
                                   1e-14 * std::max(1.0, hi));
}

double PopularityLaw::zero_atom() const {
  double m = 0.0;
  for (const auto& a : atoms()) {
    if (a.location == 0.0) m += a.mass;
  }
  return m;
}

double PopularityLaw::weight_cap() const {
  const double hi = support_upper();
  if (std::isfinite(hi)) return hi;
  return quantile(1.0 - 1e-12);
}

// ---------------------------------------------------------------------------
// Dirac

DiracLaw::DiracLaw(double c) : c_(c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DegenerateLaw("dirac law needs a location c > 0");
}
std::string DiracLaw::name() const { return "dirac(" + num(c_) + ")"; }
double DiracLaw::laplace(double s) const { return std::exp(-c_ * s); }
double DiracLaw::dlaplace(double s) const { return -c_ * std::exp(-c_ * s); }
double DiracLaw::d2laplace(double s) const { return c_ * c_ * std::exp(-c_ * s); }
double DiracLaw::truncated_moment(int k, double t, double y) const {
  return y >= c_ ? std::pow(c_, k) * std::exp(-c_ * t) : 0.0;
}

// ---------------------------------------------------------------------------
// Bernoulli

BernoulliLaw::BernoulliLaw(double p) : p_(p) {
  if (!(p > 0.0 && p <= 1.0)) throw DegenerateLaw("bernoulli law needs p in (0, 1]");
}
std::string BernoulliLaw::name() const { return "bernoulli(" + num(p_) + ")"; }
double BernoulliLaw::laplace(double s) const { return 1.0 - p_ + p_ * std::exp(-s); }
double BernoulliLaw::dlaplace(double s) const { return -p_ * std::exp(-s); }
double BernoulliLaw::d2laplace(double s) const { return p_ * std::exp(-s); }
double BernoulliLaw::cdf(double x) const {
  if (x < 0.0) return 0.0;
  return x < 1.0 ? 1.0 - p_ : 1.0;
}
double BernoulliLaw::quantile(double u) const { return u <= 1.0 - p_ ? 0.0 : 1.0; }
std::vector<Atom> BernoulliLaw::atoms() const {
  if (p_ >= 1.0) return {{1.0, 1.0}};
  return {{0.0, 1.0 - p_}, {1.0, p_}};
}

// ---------------------------------------------------------------------------
// Gamma

GammaLaw::GammaLaw(double shape) : shape_(shape), log_norm_(std::lgamma(shape)) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw DegenerateLaw("gamma law needs shape > 0");
}
std::string GammaLaw::name() const {
  return shape_ == 1.0 ? std::string("exp(1)") : "gamma(" + num(shape_) + ")";
}
double GammaLaw::laplace(double s) const { return std::pow(1.0 + s, -shape_); }
double GammaLaw::dlaplace(double s) const { return -shape_ * std::pow(1.0 + s, -shape_ - 1.0); }
double GammaLaw::d2laplace(double s) const {
  return shape_ * (shape_ + 1.0) * std::pow(1.0 + s, -shape_ - 2.0);
}
double GammaLaw::cdf(double x) const {
  return x <= 0.0 ? 0.0 : numerics::regularized_lower_gamma(shape_, x);
}
double GammaLaw::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  if (u == 0.0) return 0.0;
  if (shape_ == 1.0) return -std::log1p(-u);
  return PopularityLaw::quantile(u);
}
double GammaLaw::truncated_moment(int k, double t, double y) const {
  if (y <= 0.0) return 0.0;
  const double z = shape_ + k;
  const double ratio = std::exp(std::lgamma(z) - log_norm_);
  const double full = ratio * std::pow(1.0 + t, -z);
  if (std::isinf(y)) return full;
  return full * numerics::regularized_lower_gamma(z, y * (1.0 + t));
}
double GammaLaw::sample(Rng& rng) const {
  if (shape_ == 1.0) return rng.exponential(1.0);
  std::gamma_distribution<double> dist(shape_, 1.0);
  return dist(rng.engine());
}
double GammaLaw::density(double x) const {
  if (x <= 0.0) return 0.0;
  return std::exp((shape_ - 1.0) * std::log(x) - x - log_norm_);
}

// ---------------------------------------------------------------------------
// Geometric on {0, 1, ...}

GeometricLaw::GeometricLaw(double p) : p_(p) {
  if (!(p > 0.0 && p < 1.0)) throw DegenerateLaw("geometric law needs p in (0, 1)");
}
std::string GeometricLaw::name() const { return "geometric(" + num(p_) + ")"; }
double GeometricLaw::laplace(double s) const {
  const double r = (1.0 - p_) * std::exp(-s);
  return p_ / (1.0 - r);
}
double GeometricLaw::dlaplace(double s) const {
  const double r = (1.0 - p_) * std::exp(-s);
  return -p_ * r / ((1.0 - r) * (1.0 - r));
}
double GeometricLaw::d2laplace(double s) const {
  const double r = (1.0 - p_) * std::exp(-s);
  return p_ * r * (1.0 + r) / ((1.0 - r) * (1.0 - r) * (1.0 - r));
}
double GeometricLaw::cdf(double x) const {
  if (x < 0.0) return 0.0;
  return -std::expm1((std::floor(x) + 1.0) * std::log1p(-p_));
}
double GeometricLaw::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  if (u >= 1.0) return kInf;
  double k = std::max(0.0, std::ceil(std::log1p(-u) / std::log1p(-p_)) - 1.0);
  while (k > 0.0 && cdf(k - 1.0) >= u) k -= 1.0;
  while (cdf(k) < u) k += 1.0;
  return k;
}
std::vector<Atom> GeometricLaw::atoms() const {
  std::vector<Atom> out;
  double mass = p_;
  for (int k = 0; k < 100000 && mass > 1e-18; ++k) {
    out.push_back({static_cast<double>(k), mass});
    mass *= 1.0 - p_;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pareto

ParetoLaw::ParetoLaw(double alpha) : alpha_(alpha) {
  if (!(alpha > -1.0 && alpha < 0.0)) throw InvalidArgument("pareto law needs alpha in (-1, 0)");
}
std::string ParetoLaw::name() const { return "pareto(" + num(alpha_) + ")"; }
namespace {

// s^{−z} Γ(z, s) = ∫₁^∞ x^{z−1} e^{−sx} dx. For s < 1 and z < 0 the direct product
// is 0·∞ near s = 0, so climb E_z = (s E_{z+1} − e^{−s}) / z from z + m ∈ [0, 1).
double scaled_upper_gamma(double z, double s) {
  if (s >= 1.0 || z >= 0.0) return std::exp(-z * std::log(s)) * numerics::upper_incomplete_gamma(z, s);
  const int m = static_cast<int>(std::ceil(-z));
  double top = z + m;
  double e = std::exp(-top * std::log(s)) * numerics::upper_incomplete_gamma(top, s);
  for (int j = 0; j < m; ++j) {
    top -= 1.0;
    e = (s * e - std::exp(-s)) / top;
  }
  return e;
}

}  // namespace

double ParetoLaw::moment_transform(int k, double s) const {
  const double z = k + 1.0 / alpha_;
  const double w = -1.0 / alpha_;
  if (s == 0.0) return z < 0.0 ? w / (-z) : kInf;
  return w * scaled_upper_gamma(z, s);
}
double ParetoLaw::truncated_moment(int k, double t, double y) const {
  if (y <= 1.0) return 0.0;
  if (std::isinf(y)) return moment_transform(k, t);
  const double z = k + 1.0 / alpha_;
  const double w = -1.0 / alpha_;
  if (t == 0.0) {
    return z == 0.0 ? w * std::log(y) : w * std::expm1(z * std::log(y)) / z;
  }
  return w * (scaled_upper_gamma(z, t) - std::exp(z * std::log(y)) * scaled_upper_gamma(z, y * t));
}
double ParetoLaw::laplace(double s) const { return moment_transform(0, s); }
double ParetoLaw::dlaplace(double s) const { return -moment_transform(1, s); }
double ParetoLaw::d2laplace(double s) const { return moment_transform(2, s); }
double ParetoLaw::cdf(double x) const {
  return x < 1.0 ? 0.0 : -std::expm1(std::log(x) / alpha_);
}
double ParetoLaw::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  if (u >= 1.0) return kInf;
  return std::exp(alpha_ * std::log1p(-u));
}
double ParetoLaw::density(double x) const {
  if (x < 1.0) return 0.0;
  return std::exp((1.0 / alpha_ - 1.0) * std::log(x)) / (-alpha_);
}

// ---------------------------------------------------------------------------
// Beta

BetaLaw::BetaLaw(double a, double b)
    : a_(a), b_(b), log_norm_(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)) {
  if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("beta law needs a > 0 and b > 0");
  if (b == std::floor(b) && b <= 8.0) expand_terms_ = static_cast<int>(b);
}
std::string BetaLaw::name() const { return "beta(" + num(a_) + "," + num(b_) + ")"; }
double BetaLaw::truncated_moment(int k, double t, double y) const {
  if (y <= 0.0) return 0.0;
  if (!expandable()) return PopularityLaw::truncated_moment(k, t, y);
  y = std::min(y, 1.0);
  // ∫₀^y z^{c−1} e^{−zt} dz = y^c M(yt; c) / c with c = a + j + k.
  double total = 0.0;
  double binom = 1.0;
  for (int j = 0; j < expand_terms_; ++j) {
    const double c = a_ + j + k;
    const double term = std::exp(c * std::log(y)) * numerics::scaled_lower_gamma(c, y * t) / c;
    total += (j % 2 == 0 ? 1.0 : -1.0) * binom * term;
    binom = binom * (expand_terms_ - 1 - j) / (j + 1);
  }
  return total * std::exp(-log_norm_);
}
double BetaLaw::laplace(double s) const {
  return expandable() ? truncated_moment(0, s, 1.0) : PopularityLaw::laplace(s);
}
double BetaLaw::dlaplace(double s) const {
  return expandable() ? -truncated_moment(1, s, 1.0) : PopularityLaw::dlaplace(s);
}
double BetaLaw::d2laplace(double s) const {
  return expandable() ? truncated_moment(2, s, 1.0) : PopularityLaw::d2laplace(s);
}
double BetaLaw::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a_, b_, x);
}
double BetaLaw::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;
  return boost::math::ibeta_inv(a_, b_, u);
}
double BetaLaw::sample(Rng& rng) const {
  if (b_ == 1.0) return std::pow(rng.uniform(), 1.0 / a_);
  if (a_ == 1.0) return 1.0 - std::pow(rng.uniform(), 1.0 / b_);
  std::gamma_distribution<double> ga(a_, 1.0);
  std::gamma_distribution<double> gb(b_, 1.0);
  const double x = ga(rng.engine());
  const double y = gb(rng.engine());
  return x / (x + y);
}
double BetaLaw::density(double x) const {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::exp((a_ - 1.0) * std::log(x) + (b_ - 1.0) * std::log1p(-x) - log_norm_);
}

// ---------------------------------------------------------------------------
// Push-forward of uniform positions by a density

PushforwardLaw::PushforwardLaw(numerics::RealFn q, double c, std::string label)
    : q_(std::move(q)), c_(c), label_(std::move(label)) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("push-forward law needs c > 0");
  constexpr int kGrid = 1024;
  bool inc = true;
  bool dec = true;
  double prev = q_(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = q_(c_ * i / kGrid);
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("density must be finite and >= 0");
    if (!(v > prev)) inc = false;
    if (!(v < prev)) dec = false;
    prev = v;
  }
  if (!inc && !dec) {
    throw InvalidArgument("push-forward law needs a strictly monotone density on [0, c]");
  }
  decreasing_ = dec;
  qmin_ = std::min(q_(0.0), q_(c_));
  qmax_ = std::max(q_(0.0), q_(c_));
}

double PushforwardLaw::position_of(double y) const {
  const double tol = 1e-15 * c_;
  if (decreasing_) {
    if (y >= qmax_) return 0.0;
    if (y <= qmin_) return c_;
    return numerics::invert_monotone([this](double x) { return -q_(x); }, -y, 0.0, c_, tol);
  }
  if (y <= qmin_) return 0.0;
  if (y >= qmax_) return c_;
  return numerics::invert_monotone(q_, y, 0.0, c_, tol);
}

double PushforwardLaw::positional(const numerics::RealFn& h) const {
  return numerics::integrate([&](double x) { return h(q_(x)); }, 0.0, c_, quadrature()) / c_;
}

double PushforwardLaw::integrate_continuous(const numerics::RealFn& h, double lo, double hi,
                                            double) const {
  lo = std::max(lo, qmin_);
  hi = std::min(hi, qmax_);
  if (!(hi >= lo)) return 0.0;
  double a = position_of(lo);
  double b = position_of(hi);
  if (a > b) std::swap(a, b);
  if (!(b > a)) return 0.0;
  return numerics::integrate([&](double x) { return h(q_(x)); }, a, b, quadrature()) / c_;
}

double PushforwardLaw::laplace(double s) const {
  return positional([s](double y) { return std::exp(-s * y); });
}
double PushforwardLaw::dlaplace(double s) const {
  return -positional([s](double y) { return y * std::exp(-s * y); });
}
double PushforwardLaw::d2laplace(double s) const {
  return positional([s](double y) { return y * y * std::exp(-s * y); });
}
double PushforwardLaw::cdf(double y) const {
  if (y < qmin_) return 0.0;
  if (y >= qmax_) return 1.0;
  const double x = position_of(y);
  return decreasing_ ? (c_ - x) / c_ : x / c_;
}
double PushforwardLaw::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  return decreasing_ ? q_(c_ * (1.0 - u)) : q_(c_ * u);
}

// ---------------------------------------------------------------------------
// Size-biased picking

SizeBiasedLaw::SizeBiasedLaw(LawPtr base) : base_(std::move(base)) {
  if (!base_) throw InvalidArgument("size-biased law needs a base law");
  base_mean_ = base_->mean();
  if (!(base_mean_ > 0.0) || !std::isfinite(base_mean_)) {
    throw DegenerateLaw("size-biased picking needs a base mean in (0, inf)");
  }
  mean_ = base_->d2laplace(0.0) / base_mean_;
}
std::string SizeBiasedLaw::name() const { return "sizebiased(" + base_->name() + ")"; }
double SizeBiasedLaw::laplace(double s) const { return -base_->dlaplace(s) / base_mean_; }
double SizeBiasedLaw::dlaplace(double s) const { return -base_->d2laplace(s) / base_mean_; }
double SizeBiasedLaw::d2laplace(double s) const {
  return base_->integrate([s](double y) { return y * y * y * std::exp(-s * y); },
                          WeightRange::all(), s) /
         base_mean_;
}
double SizeBiasedLaw::cdf(double x) const {
  if (x < 0.0) return 0.0;
  return std::min(1.0, base_->integrate([](double y) { return y; }, WeightRange::closed(0.0, x)) /
                           base_mean_);
}
double SizeBiasedLaw::density(double x) const { return x * base_->density(x) / base_mean_; }
std::vector<Atom> SizeBiasedLaw::atoms() const {
  std::vector<Atom> out;
  for (const auto& a : base_->atoms()) {
    if (a.location > 0.0) out.push_back({a.location, a.location * a.mass / base_mean_});
  }
  return out;
}
double SizeBiasedLaw::integrate_continuous(const numerics::RealFn& h, double lo, double hi,
                                           double decay_rate) const {
  return base_->integrate_continuous([&](double y) { return y * h(y); }, lo, hi, decay_rate) /
         base_mean_;
}

LawPtr size_biased(const LawPtr& law) {
  if (auto dirac = std::dynamic_pointer_cast<const DiracLaw>(law)) return dirac;
  return std::make_shared<SizeBiasedLaw>(law);
}

// ---------------------------------------------------------------------------
// Descriptor parsing

namespace {

struct Descriptor {
  std::string head;
  std::vector<double> args;
};

Descriptor parse_descriptor(std::string_view text) {
  Descriptor d;
  const auto open = text.find('(');
  std::string_view head = text.substr(0, open);
  for (char ch : head) {
    if (ch != ' ') d.head.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (open == std::string_view::npos) return d;
  const auto close = text.rfind(')');
  if (close == std::string_view::npos || close < open) {
    throw InvalidArgument("malformed family descriptor '" + std::string(text) + "'");
  }
  std::string_view inner = text.substr(open + 1, close - open - 1);
  while (!inner.empty()) {
    const auto comma = inner.find(',');
    std::string token(inner.substr(0, comma));
    token.erase(std::remove(token.begin(), token.end(), ' '), token.end());
    if (!token.empty()) {
      double v = 0.0;
      auto res = std::from_chars(token.data(), token.data() + token.size(), v);
      if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        throw InvalidArgument("bad numeric parameter '" + token + "'");
      }
      d.args.push_back(v);
    }
    if (comma == std::string_view::npos) break;
    inner.remove_prefix(comma + 1);
  }
  return d;
}

double arg(const Descriptor& d, std::size_t i, double fallback) {
  return i < d.args.size() ? d.args[i] : fallback;
}

void expect_args(const Descriptor& d, std::size_t lo, std::size_t hi) {
  if (d.args.size() < lo || d.args.size() > hi) {
    throw InvalidArgument("wrong number of parameters for family '" + d.head + "'");
  }
}

}  // namespace

LawPtr make_law(std::string_view descriptor) {
  const auto d = parse_descriptor(descriptor);
  if (d.head == "dirac") {
    expect_args(d, 0, 1);
    return std::make_shared<DiracLaw>(arg(d, 0, 1.0));
  }
  if (d.head == "bernoulli") {
    expect_args(d, 1, 1);
    return std::make_shared<BernoulliLaw>(d.args[0]);
  }
  if (d.head == "exp" || d.head == "exponential") {
    expect_args(d, 0, 1);
    if (arg(d, 0, 1.0) != 1.0) {
      throw InvalidArgument("exp family is unit-rate; weights are defined up to scale");
    }
    return std::make_shared<GammaLaw>(1.0);
  }
  if (d.head == "gamma") {
    expect_args(d, 1, 1);
    return std::make_shared<GammaLaw>(d.args[0]);
  }
  if (d.head == "geometric") {
    expect_args(d, 1, 1);
    return std::make_shared<GeometricLaw>(d.args[0]);
  }
  if (d.head == "pareto") {
    expect_args(d, 1, 1);
    return std::make_shared<ParetoLaw>(d.args[0]);
  }
  if (d.head == "beta") {
    expect_args(d, 2, 2);
    return std::make_shared<BetaLaw>(d.args[0], d.args[1]);
  }
  if (d.head == "linear") {
    expect_args(d, 0, 1);
    const double c = arg(d, 0, 1.0);
    if (!(c > 0.0)) throw InvalidArgument("linear family needs c > 0");
    return std::make_shared<PushforwardLaw>(
        [c](double x) { return 2.0 * (c - x) / (c * c); }, c, "linear(" + num(c) + ")");
  }
  if (d.head == "uniform") {
    expect_args(d, 0, 1);
    const double c = arg(d, 0, 1.0);
    if (!(c > 0.0)) throw InvalidArgument("uniform family needs c > 0");
    return std::make_shared<DiracLaw>(1.0 / c);
  }
  throw InvalidArgument("unknown law family '" + std::string(descriptor) + "'");
}

}  // namespace mtf
