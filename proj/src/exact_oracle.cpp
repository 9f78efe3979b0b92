#include "mtf/exact_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtf/errors.hpp"

namespace mtf::exact {

namespace {

// Convolves one Bernoulli(q) into pmf, which currently covers `used` trials.
void add_trial(std::vector<double>& pmf, std::size_t used, double q) {
  pmf[used + 1] = pmf[used] * q;
  for (std::size_t k = used; k > 0; --k) pmf[k] = pmf[k] * (1.0 - q) + pmf[k - 1] * q;
  pmf[0] *= 1.0 - q;
}

void check_cap(const RequestProfile& profile, std::size_t cap) {
  if (profile.n() > cap) {
    throw SizeError("exact law requested for n = " + std::to_string(profile.n()) +
                    " above the cap " + std::to_string(cap) + "; use the Monte-Carlo samplers");
  }
}

void check_item(const RequestProfile& profile, std::size_t i) {
  if (i < 1 || i > profile.n()) throw OutOfRange("item index must lie in [1, n]");
}

// Law of the number of requested items among all j ≠ skip, each requested
// within the last u time units with probability 1 − e^{−p_j u}.
void others_requested(std::span<const double> p, std::size_t skip, double u,
                      std::vector<double>& pmf) {
  std::fill(pmf.begin(), pmf.end(), 0.0);
  pmf[0] = 1.0;
  std::size_t used = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j == skip) continue;
    add_trial(pmf, used++, -std::expm1(-p[j] * u));
  }
}

// Initial panel edges tracking the scales 1/p of the fastest, median and slowest items.
std::vector<double> time_breakpoints(std::span<const double> p, double horizon) {
  std::vector<double> positive;
  for (double x : p) {
    if (x > 0.0) positive.push_back(x);
  }
  std::sort(positive.begin(), positive.end());
  std::vector<double> pts;
  if (positive.empty()) return pts;
  const double scales[] = {positive.back(), positive[positive.size() / 2], positive.front()};
  for (double rate : scales) {
    for (double c : {2.0, 10.0, 100.0}) {
      const double u = std::log(c) / rate;
      if (u > 0.0 && u < horizon) pts.push_back(u);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double stationary_horizon(std::span<const double> p) {
  double pmin = std::numeric_limits<double>::infinity();
  for (double x : p) {
    if (x > 0.0) pmin = std::min(pmin, x);
  }
  return std::log(1e12) / pmin;
}

const numerics::QuadratureSpec kSpec{1e-13, 1e-11, 60};

// Σ_i ∫₀ᵀ p_i² e^{−p_i u} P(J_{−i}(u) = k) du for every k.
DiscretePmf equilibrium_part(const RequestProfile& profile, double horizon) {
  const auto p = profile.popularities();
  const std::size_t n = p.size();
  DiscretePmf out{std::vector<double>(n, 0.0)};
  if (horizon <= 0.0) return out;
  std::vector<double> pmf(n + 1);
  const auto f = [&](double u, std::span<double> y) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (p[i] == 0.0) continue;
      const double weight = p[i] * p[i] * std::exp(-p[i] * u);
      others_requested(p, i, u, pmf);
      for (std::size_t k = 0; k < n; ++k) y[k] += weight * pmf[k];
    }
  };
  const auto breaks = time_breakpoints(p, horizon);
  out.probabilities = numerics::integrate_vector(f, n, 0.0, horizon, breaks, kSpec);
  for (auto& v : out.probabilities) v = std::max(v, 0.0);
  return out;
}

}  // namespace

double DiscretePmf::total() const {
  return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

DiscretePmf SearchCostPmf::total() const {
  DiscretePmf sum;
  const std::size_t n = std::max(equilibrium.size(), out.size());
  sum.probabilities.resize(n);
  for (std::size_t k = 0; k < n; ++k) sum.probabilities[k] = equilibrium[k] + out[k];
  return sum;
}

DiscretePmf poisson_binomial(std::span<const double> qs) {
  for (double q : qs) {
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("Bernoulli parameters must lie in [0, 1]");
  }
  std::vector<double> pmf(qs.size() + 1, 0.0);
  pmf[0] = 1.0;
  for (std::size_t j = 0; j < qs.size(); ++j) add_trial(pmf, j, qs[j]);
  return DiscretePmf{std::move(pmf)};
}

double exact_marginal_e(const RequestProfile& profile, std::size_t i, double t, std::size_t k) {
  check_item(profile, i);
  if (!(t >= 0.0)) throw InvalidArgument("t must be >= 0");
  const auto p = profile.popularities();
  const std::size_t n = p.size();
  const std::size_t idx = i - 1;
  if (k >= n || p[idx] == 0.0 || t == 0.0) return 0.0;
  const double horizon = std::isfinite(t) ? t : stationary_horizon(p);
  std::vector<double> pmf(n + 1);
  const auto f = [&](double u) {
    others_requested(p, idx, u, pmf);
    return p[idx] * std::exp(-p[idx] * u) * pmf[k];
  };
  const auto breaks = time_breakpoints(p, horizon);
  return numerics::integrate(f, 0.0, horizon, breaks, kSpec);
}

double exact_marginal_o(const RequestProfile& profile, std::size_t i, double t, std::size_t k) {
  check_item(profile, i);
  if (!(t >= 0.0)) throw InvalidArgument("t must be >= 0");
  const auto p = profile.popularities();
  const std::size_t n = p.size();
  const std::size_t idx = i - 1;
  if (k >= n || k < idx) return 0.0;
  // Items ahead of i in the initial list are always in front of it.
  const auto seen = [t](double rate) { return rate > 0.0 ? -std::expm1(-rate * t) : 0.0; };
  std::vector<double> qs;
  for (std::size_t j = idx + 1; j < n; ++j) qs.push_back(seen(p[j]));
  const auto behind = poisson_binomial(qs);
  return (1.0 - seen(p[idx])) * behind[k - idx];
}

SearchCostPmf exact_search_cost_law(const RequestProfile& profile, double t, std::size_t cap) {
  check_cap(profile, cap);
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw InvalidArgument("t must be finite and >= 0; use exact_stationary_law");
  }
  const auto p = profile.popularities();
  const std::size_t n = p.size();
  SearchCostPmf law;
  law.equilibrium = equilibrium_part(profile, t);
  law.out.probabilities.assign(n, 0.0);
  std::vector<double> pmf(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] == 0.0) continue;
    std::fill(pmf.begin(), pmf.end(), 0.0);
    pmf[0] = 1.0;
    std::size_t used = 0;
    for (std::size_t j = i + 1; j < n; ++j) add_trial(pmf, used++, -std::expm1(-p[j] * t));
    const double weight = p[i] * std::exp(-p[i] * t);
    for (std::size_t m = 0; m <= used; ++m) law.out.probabilities[i + m] += weight * pmf[m];
  }
  return law;
}

DiscretePmf exact_stationary_law(const RequestProfile& profile, std::size_t cap) {
  check_cap(profile, cap);
  return equilibrium_part(profile, stationary_horizon(profile.popularities()));
}

}  // namespace mtf::exact
