// Acceptance suite: one line per criterion, nonzero exit when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtf/analytic.hpp"
#include "mtf/exact_oracle.hpp"
#include "mtf/simulator.hpp"
#include "mtf/stats.hpp"
#include "oracles.hpp"

using namespace mtf;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

const Ordering kOrderings[] = {Ordering::exchangeable, Ordering::decreasing,
                               Ordering::increasing};

double cdf_of(const analytic::SearchCostLaw& law, double x) { return law.cdf(x); }

// KS sequence may rise at most once.
bool mostly_decreasing(const std::vector<double>& v) {
  int rises = 0;
  for (std::size_t i = 1; i < v.size(); ++i) rises += v[i] > v[i - 1];
  return rises <= 1;
}

Outcome oracle_agreement() {
  std::mt19937_64 gen(2718);
  std::gamma_distribution<double> gamma(1.0);
  constexpr std::size_t m = 1000000;
  double worst = 0.0;
  std::string where;
  for (int r = 0; r < 10; ++r) {
    const std::size_t n = 2 + static_cast<std::size_t>(r % 7);
    std::vector<double> w(n);
    for (auto& x : w) x = gamma(gen);
    const RequestProfile profile(w, Ordering::exchangeable, 1.0, 0, "gamma(1)");
    for (double t : {0.5, 2.0}) {
      const auto exact = exact::exact_search_cost_law(profile, t).total();
      for (auto s : {sim::Sampler::event_driven, sim::Sampler::fast}) {
        const auto batch = sim::batch_profile(profile, t, m, 1000 + r, s);
        const double tv = stats::tv_discrete(stats::empirical_pmf(batch, n), exact);
        if (tv > worst) {
          worst = tv;
          where = "n=" + std::to_string(n) + " t=" + fmt("%g", t) +
                  (s == sim::Sampler::fast ? " fast" : " event-driven");
        }
      }
    }
  }
  return {worst <= 0.005, "max TV " + fmt("%.5f", worst) + " (" + where + "), tol 0.005"};
}

Outcome poisson_binomial_exactness() {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int r = 0; r < 100; ++r) {
    const std::size_t n = 1 + static_cast<std::size_t>(r % 12);
    std::vector<double> q(n);
    for (auto& x : q) x = u(gen);
    const auto pmf = exact::poisson_binomial(q);
    const auto ref = oracle::brute_poisson_binomial(q);
    for (std::size_t k = 0; k <= n; ++k) worst = std::max(worst, std::abs(pmf[k] - ref[k]));
  }
  return {worst <= 1e-12, "max abs error " + fmt("%.3g", worst) + ", tol 1e-12"};
}

Outcome stationary_limit() {
  const auto exp1 = make_law("exp(1)");
  const auto limit = [](double x) {
    x = std::clamp(x, 0.0, 1.0);
    return 1.0 - (1.0 - x) * (1.0 - x);  // density 2(1 − x)
  };
  std::vector<double> ks;
  std::string row;
  for (std::size_t n : {250, 500, 1000, 2000}) {
    const auto batch = sim::batch_stationary(exp1, n, 100000, 500 + n);
    ks.push_back(stats::ks_distance(batch, limit));
    row += " n=" + std::to_string(n) + ":" + fmt("%.4f", ks.back());
  }
  const bool pass = ks.back() <= 0.02 && mostly_decreasing(ks);
  return {pass, "KS" + row + ", tol 0.02 at n=2000, at most one rise"};
}

Outcome transient_limit() {
  const auto exp1 = make_law("exp(1)");
  bool pass = true;
  std::string row;
  for (auto o : kOrderings) {
    const auto law = analytic::transient_law(exp1, o, 1.0);
    const auto batch = sim::batch_transient(exp1, 2000, o, 1.0, 100000, 77);
    const double ks = stats::ks_distance(batch, [&](double x) { return cdf_of(law, x); });
    std::size_t unseen = 0;
    for (auto b : batch.unseen) unseen += b;
    const double frac = static_cast<double>(unseen) / static_cast<double>(batch.count);
    pass = pass && ks <= 0.02 && std::abs(frac - 0.25) <= 0.01 &&
           std::abs(law.out_mass() - 0.25) <= 1e-14;
    row += " " + std::string(to_string(o)) + ": KS " + fmt("%.4f", ks) + " out " + fmt("%.4f", frac);
  }
  return {pass, row.substr(1) + "; tol KS 0.02, out 0.25 +- 0.01"};
}

// Largest pointwise gap over 50 interior grid points.
double max_gap(const analytic::SearchCostLaw& law, const std::function<double(double)>& ref) {
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double x = (k + 0.5) / 50.0;
    worst = std::max(worst, std::abs(law.density(x) - ref(x)));
  }
  return worst;
}

Outcome worked_examples() {
  std::vector<std::pair<std::string, double>> explicit_gaps;
  const double ln2 = std::log(2.0);
  {
    const double p = 0.5;
    const double t = ln2;
    const auto law = analytic::transient_law(make_law("bernoulli(0.5)"), Ordering::exchangeable, t);
    const double u = p * (1 - std::exp(-t));
    explicit_gaps.push_back({"(1)", max_gap(law, [&](double x) {
                               return x < u ? 1 / p : std::exp(-t) / (1 - p + p * std::exp(-t));
                             })});
  }
  {
    const double a = 1.0;
    const double t = 1.0;
    const auto law = analytic::transient_law(make_law("exp(1)"), Ordering::exchangeable, t);
    const double u = 1 - std::pow(1 + t, -a);
    explicit_gaps.push_back({"(2)", max_gap(law, [&](double x) {
                               return x < u ? (1 + 1 / a) * std::pow(1 - x, 1 / a) : 1 / (1 + t);
                             })});
  }
  double thr3 = 0.0;
  {
    const double p = 0.5;
    const double t = ln2;
    const double e = std::exp(-t);
    const auto law = analytic::transient_law(make_law("geometric(0.5)"), Ordering::exchangeable, t);
    thr3 = law.threshold();
    const double u = (1 - p) * (1 - e) / (p + (1 - p) * (1 - e));
    explicit_gaps.push_back({"(3)", max_gap(law, [&](double x) {
                               return x < u ? (2 * (1 - x) - p) / (1 - p) : p * e / (1 - (1 - p) * e);
                             })});
  }
  {
    double worst = 0.0;
    for (auto o : kOrderings) {
      for (double t : {0.5, 1.0, 3.0}) {
        worst = std::max(worst, max_gap(analytic::transient_law(make_law("dirac(1)"), o, t),
                                        [](double) { return 1.0; }));
      }
    }
    explicit_gaps.push_back({"(4)", worst});
  }

  std::vector<std::pair<std::string, double>> quad_gaps;
  const double t = 1.0;
  {
    // Pareto, α = −0.5: decreasing Zipf profile (i) and i.i.d. weights (ii).
    const double alpha = -0.5;
    const auto ref = oracle::RefLaw::with_density(
        [=](double x) { return -1 / alpha * std::pow(x, 1 / alpha - 1); }, 1.0, INFINITY);
    const double phi_t = ref.phi(t);
    const double thr = 1 - phi_t;
    const auto g = [&](double y) {
      return oracle::gk([&](double z) { return -1 / alpha * std::exp(-z * t) * std::pow(z, 1 / alpha - 1); },
                        1.0, y);
    };
    const auto law = make_law("pareto(-0.5)");
    quad_gaps.push_back(
        {"(5)(i)", max_gap(analytic::transient_law(law, Ordering::decreasing, t), [&](double x) {
           if (x < thr) return ref.equilibrium_density(x);
           double hi = 2.0;
           while (g(hi) < 1 - x) hi *= 2.0;
           return (alpha + 1) * oracle::solve_increasing(g, 1 - x, 1.0, hi);
         })});
    quad_gaps.push_back(
        {"(5)(ii)", max_gap(analytic::transient_law(law, Ordering::exchangeable, t), [&](double x) {
           return x < thr ? ref.equilibrium_density(x) : (alpha + 1) * -ref.dphi(t) / phi_t;
         })});
  }
  {
    // α = 0.5: weights with density (1/α) x^{1/α − 1} on [0, 1].
    const double alpha = 0.5;
    const auto ref = oracle::RefLaw::with_density(
        [=](double x) { return 1 / alpha * std::pow(x, 1 / alpha - 1); }, 0.0, 1.0);
    const double phi_t = ref.phi(t);
    const double thr = 1 - phi_t;
    const auto one_minus_g = [&](double y) {
      return 1 - oracle::gk([&](double z) { return 1 / alpha * std::exp(-z * t) * std::pow(z, 1 / alpha - 1); },
                            y, 1.0);
    };
    const auto law = make_law("beta(2,1)");
    quad_gaps.push_back(
        {"(6)(i)", max_gap(analytic::transient_law(law, Ordering::increasing, t), [&](double x) {
           if (x < thr) return ref.equilibrium_density(x);
           return (alpha + 1) * oracle::solve_increasing(one_minus_g, x, 0.0, 1.0);
         })});
    quad_gaps.push_back(
        {"(6)(ii)", max_gap(analytic::transient_law(law, Ordering::exchangeable, t), [&](double x) {
           return x < thr ? ref.equilibrium_density(x) : (1 + alpha) * -ref.dphi(t) / phi_t;
         })});
  }
  {
    // Density increments of q(x) = 2(1 − x) on [0, c], c = 1.
    const double c = 1.0;
    const auto q = [](double x) { return 2.0 * (1.0 - x); };
    const auto ref = oracle::RefLaw::pushforward(q, c);
    const double phi_t = ref.phi(t);
    const double thr = 1 - phi_t;
    const auto g_pos = [&](double p) {
      return oracle::gk([&](double u) { return std::exp(-q(u) * t); }, 0.0, p) / c;
    };
    quad_gaps.push_back(
        {"(7)", max_gap(analytic::transient_law(make_law("linear(1)"), Ordering::decreasing, t),
                        [&](double x) {
                          if (x < thr) return ref.equilibrium_density(x);
                          return c * q(oracle::solve_increasing(g_pos, x - thr, 0.0, c));
                        })});
  }

  bool pass = std::abs(thr3 - 1.0 / 3.0) <= 1e-12;
  std::string detail;
  for (const auto& [name, gap] : explicit_gaps) {
    pass = pass && gap <= 1e-8;
    detail += name + " " + fmt("%.2g", gap) + " ";
  }
  for (const auto& [name, gap] : quad_gaps) {
    pass = pass && gap <= 1e-6;
    detail += name + " " + fmt("%.2g", gap) + " ";
  }
  return {pass, "max gaps " + detail + "(tol 1e-8 / 1e-6), geometric threshold " + fmt("%.12f", thr3)};
}

const char* kLaplaceLaws[] = {"exp(1)", "pareto(-0.5)", "beta(1,2)"};

// ∫ e^{−λx} f(x) dx straight from the density, by tanh-sinh on each piece between
// breakpoints: heavy tails leave an integrable spike at 0 and unbounded laws one at the
// threshold. Nodes so close to 0 that 1 − x rounds to 1 see an infinite density; the mass
// there is below cdf(1e-15), which is checked to be negligible.
double density_transform(const analytic::SearchCostLaw& law, double lambda) {
  const auto f = [&](double x) { return std::exp(-lambda * x) * law.density(x); };
  boost::math::quadrature::tanh_sinh<double> ts;
  double total = 0.0;
  const double thr = law.threshold();
  if (thr > 0.0) {
    if (law.cdf(1e-15) > 1e-9) throw std::runtime_error("mass below 1e-15 is not negligible");
    total += ts.integrate([&](double x) {
      const double v = f(x);
      return std::isfinite(v) || x >= 1e-15 ? v : 0.0;
    }, 0.0, thr, 1e-13);
  }
  std::vector<double> cuts{thr};
  for (double b : law.breakpoints()) {
    if (b > thr) cuts.push_back(b);
  }
  cuts.push_back(1.0);
  for (std::size_t i = 1; i < cuts.size(); ++i) total += ts.integrate(f, cuts[i - 1], cuts[i], 1e-13);
  return total;
}

Outcome laplace_consistency() {
  double worst = 0.0;
  for (const char* name : kLaplaceLaws) {
    const auto law = make_law(name);
    for (auto o : kOrderings) {
      for (double t : {0.5, 2.0}) {
        const auto s = analytic::transient_law(law, o, t);
        for (double lambda : {0.0, 1.0, 5.0}) {
          const double split = analytic::laplace_equilibrium_limit(*law, t, lambda) +
                               analytic::laplace_out_limit(*law, o, t, lambda);
          worst = std::max(worst, std::abs(split - density_transform(s, lambda)));
        }
      }
    }
  }
  return {worst <= 1e-5, "max |A + B - transform| " + fmt("%.3g", worst) + ", tol 1e-5"};
}

Outcome tv_bound() {
  bool pass = true;
  double slack = INFINITY;
  for (const char* name : kLaplaceLaws) {
    const auto law = make_law(name);
    for (auto o : kOrderings) {
      for (double t : {0.5, 2.0}) {
        const auto tv = analytic::tv_distance_to_stationary(*law, o, t);
        pass = pass && tv.exact <= tv.bound;
        slack = std::min(slack, tv.bound - tv.exact);
      }
    }
  }
  double dirac = 0.0;
  for (auto o : kOrderings) {
    for (double t : {0.5, 2.0}) {
      dirac = std::max(dirac, analytic::tv_distance_to_stationary(*make_law("dirac(1)"), o, t).exact);
    }
  }
  pass = pass && dirac <= 1e-9;
  return {pass, "min bound - exact " + fmt("%.4f", slack) + ", Dirac TV " + fmt("%.2g", dirac) +
                    " (tol 1e-9)"};
}

Outcome stochastic_order() {
  double worst = 0.0;
  bool pass = true;
  for (const char* name : {"exp(1)", "pareto(-0.5)", "beta(1,2)"}) {
    const auto law = make_law(name);
    for (double t : {0.5, 2.0}) {
      const auto dec = analytic::transient_law(law, Ordering::decreasing, t);
      const auto ex = analytic::transient_law(law, Ordering::exchangeable, t);
      const auto inc = analytic::transient_law(law, Ordering::increasing, t);
      const auto a = stats::stochastic_order_check(dec, ex, 200, 1e-8);
      const auto b = stats::stochastic_order_check(ex, inc, 200, 1e-8);
      pass = pass && a.pass && b.pass;
      worst = std::max({worst, a.max_violation, b.max_violation});
    }
  }
  return {pass, "max violation " + fmt("%.3g", worst) + ", tol 1e-8"};
}

Outcome lln() {
  const std::size_t ladder[] = {100, 1000, 10000};
  bool pass = true;
  std::string detail;
  auto record = [&](const std::string& name, const std::vector<double>& d) {
    const bool trend = d.back() <= 1e-12 || d.back() < d.front();
    pass = pass && d.back() <= 0.1 && trend;
    detail += name + " " + fmt("%.4f", d.back()) + " ";
  };
  for (const char* name : {"dirac(1)", "bernoulli(0.5)", "exp(1)", "gamma(2)", "geometric(0.5)",
                           "pareto(-0.5)", "beta(1,2)"}) {
    const auto law = make_law(name);
    std::vector<double> d;
    for (std::size_t n : ladder) {
      const auto p = make_iid_profile(law, n, Ordering::exchangeable, 11);
      d.push_back(wasserstein1(empirical_measure(p, p.total_weight() / n), *law));
    }
    record(name, d);
  }
  {
    std::vector<double> d;
    const auto q = [](double x) { return 2.0 * (1.0 - x); };
    for (std::size_t n : ladder) {
      const auto p = make_density_increment_profile(q, 1.0, n, "linear(1)");
      d.push_back(wasserstein1(empirical_measure(p, p.scale() * p.total_weight() / n), *p.limit_law()));
    }
    record("linear(1)", d);
  }
  for (double alpha : {-0.5, 0.5}) {
    std::vector<double> d;
    for (std::size_t n : ladder) {
      const auto p = make_zipf_profile(alpha, n);
      d.push_back(wasserstein1(empirical_measure(p, p.scale() * p.total_weight() / n), *p.limit_law()));
    }
    record("zipf(" + fmt("%g", alpha) + ")", d);
  }
  return {pass, "W1 at n=1e4: " + detail + "(tol 0.1, decreasing)"};
}

Outcome lru_pac() {
  const double lru = analytic::lru_fault_probability(*make_law("exp(1)"), Ordering::exchangeable, 1.0, 0.5);
  const ParetoLaw pareto(-0.5);
  double worst = 0.0;
  for (double d : {0.1, 0.3, 0.6}) {
    for (double t : {0.5, 2.0}) {
      const double pac = analytic::pac_fault_probability(-0.5, t, d);
      const double tail = analytic::lru_fault_probability(pareto, Ordering::decreasing, t, d);
      worst = std::max(worst, std::abs(pac - tail));
    }
  }
  const bool pass = std::abs(lru - 0.25) <= 1e-10 && worst <= 1e-6;
  return {pass, "LRU " + fmt("%.12f", lru) + " (0.25, tol 1e-10), PAC vs tail " + fmt("%.3g", worst) +
                    " (tol 1e-6)"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"oracle agreement", oracle_agreement},
      {"Poisson-binomial exactness", poisson_binomial_exactness},
      {"stationary limit", stationary_limit},
      {"transient limit", transient_limit},
      {"worked examples", worked_examples},
      {"Laplace consistency", laplace_consistency},
      {"TV bound", tv_bound},
      {"stochastic order", stochastic_order},
      {"LLN for random partitions", lln},
      {"LRU/PAC", lru_pac},
  };
  int failures = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome out{false, ""};
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2d %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", index, c.name,
                out.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !out.pass;
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
