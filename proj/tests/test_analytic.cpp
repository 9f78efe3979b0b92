#include <cmath>
#include <vector>

#include <doctest.h>

#include "mtf/analytic.hpp"
#include "mtf/errors.hpp"
#include "mtf/numerics.hpp"
#include "mtf/stats.hpp"
#include "oracles.hpp"

using namespace mtf;
using namespace mtf::analytic;

namespace {

const Ordering kOrderings[] = {Ordering::exchangeable, Ordering::decreasing,
                               Ordering::increasing};

double grid_x(int k) { return (k + 0.5) / 50.0; }

}  // namespace

TEST_CASE("threshold and out mass") {
  const auto exp1 = make_law("exp(1)");
  CHECK(threshold(*exp1, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(out_mass(*exp1, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(threshold(*make_law("geometric(0.5)"), std::log(2.0)) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(threshold(*make_law("dirac(1)"), 1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(threshold(*make_law("bernoulli(0.4)"), kStationary) == doctest::Approx(0.4));
  CHECK(out_mass(*exp1, kStationary) == 0.0);
}

TEST_CASE("stationary law of Exp(1) weights is 2(1 − x)") {
  const auto exp1 = make_law("exp(1)");
  for (double x : {0.0, 0.1, 0.5, 0.9, 0.999}) {
    CHECK(stationary_density(*exp1, x) == doctest::Approx(2.0 * (1.0 - x)).epsilon(1e-10));
    CHECK(stationary_cdf(*exp1, x) == doctest::Approx(1.0 - (1.0 - x) * (1.0 - x)).epsilon(1e-10));
  }
  for (double u : {0.01, 0.5, 0.99}) {
    CHECK(stationary_quantile(*exp1, u) == doctest::Approx(1.0 - std::sqrt(1.0 - u)).epsilon(1e-9));
  }
  CHECK(inverse_laplace(*exp1, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero atoms cut the stationary support at 1 − p₀") {
  const auto bern = make_law("bernoulli(0.5)");
  // Bernoulli(p): S∞ uniform on [0, p).
  CHECK(stationary_density(*bern, 0.2) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(stationary_density(*bern, 0.7) == 0.0);
  CHECK(stationary_cdf(*bern, 0.25) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(stationary_cdf(*bern, 0.6) == 1.0);
}

TEST_CASE("worked example: Bernoulli(1/2) at t = ln 2") {
  const auto law = transient_law(make_law("bernoulli(0.5)"), Ordering::exchangeable, std::log(2.0));
  for (int k = 0; k < 50; ++k) {
    const double x = grid_x(k);
    const double ref = x < 0.25 ? 2.0 : 2.0 / 3.0;
    CHECK(law.density(x) == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("worked example: Exp(1) and Gamma weights") {
  for (double a : {1.0, 2.0}) {
    for (double t : {0.5, 1.0, 2.0}) {
      const auto law = transient_law(std::make_shared<GammaLaw>(a), Ordering::exchangeable, t);
      const double u = 1.0 - std::pow(1.0 + t, -a);
      CHECK(law.threshold() == doctest::Approx(u).epsilon(1e-14));
      for (int k = 0; k < 50; ++k) {
        const double x = grid_x(k);
        const double ref =
            x < u ? (1.0 + 1.0 / a) * std::pow(1.0 - x, 1.0 / a) : 1.0 / (1.0 + t);
        CHECK(law.density(x) == doctest::Approx(ref).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("worked example: Geometric(1/2) at t = ln 2") {
  const double p = 0.5;
  const double t = std::log(2.0);
  const auto law = transient_law(make_law("geometric(0.5)"), Ordering::exchangeable, t);
  const double e = std::exp(-t);
  const double u = (1 - p) * (1 - e) / (p + (1 - p) * (1 - e));
  CHECK(u == doctest::Approx(1.0 / 3.0));
  for (int k = 0; k < 50; ++k) {
    const double x = grid_x(k);
    const double ref = x < u ? (2 * (1 - x) - p) / (1 - p) : p * e / (1 - (1 - p) * e);
    CHECK(law.density(x) == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("worked example: constant weights give a uniform cost") {
  for (auto o : kOrderings) {
    for (double t : {0.1, 1.0, 5.0}) {
      const auto law = transient_law(make_law("dirac(1)"), o, t);
      for (int k = 0; k < 50; ++k) CHECK(law.density(grid_x(k)) == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(tv_distance_to_stationary(law.law(), o, t).exact == doctest::Approx(0.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("every limit law is a probability density with the right out mass") {
  for (const char* name : {"exp(1)", "gamma(2)", "pareto(-0.5)", "pareto(-0.8)", "beta(1,2)",
                            "beta(2,1)", "bernoulli(0.5)", "geometric(0.3)", "linear(1)"}) {
    for (auto o : kOrderings) {
      for (double t : {0.5, 2.0}) {
        CAPTURE(name);
        CAPTURE(to_string(o));
        CAPTURE(t);
        const auto law = transient_law(make_law(name), o, t);
        CHECK(law.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(1.0 - law.cdf(law.threshold()) == doctest::Approx(law.out_mass()).epsilon(1e-7));
        // The CDF is nondecreasing and the density nonnegative.
        double prev = 0.0;
        for (int k = 0; k <= 200; ++k) {
          const double x = k / 200.0;
          const double F = law.cdf(x);
          CHECK(F >= prev - 1e-12);
          CHECK(law.density(x) >= 0.0);
          prev = F;
        }
      }
    }
  }
}

TEST_CASE("Laplace transforms of the two pieces for Exp(1), t = 1") {
  const auto exp1 = make_law("exp(1)");
  CHECK(laplace_equilibrium_limit(*exp1, 1.0, 1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-10));
  CHECK(laplace_equilibrium_limit(*exp1, 1.0, 0.0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(laplace_out_limit(*exp1, Ordering::exchangeable, 1.0, 2.0) ==
        doctest::Approx(0.25 * (std::exp(-1.0) - std::exp(-2.0))).epsilon(1e-10));
  CHECK(laplace_out_limit(*exp1, Ordering::exchangeable, 1.0, 2.0) ==
        doctest::Approx(0.058136).epsilon(1e-5));
  for (auto o : kOrderings) {
    CHECK(laplace_out_limit(*exp1, o, 1.0, 0.0) == doctest::Approx(0.25).epsilon(1e-10));
  }
}

TEST_CASE("total variation to the stationary law") {
  const auto exp1 = make_law("exp(1)");
  const auto tv = tv_distance_to_stationary(*exp1, Ordering::exchangeable, 1.0);
  CHECK(tv.exact == doctest::Approx(0.0625).epsilon(1e-9));
  CHECK(tv.bound == doctest::Approx(0.5).epsilon(1e-14));
  for (auto o : kOrderings) {
    for (double t : {0.25, 1.0, 4.0}) {
      const auto d = tv_distance_to_stationary(*exp1, o, t);
      CHECK(d.exact <= d.bound);
      CHECK(d.exact >= 0.0);
    }
  }
  // Decay in t toward the stationary law.
  const auto early = tv_distance_to_stationary(*exp1, Ordering::decreasing, 0.5);
  const auto late = tv_distance_to_stationary(*exp1, Ordering::decreasing, 5.0);
  CHECK(late.exact < early.exact);
}

TEST_CASE("generalized inverse for the decreasing ordering") {
  const auto exp1 = make_law("exp(1)");
  // G(y) = ∫₀^y e^{−2z} dz = (1 − e^{−2y})/2; g̃(x) solves G = 1 − x.
  for (double x : {0.55, 0.7, 0.9, 0.99}) {
    const double ref = -0.5 * std::log(1.0 - 2.0 * (1.0 - x));
    CHECK(tilde_g_t(*exp1, Ordering::decreasing, 1.0, x) == doctest::Approx(ref).epsilon(1e-10));
    CHECK(transient_density(*exp1, Ordering::decreasing, 1.0, x) == doctest::Approx(ref).epsilon(1e-10));
  }
  CHECK(g_t(*exp1, Ordering::decreasing, 1.0, 1.0) ==
        doctest::Approx(0.5 * (1.0 - std::exp(-2.0))).epsilon(1e-12));
  // Increasing: 1 − g_t(y) = x − threshold + G-complement; here ∫_y^∞ e^{−2z} dz.
  CHECK(g_t(*exp1, Ordering::increasing, 1.0, 1.0) ==
        doctest::Approx(0.5 * std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("stochastic order between orderings") {
  for (const char* name : {"exp(1)", "pareto(-0.5)", "beta(1,2)", "bernoulli(0.5)"}) {
    for (double t : {0.5, 2.0}) {
      const auto law = make_law(name);
      const auto dec = transient_law(law, Ordering::decreasing, t);
      const auto ex = transient_law(law, Ordering::exchangeable, t);
      const auto inc = transient_law(law, Ordering::increasing, t);
      CHECK(stats::stochastic_order_check(dec, ex).pass);
      CHECK(stats::stochastic_order_check(ex, inc).pass);
    }
  }
}

TEST_CASE("LRU fault probability") {
  const auto exp1 = make_law("exp(1)");
  CHECK(lru_fault_probability(*exp1, Ordering::exchangeable, 1.0, 0.5) ==
        doctest::Approx(0.25).epsilon(1e-10));
  CHECK(lru_fault_probability(*exp1, Ordering::exchangeable, 1.0, 0.001) >
        lru_fault_probability(*exp1, Ordering::exchangeable, 1.0, 0.01));
  CHECK(lru_fault_probability(*exp1, Ordering::exchangeable, 1.0, 0.001) ==
        doctest::Approx(1.0).epsilon(3e-3));
  for (auto o : kOrderings) {
    for (double d : {0.2, 0.6, 0.9}) {
      const auto law = transient_law(exp1, o, 1.0);
      CHECK(lru_fault_probability(*exp1, o, 1.0, d) == doctest::Approx(1.0 - law.cdf(d)).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(lru_fault_probability(*exp1, Ordering::exchangeable, 1.0, 1.5), Error);
}

TEST_CASE("PAC incomplete-gamma branch against quadrature") {
  for (double alpha : {-0.5, -0.3}) {
    const ParetoLaw pareto(alpha);
    for (double t : {0.5, 2.0}) {
      for (double d : {0.1, 0.3, 0.6}) {
        CHECK(pac_fault_probability(alpha, t, d) ==
              doctest::Approx(lru_fault_probability(pareto, Ordering::decreasing, t, d)).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("limiting samples follow the law") {
  for (auto o : kOrderings) {
    const auto law = transient_law(make_law("exp(1)"), o, 1.0);
    const auto batch = sample_limiting(law, 50000, 9);
    const double ks = stats::ks_distance(batch, [&](double x) { return law.cdf(x); });
    CHECK(ks < stats::dkw_band(50000, 0.999));
  }
}

TEST_CASE("invalid inputs") {
  const auto exp1 = make_law("exp(1)");
  CHECK_THROWS_AS(transient_law(exp1, Ordering::exchangeable, -1.0), InvalidArgument);
  CHECK_THROWS_AS(transient_law(exp1, Ordering::exchangeable, 0.0), InvalidArgument);
  CHECK_THROWS_AS(inverse_laplace(*make_law("bernoulli(0.5)"), 0.2), Error);
}
