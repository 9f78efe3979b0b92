#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mtf::numerics {

using RealFn = std::function<double(double)>;
using VectorFn = std::function<void(double, std::span<double>)>;

struct QuadratureSpec {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_depth = 60;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

// Globally adaptive Gauss-Kronrod (G10/K21). Breakpoints inside (a, b) become
// initial panel boundaries; callers pass the known kinks and jumps of f.
QuadratureResult integrate_adaptive(const RealFn& f, double a, double b,
                                    std::span<const double> breakpoints,
                                    const QuadratureSpec& spec);

// Throw ToleranceNotMet when depth is exhausted and EvaluationError on a
// non-finite sample of f.
double integrate(const RealFn& f, double a, double b, const QuadratureSpec& spec = {});
double integrate(const RealFn& f, double a, double b, std::span<const double> breakpoints,
                 const QuadratureSpec& spec = {});

/// ∫₀^∞ f via x = −ln(1−u)/tail_rate.
double integrate_halfline(const RealFn& f, const QuadratureSpec& spec, double tail_rate);

/// ∫_lo^hi f with the same exponential map anchored at lo; hi may be +inf.
double integrate_exponential_map(const RealFn& f, double lo, double hi, double rate,
                                 const QuadratureSpec& spec = {});

/// ∫_lo^∞ f for integrands with polynomial tails (x = lo + 1/v − 1 style map).
double integrate_to_infinity(const RealFn& f, double lo, const QuadratureSpec& spec = {});

/// Componentwise adaptive integral of a vector-valued integrand of fixed dimension.
std::vector<double> integrate_vector(const VectorFn& f, std::size_t dim, double a, double b,
                                     std::span<const double> breakpoints,
                                     const QuadratureSpec& spec = {});

/// inf{x ∈ [lo, hi] : g(x) ≥ y} for nondecreasing g, by bisection to width tol.
double invert_monotone(const RealFn& g, double y, double lo, double hi, double tol);

/// Γ(z, y) = ∫_y^∞ x^{z−1} e^{−x} dx. Any real z is accepted when y > 0.
double upper_incomplete_gamma(double z, double y);

/// γ(z, y) = ∫_0^y x^{z−1} e^{−x} dx for z > 0.
double lower_incomplete_gamma(double z, double y);

/// P(z, y) = γ(z, y) / Γ(z), z > 0.
double regularized_lower_gamma(double z, double y);

/// z·y^{−z}·γ(z, y) = z ∫₀¹ x^{z−1} e^{−xy} dx, stable for small y.
double scaled_lower_gamma(double z, double y);

}  // namespace mtf::numerics
