#include "mtf/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "mtf/errors.hpp"

namespace mtf::numerics {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min();

// 21-point Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525469669, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  int depth;
};

struct ByError {
  bool operator()(const Panel& l, const Panel& r) const { return l.error < r.error; }
};

double checked(const RealFn& f, double x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    throw EvaluationError("integrand is not finite at x = " + std::to_string(x));
  }
  return v;
}

// QUADPACK qk21 error heuristic.
double kronrod_error(double diff, double resabs, double resasc) {
  double err = std::abs(diff);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > kTiny / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * resabs, err);
  }
  return err;
}

Panel gk21(const RealFn& f, double a, double b, int depth) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, 21> fv{};
  fv[10] = checked(f, center);
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    fv[j] = checked(f, center - dx);
    fv[20 - j] = checked(f, center + dx);
  }
  double kron = kWgk[10] * fv[10];
  double gauss = 0.0;
  double resabs = std::abs(kron);
  for (int j = 0; j < 10; ++j) {
    const double pair = fv[j] + fv[20 - j];
    kron += kWgk[j] * pair;
    resabs += kWgk[j] * (std::abs(fv[j]) + std::abs(fv[20 - j]));
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  const double mean = 0.5 * kron;
  double resasc = kWgk[10] * std::abs(fv[10] - mean);
  for (int j = 0; j < 10; ++j) {
    resasc += kWgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[20 - j] - mean));
  }
  const double ah = std::abs(half);
  return Panel{a, b, kron * half,
               kronrod_error((kron - gauss) * half, resabs * ah, resasc * ah), depth};
}

std::vector<double> panel_edges(double a, double b, std::span<const double> breakpoints) {
  std::vector<double> edges{a};
  for (double p : breakpoints) {
    if (std::isfinite(p) && p > a && p < b) edges.push_back(p);
  }
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

constexpr std::size_t kMaxPanels = 20000;

}  // namespace

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol >= 0.0) || max_depth < 1) {
    throw InvalidArgument("QuadratureSpec requires abs_tol > 0, rel_tol >= 0, max_depth >= 1");
  }
}

QuadratureResult integrate_adaptive(const RealFn& f, double a, double b,
                                    std::span<const double> breakpoints,
                                    const QuadratureSpec& spec) {
  spec.validate();
  if (!std::isfinite(a) || !std::isfinite(b) || a > b) {
    throw InvalidArgument("integrate requires finite a <= b");
  }
  if (a == b) return {0.0, 0.0, true};

  std::priority_queue<Panel, std::vector<Panel>, ByError> open;
  std::vector<Panel> frozen;
  double total = 0.0;
  double total_err = 0.0;
  const auto edges = panel_edges(a, b, breakpoints);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    Panel p = gk21(f, edges[i], edges[i + 1], 0);
    total += p.value;
    total_err += p.error;
    open.push(p);
  }

  bool converged = false;
  std::size_t panels = open.size();
  while (true) {
    if (total_err <= spec.abs_tol + spec.rel_tol * std::abs(total)) {
      converged = true;
      break;
    }
    if (open.empty() || panels >= kMaxPanels) break;
    Panel worst = open.top();
    open.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (worst.depth >= spec.max_depth || mid <= worst.a || mid >= worst.b) {
      frozen.push_back(worst);
      continue;
    }
    Panel left = gk21(f, worst.a, mid, worst.depth + 1);
    Panel right = gk21(f, mid, worst.b, worst.depth + 1);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    open.push(left);
    open.push(right);
    ++panels;
  }

  // Re-sum to shed the drift of the running updates.
  double value = 0.0;
  double err = 0.0;
  for (const auto& p : frozen) {
    value += p.value;
    err += p.error;
  }
  while (!open.empty()) {
    value += open.top().value;
    err += open.top().error;
    open.pop();
  }
  if (!converged) converged = err <= spec.abs_tol + spec.rel_tol * std::abs(value);
  return {value, err, converged};
}

double integrate(const RealFn& f, double a, double b, std::span<const double> breakpoints,
                 const QuadratureSpec& spec) {
  const auto r = integrate_adaptive(f, a, b, breakpoints, spec);
  if (!r.converged) {
    throw ToleranceNotMet("quadrature tolerance not met on [" + std::to_string(a) + ", " +
                              std::to_string(b) + "]",
                          r.value, r.error);
  }
  return r.value;
}

double integrate(const RealFn& f, double a, double b, const QuadratureSpec& spec) {
  return integrate(f, a, b, std::span<const double>{}, spec);
}

double integrate_exponential_map(const RealFn& f, double lo, double hi, double rate,
                                 const QuadratureSpec& spec) {
  if (!(rate > 0.0)) throw InvalidArgument("exponential map requires rate > 0");
  if (!std::isfinite(lo) || !(hi >= lo)) throw InvalidArgument("exponential map requires lo <= hi");
  if (hi == lo) return 0.0;
  // u ∈ [0,1] ↦ x = lo − ln(1 − c·u)/rate with c = 1 − e^{−rate(hi−lo)}.
  const double c = std::isinf(hi) ? 1.0 : -std::expm1(-rate * (hi - lo));
  const auto g = [&](double u) {
    const double one_minus = 1.0 - c * u;
    if (one_minus <= 0.0) return 0.0;
    const double x = lo - std::log(one_minus) / rate;
    if (!std::isfinite(x)) return 0.0;
    const double v = f(x);
    if (v == 0.0) return 0.0;
    return v * c / (rate * one_minus);
  };
  return integrate(g, 0.0, 1.0, spec);
}

double integrate_halfline(const RealFn& f, const QuadratureSpec& spec, double tail_rate) {
  if (!(tail_rate > 0.0)) throw InvalidArgument("integrate_halfline requires tail_rate > 0");
  return integrate_exponential_map(f, 0.0, std::numeric_limits<double>::infinity(), tail_rate,
                                   spec);
}

double integrate_to_infinity(const RealFn& f, double lo, const QuadratureSpec& spec) {
  if (!std::isfinite(lo)) throw InvalidArgument("integrate_to_infinity requires finite lo");
  // Unit-length head keeps the map's resolution where tails start.
  const double head = integrate(f, lo, lo + 1.0, spec);
  const double start = lo + 1.0;
  const auto g = [&](double v) {
    if (v <= 0.0) return 0.0;
    const double x = start / v;
    if (!std::isfinite(x)) return 0.0;
    const double fx = f(x);
    if (fx == 0.0) return 0.0;
    return fx * start / (v * v);
  };
  if (start > 0.0) return head + integrate(g, 0.0, 1.0, spec);
  const auto h = [&](double v) {
    if (v <= 0.0) return 0.0;
    const double x = start + (1.0 - v) / v;
    if (!std::isfinite(x)) return 0.0;
    const double fx = f(x);
    if (fx == 0.0) return 0.0;
    return fx / (v * v);
  };
  return head + integrate(h, 0.0, 1.0, spec);
}

namespace {

struct VectorPanel {
  double a;
  double b;
  std::vector<double> value;
  double error;
  int depth;
};

struct ByVectorError {
  bool operator()(const VectorPanel& l, const VectorPanel& r) const { return l.error < r.error; }
};

VectorPanel gk21_vector(const VectorFn& f, std::size_t dim, double a, double b, int depth,
                        std::vector<double>& scratch) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::vector<double> kron(dim, 0.0);
  std::vector<double> gauss(dim, 0.0);
  scratch.assign(dim, 0.0);
  auto eval = [&](double x) {
    f(x, scratch);
    for (double v : scratch) {
      if (!std::isfinite(v)) throw EvaluationError("vector integrand is not finite");
    }
  };
  eval(center);
  for (std::size_t d = 0; d < dim; ++d) kron[d] = kWgk[10] * scratch[d];
  std::vector<double> left(dim);
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    eval(center - dx);
    left = scratch;
    eval(center + dx);
    for (std::size_t d = 0; d < dim; ++d) {
      const double pair = left[d] + scratch[d];
      kron[d] += kWgk[j] * pair;
      if (j % 2 == 1) gauss[d] += kWg[j / 2] * pair;
    }
  }
  double err = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    kron[d] *= half;
    err = std::max(err, std::abs(kron[d] - gauss[d] * half));
  }
  return VectorPanel{a, b, std::move(kron), err, depth};
}

}  // namespace

std::vector<double> integrate_vector(const VectorFn& f, std::size_t dim, double a, double b,
                                     std::span<const double> breakpoints,
                                     const QuadratureSpec& spec) {
  spec.validate();
  if (!std::isfinite(a) || !std::isfinite(b) || a > b) {
    throw InvalidArgument("integrate_vector requires finite a <= b");
  }
  std::vector<double> total(dim, 0.0);
  if (a == b || dim == 0) return total;
  std::vector<double> scratch;
  std::priority_queue<VectorPanel, std::vector<VectorPanel>, ByVectorError> open;
  std::vector<VectorPanel> done;
  double total_err = 0.0;
  const auto edges = panel_edges(a, b, breakpoints);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    auto p = gk21_vector(f, dim, edges[i], edges[i + 1], 0, scratch);
    total_err += p.error;
    open.push(std::move(p));
  }
  std::size_t panels = open.size();
  while (total_err > spec.abs_tol && !open.empty() && panels < kMaxPanels) {
    VectorPanel worst = open.top();
    open.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (worst.depth >= spec.max_depth || mid <= worst.a || mid >= worst.b) {
      done.push_back(std::move(worst));
      continue;
    }
    auto l = gk21_vector(f, dim, worst.a, mid, worst.depth + 1, scratch);
    auto r = gk21_vector(f, dim, mid, worst.b, worst.depth + 1, scratch);
    total_err += l.error + r.error - worst.error;
    open.push(std::move(l));
    open.push(std::move(r));
    ++panels;
  }
  double err = 0.0;
  auto accumulate = [&](const VectorPanel& p) {
    err += p.error;
    for (std::size_t d = 0; d < dim; ++d) total[d] += p.value[d];
  };
  for (const auto& p : done) accumulate(p);
  while (!open.empty()) {
    accumulate(open.top());
    open.pop();
  }
  if (err > spec.abs_tol) {
    throw ToleranceNotMet("vector quadrature tolerance not met", total.empty() ? 0.0 : total[0],
                          err);
  }
  return total;
}

double invert_monotone(const RealFn& g, double y, double lo, double hi, double tol) {
  if (!(lo <= hi)) throw InvalidArgument("invert_monotone requires lo <= hi");
  if (!(tol > 0.0)) throw InvalidArgument("invert_monotone requires tol > 0");
  const auto eval = [&](double x) {
    const double v = g(x);
    if (std::isnan(v)) throw EvaluationError("invert_monotone: g is NaN");
    return v;
  };
  if (eval(hi) < y) throw OutOfRange("invert_monotone: target above g(hi)");
  if (eval(lo) >= y) return lo;
  // Invariant: g(lo) < y <= g(hi).
  for (int it = 0; it < 2000 && hi - lo > tol; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (eval(mid) >= y) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

namespace {

constexpr double kGammaEps = 1e-16;
constexpr double kFpMin = 1e-300;

// Σ_k y^k / ((z+1)···(z+k)), i.e. γ(z,y) = y^z e^{−y} / z · series.
double gamma_series(double z, double y) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 100000; ++k) {
    term *= y / (z + k);
    sum += term;
    if (std::abs(term) < kGammaEps * std::abs(sum)) break;
  }
  return sum;
}

// Continued fraction h with Γ(z, y) = e^{−y} y^z h (modified Lentz).
double gamma_continued_fraction(double z, double y) {
  double b = y + 1.0 - z;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - z);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kGammaEps) break;
  }
  return h;
}

double prefactor(double z, double y) { return std::exp(z * std::log(y) - y); }

}  // namespace

double upper_incomplete_gamma(double z, double y) {
  if (!std::isfinite(z) || !(y >= 0.0)) {
    throw InvalidArgument("upper_incomplete_gamma requires finite z and y >= 0");
  }
  if (std::isinf(y)) return 0.0;
  if (y == 0.0) {
    if (z <= 0.0) throw InvalidArgument("upper_incomplete_gamma diverges for z <= 0 at y = 0");
    return std::tgamma(z);
  }
  if (z > 0.0) {
    if (y < z + 1.0) {
      return std::tgamma(z) - prefactor(z, y) * gamma_series(z, y) / z;
    }
    return prefactor(z, y) * gamma_continued_fraction(z, y);
  }
  if (y >= 1.0) return prefactor(z, y) * gamma_continued_fraction(z, y);
  // Γ(z, y) = Γ(z, 1) + ∫_y^1 x^{z−1} e^{−x} dx, expanding e^{−x} termwise.
  const double at_one = std::exp(-1.0) * gamma_continued_fraction(z, 1.0);
  const double log_y = std::log(y);
  double sum = 0.0;
  double coeff = 1.0;  // (−1)^k / k!
  for (int k = 0; k < 1000; ++k) {
    const double m = z + k;
    const double piece = std::abs(m) < 1e-13 ? -log_y : -std::expm1(m * log_y) / m;
    const double term = coeff * piece;
    sum += term;
    if (k > 2 && m > 1.0 && std::abs(term) < kGammaEps * std::abs(sum)) break;
    coeff *= -1.0 / (k + 1);
  }
  return at_one + sum;
}

double lower_incomplete_gamma(double z, double y) {
  if (!(z > 0.0) || !(y >= 0.0)) {
    throw InvalidArgument("lower_incomplete_gamma requires z > 0 and y >= 0");
  }
  if (y == 0.0) return 0.0;
  if (std::isinf(y)) return std::tgamma(z);
  if (y < z + 1.0) return prefactor(z, y) * gamma_series(z, y) / z;
  return std::tgamma(z) - prefactor(z, y) * gamma_continued_fraction(z, y);
}

double regularized_lower_gamma(double z, double y) {
  if (!(z > 0.0) || !(y >= 0.0)) {
    throw InvalidArgument("regularized_lower_gamma requires z > 0 and y >= 0");
  }
  if (y == 0.0) return 0.0;
  if (std::isinf(y)) return 1.0;
  const double log_pref = z * std::log(y) - y - std::lgamma(z);
  if (y < z + 1.0) return std::exp(log_pref) * gamma_series(z, y) / z;
  return 1.0 - std::exp(log_pref) * gamma_continued_fraction(z, y);
}

double scaled_lower_gamma(double z, double y) {
  if (!(z > 0.0) || !(y >= 0.0)) {
    throw InvalidArgument("scaled_lower_gamma requires z > 0 and y >= 0");
  }
  if (y == 0.0) return 1.0;
  if (y <= 600.0) return std::exp(-y) * gamma_series(z, y);
  return z * std::exp(std::lgamma(z) - z * std::log(y)) * regularized_lower_gamma(z, y);
}

}  // namespace mtf::numerics
