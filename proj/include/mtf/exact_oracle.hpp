#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mtf/popularity.hpp"

namespace mtf::exact {

/// Probabilities indexed by the number of items in front of the requested one
/// (0-based); the 1-based search cost is index + 1.
struct DiscretePmf {
  std::vector<double> probabilities;

  std::size_t size() const { return probabilities.size(); }
  double operator[](std::size_t k) const {
    return k < probabilities.size() ? probabilities[k] : 0.0;
  }
  double total() const;
};

/// Law of a sum of independent Bernoulli(q_j), by O(n²) convolution.
DiscretePmf poisson_binomial(std::span<const double> qs);

/// P(S = k + 1, item i requested in [0, t)) for the 1-based item index i.
double exact_marginal_e(const RequestProfile& profile, std::size_t i, double t, std::size_t k);
/// P(S = k + 1, item i not requested in [0, t)) for the 1-based item index i.
double exact_marginal_o(const RequestProfile& profile, std::size_t i, double t, std::size_t k);

/// Search cost at time t split by whether the requested item was already seen.
struct SearchCostPmf {
  DiscretePmf equilibrium;
  DiscretePmf out;
  DiscretePmf total() const;
};

inline constexpr std::size_t kDefaultCap = 64;

/// Exact finite-n law at time t (unit total request rate). Throws SizeError
/// above the cap.
SearchCostPmf exact_search_cost_law(const RequestProfile& profile, double t,
                                    std::size_t cap = kDefaultCap);
/// Stationary law; zero-rate items never precede a requested item.
DiscretePmf exact_stationary_law(const RequestProfile& profile, std::size_t cap = kDefaultCap);

}  // namespace mtf::exact
