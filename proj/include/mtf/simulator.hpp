#pragma once

#include <cstdint>
#include <vector>

#include "mtf/popularity.hpp"
#include "mtf/rng.hpp"
#include "mtf/sample_batch.hpp"

namespace mtf::sim {

struct CostSample {
  std::int64_t cost;  // 1-based position of the next requested item
  bool unseen;        // that item had not been requested in [0, t)
};

/// Draws items with probabilities p by binary search on the cumulative weights.
class ItemSampler {
 public:
  explicit ItemSampler(std::span<const double> popularities);
  std::size_t draw(Rng& rng) const;

 private:
  std::vector<double> cumulative_;
  std::size_t last_positive_ = 0;
};

/// Plays the unit-rate request stream on an explicit list up to time t and
/// reports the cost of the first request at or after t.
CostSample simulate_event_driven(const RequestProfile& profile, double t, Rng& rng);
std::int64_t simulate_event_driven(const RequestProfile& profile, double t, std::uint64_t seed);

/// Same law in O(n): only the last request time of each item matters.
CostSample sample_transient_fast(const RequestProfile& profile, double t, Rng& rng);
std::int64_t sample_transient_fast(const RequestProfile& profile, double t, std::uint64_t seed);

/// Stationary cost: 1 + #{j ≠ I : E_j < E_I} with E_j ~ Exp(p_j). Items with
/// p_j = 0 have E_j = ∞, which is their exact stationary behaviour (they sit
/// behind every item that has ever been requested).
std::int64_t sample_stationary(const RequestProfile& profile, Rng& rng);
std::int64_t sample_stationary(const RequestProfile& profile, std::uint64_t seed);

struct TimeScales {
  double unit_rate;  // nμt, the time of the unit-total-rate request stream
  double original;   // nμt / Σw, the time when item j is requested at rate w_j
};
TimeScales scaled_time(const RequestProfile& profile, double mu, double t);

enum class Sampler { event_driven, fast, stationary };

/// m costs for one fixed profile at unit-rate time t_unit. Sample k uses stream (seed, k).
SampleBatch batch_profile(const RequestProfile& profile, double t_unit, std::size_t m,
                          std::uint64_t seed, Sampler sampler);

/// m costs S⁽ⁿ⁾(nμt)/n. By default every sample draws a fresh i.i.d. profile
/// (annealed); quenched reuses one profile for all samples.
SampleBatch batch_transient(const LawPtr& law, std::size_t n, Ordering ordering, double t,
                            std::size_t m, std::uint64_t seed, bool quenched = false);
SampleBatch batch_stationary(const LawPtr& law, std::size_t n, std::size_t m,
                             std::uint64_t seed, bool quenched = false);

}  // namespace mtf::sim
