#include "mtf/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mtf/errors.hpp"

namespace mtf::sim {

namespace {

void check_time(double t) {
  if (!(t >= 0.0)) throw InvalidArgument("t must be >= 0");
}

// One Bernoulli(1 − e^{−rate·t}) draw: was the item requested within the last t units?
bool requested_within(Rng& rng, double rate, double t) {
  if (rate == 0.0 || t == 0.0) return false;
  return rng.uniform() < -std::expm1(-rate * t);
}

std::string descriptor(const std::string& family, std::size_t n, Ordering ordering,
                       bool quenched) {
  return "family=" + family + ";n=" + std::to_string(n) + ";ordering=" +
         std::string(to_string(ordering)) + (quenched ? ";quenched" : ";annealed");
}

void push(SampleBatch& batch, std::size_t k, const CostSample& s, std::size_t n) {
  batch.raw[k] = s.cost;
  batch.unseen[k] = s.unseen ? 1 : 0;
  batch.values[k] = static_cast<double>(s.cost) / static_cast<double>(n);
}

SampleBatch empty_batch(std::size_t m, std::size_t n) {
  if (m == 0) throw InvalidArgument("sample count must be >= 1");
  SampleBatch batch;
  batch.values.resize(m);
  batch.raw.resize(m);
  batch.unseen.resize(m);
  batch.count = m;
  batch.n = n;
  batch.normalized = true;
  return batch;
}

}  // namespace

ItemSampler::ItemSampler(std::span<const double> popularities) {
  cumulative_.resize(popularities.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < popularities.size(); ++i) {
    acc += popularities[i];
    cumulative_[i] = acc;
    if (popularities[i] > 0.0) last_positive_ = i;
  }
  if (!(acc > 0.0)) throw DegenerateLaw("no item has positive popularity");
}

std::size_t ItemSampler::draw(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto idx = static_cast<std::size_t>(it - cumulative_.begin());
  return std::min(idx, last_positive_);
}

CostSample simulate_event_driven(const RequestProfile& profile, double t, Rng& rng) {
  check_time(t);
  const std::size_t n = profile.n();
  const ItemSampler items(profile.popularities());
  std::vector<std::size_t> list(n);
  std::vector<std::size_t> where(n);
  std::iota(list.begin(), list.end(), 0);
  std::iota(where.begin(), where.end(), 0);
  std::vector<std::uint8_t> seen(n, 0);
  double clock = rng.exponential(1.0);
  while (clock < t) {
    const std::size_t item = items.draw(rng);
    seen[item] = 1;
    for (std::size_t pos = where[item]; pos > 0; --pos) {
      list[pos] = list[pos - 1];
      where[list[pos]] = pos;
    }
    list[0] = item;
    where[item] = 0;
    clock += rng.exponential(1.0);
  }
  // The next request after t (memoryless) picks its item independently.
  const std::size_t item = items.draw(rng);
  return {static_cast<std::int64_t>(where[item]) + 1, seen[item] == 0};
}

std::int64_t simulate_event_driven(const RequestProfile& profile, double t, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_event_driven(profile, t, rng).cost;
}

CostSample sample_transient_fast(const RequestProfile& profile, double t, Rng& rng) {
  check_time(t);
  const auto p = profile.popularities();
  const std::size_t n = p.size();
  const ItemSampler items(p);
  const std::size_t item = items.draw(rng);
  const double pi = p[item];
  std::int64_t ahead = 0;
  if (requested_within(rng, pi, t)) {
    // Age of the last request of `item`, conditioned to be below t.
    const double age = -std::log1p(-rng.uniform() * -std::expm1(-pi * t)) / pi;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != item && requested_within(rng, p[j], age)) ++ahead;
    }
    return {ahead + 1, false};
  }
  ahead = static_cast<std::int64_t>(item);
  for (std::size_t j = item + 1; j < n; ++j) {
    if (requested_within(rng, p[j], t)) ++ahead;
  }
  return {ahead + 1, true};
}

std::int64_t sample_transient_fast(const RequestProfile& profile, double t, std::uint64_t seed) {
  Rng rng(seed);
  return sample_transient_fast(profile, t, rng).cost;
}

std::int64_t sample_stationary(const RequestProfile& profile, Rng& rng) {
  const auto p = profile.popularities();
  const ItemSampler items(p);
  const std::size_t item = items.draw(rng);
  const double age = rng.exponential(p[item]);
  std::int64_t ahead = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j != item && requested_within(rng, p[j], age)) ++ahead;
  }
  return ahead + 1;
}

std::int64_t sample_stationary(const RequestProfile& profile, std::uint64_t seed) {
  Rng rng(seed);
  return sample_stationary(profile, rng);
}

TimeScales scaled_time(const RequestProfile& profile, double mu, double t) {
  if (!(mu > 0.0)) throw InvalidArgument("mu must be > 0");
  if (!(profile.total_weight() > 0.0)) throw DegenerateLaw("profile has zero total weight");
  const double unit = static_cast<double>(profile.n()) * mu * t;
  return {unit, unit / profile.total_weight()};
}

SampleBatch batch_profile(const RequestProfile& profile, double t_unit, std::size_t m,
                          std::uint64_t seed, Sampler sampler) {
  auto batch = empty_batch(m, profile.n());
  for (std::size_t k = 0; k < m; ++k) {
    Rng rng(seed, k);
    CostSample s{};
    switch (sampler) {
      case Sampler::event_driven:
        s = simulate_event_driven(profile, t_unit, rng);
        break;
      case Sampler::fast:
        s = sample_transient_fast(profile, t_unit, rng);
        break;
      case Sampler::stationary:
        s = {sample_stationary(profile, rng), false};
        break;
    }
    push(batch, k, s, profile.n());
  }
  batch.profile_descriptor = descriptor(profile.family(), profile.n(), profile.ordering(), true);
  batch.t_unit_rate = t_unit;
  batch.t_scaled = t_unit;
  batch.seed = seed;
  return batch;
}

SampleBatch batch_transient(const LawPtr& law, std::size_t n, Ordering ordering, double t,
                            std::size_t m, std::uint64_t seed, bool quenched) {
  if (!law) throw InvalidArgument("missing law");
  if (law->zero_atom() >= 1.0) throw DegenerateLaw("law is concentrated at 0");
  check_time(t);
  const double mu = law->mean();
  const double t_unit = static_cast<double>(n) * mu * t;
  auto batch = empty_batch(m, n);
  if (quenched) {
    // Stream 0 generated the profile; samples use streams 1, 2, ...
    const auto profile = make_iid_profile(law, n, ordering, seed);
    for (std::size_t k = 0; k < m; ++k) {
      Rng rng(seed, k + 1);
      push(batch, k, sample_transient_fast(profile, t_unit, rng), n);
    }
  } else {
    for (std::size_t k = 0; k < m; ++k) {
      Rng rng(seed, k);
      RequestProfile profile(draw_iid_weights(*law, n, ordering, rng), ordering, 1.0, seed,
                             law->name(), law);
      push(batch, k, sample_transient_fast(profile, t_unit, rng), n);
    }
  }
  batch.profile_descriptor = descriptor(law->name(), n, ordering, quenched);
  batch.t_scaled = t;
  batch.t_unit_rate = t_unit;
  batch.seed = seed;
  return batch;
}

SampleBatch batch_stationary(const LawPtr& law, std::size_t n, std::size_t m,
                             std::uint64_t seed, bool quenched) {
  if (!law) throw InvalidArgument("missing law");
  if (law->zero_atom() >= 1.0) throw DegenerateLaw("law is concentrated at 0");
  auto batch = empty_batch(m, n);
  const Ordering ordering = Ordering::exchangeable;
  if (quenched) {
    // Stream 0 generated the profile; samples use streams 1, 2, ...
    const auto profile = make_iid_profile(law, n, ordering, seed);
    for (std::size_t k = 0; k < m; ++k) {
      Rng rng(seed, k + 1);
      push(batch, k, {sample_stationary(profile, rng), false}, n);
    }
  } else {
    for (std::size_t k = 0; k < m; ++k) {
      Rng rng(seed, k);
      RequestProfile profile(draw_iid_weights(*law, n, ordering, rng), ordering, 1.0, seed,
                             law->name(), law);
      push(batch, k, {sample_stationary(profile, rng), false}, n);
    }
  }
  batch.profile_descriptor = descriptor(law->name(), n, ordering, quenched);
  batch.t_scaled = std::numeric_limits<double>::infinity();
  batch.t_unit_rate = std::numeric_limits<double>::infinity();
  batch.seed = seed;
  return batch;
}

}  // namespace mtf::sim
