#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mtf {

/// Monte-Carlo draws of a search cost together with the metadata needed to
/// reproduce them.
struct SampleBatch {
  std::vector<double> values;        // normalized costs S/n, or limiting draws in [0, 1]
  std::vector<std::int64_t> raw;     // 1-based integer costs; empty for limiting draws
  std::vector<std::uint8_t> unseen;  // 1 when the requested item was not requested before t
  bool normalized = true;
  std::string profile_descriptor;
  std::size_t n = 0;
  double t_scaled = 0.0;
  double t_unit_rate = 0.0;
  std::uint64_t seed = 0;
  std::size_t count = 0;
};

}  // namespace mtf
