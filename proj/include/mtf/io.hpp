#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mtf/analytic.hpp"
#include "mtf/exact_oracle.hpp"
#include "mtf/popularity.hpp"
#include "mtf/sample_batch.hpp"

namespace mtf::io {

/// Exact text form of a double: "0x1.8p+0" style, with "inf"/"nan" spelled out.
std::string hex_double(double v);
double parse_hex_double(const std::string& s);

/// {n, ordering, seed, scale, family, weights}; weights are hex strings so the
/// round trip is bit-exact.
nlohmann::json profile_to_json(const RequestProfile& profile);
/// The limit law is reattached from the family descriptor when it parses.
RequestProfile profile_from_json(const nlohmann::json& j);

/// Shortest round-trip decimal form.
std::string decimal(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Header x,f,F,piece on `points` equally spaced x in [0, 1]. The piece column
/// says which side of the threshold x lies on.
std::string density_csv(const analytic::SearchCostLaw& law, std::size_t points);
/// Header index,raw_cost,normalized_cost (raw_cost empty for limiting draws).
std::string samples_csv(const SampleBatch& batch);
nlohmann::json batch_header(const SampleBatch& batch);
/// Header k,p_e,p_o,p_total with the 1-based cost k.
std::string pmf_csv(const exact::SearchCostPmf& pmf);
std::string pmf_csv(const exact::DiscretePmf& stationary);

}  // namespace mtf::io
