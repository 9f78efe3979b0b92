#include "mtf/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mtf/errors.hpp"

namespace mtf::io {

std::string hex_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  char* p = buf;
  if (std::signbit(v)) {
    *p++ = '-';
    v = -v;
  }
  *p++ = '0';
  *p++ = 'x';
  const auto res = std::to_chars(p, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

double parse_hex_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t pos = 0;
  bool negative = false;
  if (pos < s.size() && s[pos] == '-') {
    negative = true;
    ++pos;
  }
  if (s.compare(pos, 2, "0x") == 0 || s.compare(pos, 2, "0X") == 0) pos += 2;
  double v = 0.0;
  const auto res = std::from_chars(s.data() + pos, s.data() + s.size(), v, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidArgument("not a hexadecimal float: " + s);
  }
  return negative ? -v : v;
}

std::string decimal(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

nlohmann::json profile_to_json(const RequestProfile& profile) {
  nlohmann::json w = nlohmann::json::array();
  for (double x : profile.weights()) w.push_back(hex_double(x));
  return {{"n", profile.n()},
          {"ordering", std::string(to_string(profile.ordering()))},
          {"seed", profile.seed()},
          {"scale", hex_double(profile.scale())},
          {"family", profile.family()},
          {"weights", w}};
}

RequestProfile profile_from_json(const nlohmann::json& j) {
  try {
    std::vector<double> w;
    for (const auto& x : j.at("weights")) {
      w.push_back(x.is_string() ? parse_hex_double(x.get<std::string>()) : x.get<double>());
    }
    if (j.contains("n") && j.at("n").get<std::size_t>() != w.size()) {
      throw InvalidArgument("profile n does not match the weight count");
    }
    const auto& s = j.value("scale", nlohmann::json(1.0));
    const double scale = s.is_string() ? parse_hex_double(s.get<std::string>()) : s.get<double>();
    const std::string family = j.value("family", std::string("custom"));
    LawPtr law;
    try {
      law = make_law(family);
    } catch (const Error&) {
      // Not every profile comes from a named law.
    }
    return RequestProfile(std::move(w), parse_ordering(j.value("ordering", std::string("ex"))),
                          scale, j.value("seed", std::uint64_t{0}), family, std::move(law));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed profile JSON: ") + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

std::string density_csv(const analytic::SearchCostLaw& law, std::size_t points) {
  if (points < 2) throw InvalidArgument("a density grid needs at least 2 points");
  std::ostringstream out;
  out << "x,f,F,piece\n";
  for (std::size_t k = 0; k < points; ++k) {
    const double x = static_cast<double>(k) / static_cast<double>(points - 1);
    out << decimal(x) << ',' << decimal(law.density(x)) << ',' << decimal(law.cdf(x)) << ','
        << (x < law.threshold() ? "eq" : "out") << '\n';
  }
  return out.str();
}

std::string samples_csv(const SampleBatch& batch) {
  std::ostringstream out;
  out << "index,raw_cost,normalized_cost\n";
  for (std::size_t k = 0; k < batch.values.size(); ++k) {
    out << k << ',';
    if (k < batch.raw.size()) out << batch.raw[k];
    out << ',' << decimal(batch.values[k]) << '\n';
  }
  return out.str();
}

nlohmann::json batch_header(const SampleBatch& batch) {
  const auto finite_or_string = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return "stationary";
  };
  std::size_t unseen = 0;
  for (auto u : batch.unseen) unseen += u;
  return {{"n", batch.n},
          {"m", batch.count},
          {"seed", batch.seed},
          {"t", finite_or_string(batch.t_scaled)},
          {"t_unit_rate", finite_or_string(batch.t_unit_rate)},
          {"profile", batch.profile_descriptor},
          {"unseen_fraction", batch.count ? static_cast<double>(unseen) / batch.count : 0.0}};
}

std::string pmf_csv(const exact::SearchCostPmf& pmf) {
  std::ostringstream out;
  out << "k,p_e,p_o,p_total\n";
  const std::size_t n = std::max(pmf.equilibrium.size(), pmf.out.size());
  for (std::size_t k = 0; k < n; ++k) {
    out << k + 1 << ',' << decimal(pmf.equilibrium[k]) << ',' << decimal(pmf.out[k]) << ','
        << decimal(pmf.equilibrium[k] + pmf.out[k]) << '\n';
  }
  return out.str();
}

std::string pmf_csv(const exact::DiscretePmf& stationary) {
  std::ostringstream out;
  out << "k,p_e,p_o,p_total\n";
  for (std::size_t k = 0; k < stationary.size(); ++k) {
    out << k + 1 << ',' << decimal(stationary[k]) << ",0," << decimal(stationary[k]) << '\n';
  }
  return out.str();
}

}  // namespace mtf::io
