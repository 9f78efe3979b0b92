#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtf/popularity.hpp"

namespace mtf::experiment {

enum class ExitCode : int { ok = 0, usage = 2, validation_failed = 3, io = 4 };

struct ExperimentConfig {
  std::string command;
  std::string family = "exp(1)";  // law descriptor or zipf(α)
  std::size_t n = 1000;
  Ordering ordering = Ordering::exchangeable;
  double t = 1.0;
  bool stationary = false;
  std::size_t m = 100000;
  std::uint64_t seed = 1;
  double delta = 0.5;
  bool validate = false;
  bool quenched = false;
  bool pac = false;
  std::vector<std::size_t> ladder;
  std::string weights;  // profile JSON replacing the family-generated profile
  std::filesystem::path out = "out";
  std::size_t grid = 201;
  double ks_threshold = 0.02;
  std::string sampler = "fast";  // fast | event

  nlohmann::json to_json() const;
  void check() const;
};

/// Parses flat key=value lines ('#' starts a comment) or a JSON object.
std::map<std::string, std::string> parse_config_text(const std::string& text);
/// Applies string settings on top of cfg. Unknown keys throw InvalidArgument.
void apply(ExperimentConfig& cfg, const std::map<std::string, std::string>& settings);

/// Runs cfg.command and writes its files under cfg.out. One-line results go to `log`.
ExitCode run(const ExperimentConfig& cfg, std::ostream& log);

ExitCode cmd_analytic(const ExperimentConfig& cfg, std::ostream& log);
ExitCode cmd_simulate(const ExperimentConfig& cfg, std::ostream& log);
ExitCode cmd_exact(const ExperimentConfig& cfg, std::ostream& log);
ExitCode cmd_convergence(const ExperimentConfig& cfg, std::ostream& log);
ExitCode cmd_lru(const ExperimentConfig& cfg, std::ostream& log);
ExitCode cmd_order_check(const ExperimentConfig& cfg, std::ostream& log);

/// Zipf exponent of a "zipf(α)" descriptor, if it is one.
std::optional<double> zipf_exponent(const std::string& family);

}  // namespace mtf::experiment
