// mtfcost: search-cost experiments for move-to-front lists.
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mtf/errors.hpp"
#include "mtf/experiment.hpp"

namespace ex = mtf::experiment;

int main(int argc, char** argv) {
  CLI::App app{"Search-cost laws of move-to-front lists: analytic limits, exact finite-n laws, "
               "simulation and validation."};
  app.set_version_flag("--version", "mtfcost 1.0");

  std::string command;
  app.add_option("command", command,
                 "analytic | simulate | exact | convergence | lru | order-check")
      ->required()
      ->check(CLI::IsMember({"analytic", "simulate", "exact", "convergence", "lru", "order-check"}));

  // Every value option is kept as a string and only forwarded when given, so
  // that flags override the config file and defaults live in one place.
  std::map<std::string, std::string> values;
  struct ValueOpt {
    const char* flag;
    const char* key;
    const char* help;
  };
  const ValueOpt value_opts[] = {
      {"--family", "family", "law descriptor, e.g. exp(1), pareto(-0.5), beta(1,2), zipf(0.5)"},
      {"--n", "n", "number of items"},
      {"--ordering", "ordering", "initial order: ex | dec | inc"},
      {"--t", "t", "scaled time (or 'stationary')"},
      {"--m", "m", "sample count"},
      {"--seed", "seed", "base seed"},
      {"--delta", "delta", "cache fraction for lru, in (0, 1)"},
      {"--ladder", "ladder", "comma-separated n values for convergence"},
      {"--weights", "weights", "profile JSON to use instead of the family"},
      {"--out", "out", "output directory"},
      {"--grid", "grid", "density grid points"},
      {"--ks-threshold", "ks_threshold", "KS pass threshold for --validate"},
      {"--sampler", "sampler", "fast | event (event needs --weights)"},
  };
  std::map<std::string, std::string> raw;
  for (const auto& o : value_opts) app.add_option(o.flag, raw[o.key], o.help);

  bool stationary = false, validate = false, quenched = false, pac = false;
  auto* f_stat = app.add_flag("--stationary", stationary, "use the stationary regime");
  auto* f_val = app.add_flag("--validate", validate, "compare against the analytic law");
  auto* f_q = app.add_flag("--quenched", quenched, "one weight vector for all samples");
  auto* f_pac = app.add_flag("--pac", pac, "lru: incomplete-gamma cross-check (pareto)");
  std::string config_path;
  app.add_option("--config", config_path, "key=value or JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ex::ExitCode::usage);
  }

  ex::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "error: cannot read config " << config_path << '\n';
        return static_cast<int>(ex::ExitCode::io);
      }
      std::stringstream buf;
      buf << in.rdbuf();
      ex::apply(cfg, ex::parse_config_text(buf.str()));
    }
    for (const auto& o : value_opts) {
      if (app.count(o.flag) > 0) values[o.key] = raw[o.key];
    }
    if (f_stat->count() > 0) values["stationary"] = stationary ? "true" : "false";
    if (f_val->count() > 0) values["validate"] = validate ? "true" : "false";
    if (f_q->count() > 0) values["quenched"] = quenched ? "true" : "false";
    if (f_pac->count() > 0) values["pac"] = pac ? "true" : "false";
    values["command"] = command;
    ex::apply(cfg, values);
    return static_cast<int>(ex::run(cfg, std::cout));
  } catch (const mtf::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ex::ExitCode::io);
  } catch (const mtf::InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return static_cast<int>(ex::ExitCode::usage);
  } catch (const mtf::OutOfRange& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return static_cast<int>(ex::ExitCode::usage);
  } catch (const mtf::SizeError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return static_cast<int>(ex::ExitCode::usage);
  } catch (const mtf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ex::ExitCode::io);
  }
}
