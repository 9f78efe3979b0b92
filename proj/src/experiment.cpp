#include "mtf/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include "mtf/analytic.hpp"
#include "mtf/errors.hpp"
#include "mtf/exact_oracle.hpp"
#include "mtf/io.hpp"
#include "mtf/simulator.hpp"
#include "mtf/stats.hpp"

namespace mtf::experiment {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "stationary") return analytic::kStationary;
  double x = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw InvalidArgument(key + ": not a number: '" + v + "'");
  }
  return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    // Allow 1e5 style counts.
    const double d = to_double(key, v);
    if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19) {
      throw InvalidArgument(key + ": not a nonnegative integer: '" + v + "'");
    }
    return static_cast<std::uint64_t>(d);
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v.empty() || v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw InvalidArgument(key + ": not a boolean: '" + v + "'");
}

std::vector<std::size_t> to_ladder(const std::string& v) {
  std::vector<std::size_t> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<std::size_t>(to_uint("ladder", item)));
  }
  return out;
}

json time_json(double t) {
  if (std::isfinite(t)) return t;
  return "stationary";
}

// Everything a command needs to know about the workload.
struct Workload {
  LawPtr law;                             // limiting law P
  Ordering ordering;
  std::optional<RequestProfile> profile;  // fixed profile (zipf or weights file)
};

// A fixed deterministic profile belongs to the family; i.i.d. families draw one per use.
Workload resolve(const ExperimentConfig& cfg, std::size_t n) {
  if (!cfg.weights.empty()) {
    auto profile = io::profile_from_json(io::read_json(cfg.weights));
    LawPtr law = profile.limit_law();
    const Ordering o = profile.ordering();
    return {std::move(law), o, std::move(profile)};
  }
  if (const auto alpha = zipf_exponent(cfg.family)) {
    auto profile = make_zipf_profile(*alpha, n);
    LawPtr law = profile.limit_law();
    const Ordering o = profile.ordering();
    return {std::move(law), o, std::move(profile)};
  }
  return {make_law(cfg.family), cfg.ordering, std::nullopt};
}

double effective_t(const ExperimentConfig& cfg) {
  return cfg.stationary ? analytic::kStationary : cfg.t;
}

// Unit-rate time nμt of a fixed profile: Σ of scaled weights times t.
double unit_time(const RequestProfile& profile, double t) {
  if (!std::isfinite(t)) return t;
  return profile.scale() * profile.total_weight() * t;
}

SampleBatch simulate(const ExperimentConfig& cfg, const Workload& w, std::size_t n) {
  const double t = effective_t(cfg);
  const bool event = cfg.sampler == "event";
  if (w.profile) {
    const auto sampler = !std::isfinite(t) ? sim::Sampler::stationary
                         : event           ? sim::Sampler::event_driven
                                           : sim::Sampler::fast;
    auto batch = sim::batch_profile(*w.profile, unit_time(*w.profile, t), cfg.m, cfg.seed, sampler);
    batch.t_scaled = t;
    return batch;
  }
  if (event) throw InvalidArgument("the event-driven sampler needs a fixed profile (--weights)");
  if (!std::isfinite(t)) return sim::batch_stationary(w.law, n, cfg.m, cfg.seed, cfg.quenched);
  return sim::batch_transient(w.law, n, w.ordering, t, cfg.m, cfg.seed, cfg.quenched);
}

void write_config(const ExperimentConfig& cfg, const Workload* w) {
  auto j = cfg.to_json();
  if (w && w->law && !cfg.stationary) {
    const double mu = w->law->mean();
    j["resolved_ordering"] = std::string(to_string(w->ordering));
    if (w->profile) {
      j["t_unit_rate"] = unit_time(*w->profile, cfg.t);
      j["t_original"] = unit_time(*w->profile, cfg.t) / w->profile->total_weight();
    } else {
      // For i.i.d. weights Σw/n → μ, so the original time scale is t itself.
      j["t_unit_rate"] = static_cast<double>(cfg.n) * mu * cfg.t;
      j["t_original"] = cfg.t;
    }
  }
  io::write_json(cfg.out / "config.json", j);
}

analytic::SearchCostLaw limit_law(const Workload& w, double t) {
  if (!w.law) throw InvalidArgument("the profile carries no limiting law");
  return std::isfinite(t) ? analytic::transient_law(w.law, w.ordering, t)
                          : analytic::stationary_law(w.law);
}

}  // namespace

std::optional<double> zipf_exponent(const std::string& family) {
  const std::string f = trim(family);
  if (f.rfind("zipf(", 0) != 0 || f.back() != ')') return std::nullopt;
  return to_double("zipf", trim(std::string_view(f).substr(5, f.size() - 6)));
}

json ExperimentConfig::to_json() const {
  return {{"command", command},   {"family", family},
          {"n", n},               {"ordering", std::string(to_string(ordering))},
          {"t", time_json(stationary ? analytic::kStationary : t)},
          {"m", m},               {"seed", seed},
          {"delta", delta},       {"validate", validate},
          {"quenched", quenched}, {"pac", pac},
          {"ladder", ladder},     {"weights", weights},
          {"out", out.string()},  {"grid", grid},
          {"ks_threshold", ks_threshold}, {"sampler", sampler}};
}

void ExperimentConfig::check() const {
  if (n == 0) throw InvalidArgument("n must be >= 1");
  if (m == 0) throw InvalidArgument("m must be >= 1");
  if (!stationary && !(t >= 0.0 && std::isfinite(t))) throw InvalidArgument("t must be >= 0");
  if (grid < 2) throw InvalidArgument("grid must be >= 2");
  if (sampler != "fast" && sampler != "event") throw InvalidArgument("sampler must be fast|event");
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::parse_error& e) {
      throw InvalidArgument(std::string("config JSON: ") + e.what());
    }
    for (const auto& [k, v] : j.items()) {
      if (v.is_string()) {
        out[k] = v.get<std::string>();
      } else if (v.is_array()) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ",") + x.dump();
        out[k] = s;
      } else {
        out[k] = v.dump();
      }
    }
    return out;
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key=value");
    }
    out[trim(std::string_view(line).substr(0, eq))] = trim(std::string_view(line).substr(eq + 1));
  }
  return out;
}

void apply(ExperimentConfig& cfg, const std::map<std::string, std::string>& settings) {
  for (const auto& [key, v] : settings) {
    if (key == "command") {
      cfg.command = v;
    } else if (key == "family") {
      cfg.family = v;
    } else if (key == "n") {
      cfg.n = static_cast<std::size_t>(to_uint(key, v));
    } else if (key == "ordering") {
      cfg.ordering = parse_ordering(v);
    } else if (key == "t") {
      const double t = to_double(key, v);
      cfg.stationary = !std::isfinite(t);
      if (std::isfinite(t)) cfg.t = t;
    } else if (key == "stationary") {
      cfg.stationary = to_bool(key, v);
    } else if (key == "m") {
      cfg.m = static_cast<std::size_t>(to_uint(key, v));
    } else if (key == "seed") {
      cfg.seed = to_uint(key, v);
    } else if (key == "delta") {
      cfg.delta = to_double(key, v);
    } else if (key == "validate") {
      cfg.validate = to_bool(key, v);
    } else if (key == "quenched") {
      cfg.quenched = to_bool(key, v);
    } else if (key == "pac") {
      cfg.pac = to_bool(key, v);
    } else if (key == "ladder") {
      cfg.ladder = to_ladder(v);
    } else if (key == "weights") {
      cfg.weights = v;
    } else if (key == "out") {
      cfg.out = v;
    } else if (key == "grid") {
      cfg.grid = static_cast<std::size_t>(to_uint(key, v));
    } else if (key == "ks_threshold") {
      cfg.ks_threshold = to_double(key, v);
    } else if (key == "sampler") {
      cfg.sampler = v;
    } else {
      throw InvalidArgument("unknown setting '" + key + "'");
    }
  }
}

ExitCode cmd_analytic(const ExperimentConfig& cfg, std::ostream& log) {
  const auto w = resolve(cfg, cfg.n);
  const double t = effective_t(cfg);
  const auto law = limit_law(w, t);
  const auto tv = analytic::tv_distance_to_stationary(w.law ? *w.law : law.law(), w.ordering, t);
  io::write_text(cfg.out / "density.csv", io::density_csv(law, cfg.grid));
  const json summary = {{"family", w.law->name()},
                        {"ordering", std::string(to_string(w.ordering))},
                        {"t", time_json(t)},
                        {"threshold", law.threshold()},
                        {"out_mass", law.out_mass()},
                        {"tv_exact", tv.exact},
                        {"tv_bound", tv.bound}};
  io::write_json(cfg.out / "summary.json", summary);
  write_config(cfg, &w);
  log << "threshold=" << io::decimal(law.threshold()) << " out_mass=" << io::decimal(law.out_mass())
      << " tv_exact=" << io::decimal(tv.exact) << " tv_bound=" << io::decimal(tv.bound) << '\n';
  return ExitCode::ok;
}

ExitCode cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  const auto w = resolve(cfg, cfg.n);
  const auto batch = simulate(cfg, w, cfg.n);
  io::write_text(cfg.out / "samples.csv", io::samples_csv(batch));
  auto header = io::batch_header(batch);
  header["family"] = cfg.weights.empty() ? cfg.family : w.profile->family();
  header["ordering"] = std::string(to_string(w.ordering));
  io::write_json(cfg.out / "samples.json", header);
  write_config(cfg, &w);
  log << "wrote " << batch.count << " samples to " << (cfg.out / "samples.csv").string() << '\n';
  if (!cfg.validate) return ExitCode::ok;

  const double t = effective_t(cfg);
  const auto law = limit_law(w, t);
  const double ks = stats::ks_distance(batch, [&](double x) { return law.cdf(x); });
  const double dkw = stats::dkw_band(batch.count, 0.99);
  const double unseen = header.at("unseen_fraction").get<double>();
  stats::Report report;
  report.name = "ks_to_limit";
  report.statistic = ks;
  report.threshold = cfg.ks_threshold;
  report.pass = ks <= cfg.ks_threshold;
  report.details = {{"dkw_99", dkw},
                    {"out_fraction", unseen},
                    {"out_mass", law.out_mass()},
                    {"threshold_x", law.threshold()},
                    {"histogram_tv",
                     stats::histogram_tv(batch.values, [&](double x) { return law.cdf(x); })}};
  io::write_json(cfg.out / "report.json", report.to_json());
  log << "ks=" << io::decimal(ks) << " threshold=" << io::decimal(cfg.ks_threshold)
      << " dkw99=" << io::decimal(dkw) << " out_fraction=" << io::decimal(unseen)
      << " out_mass=" << io::decimal(law.out_mass()) << (report.pass ? " PASS" : " FAIL") << '\n';
  return report.pass ? ExitCode::ok : ExitCode::validation_failed;
}

ExitCode cmd_exact(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.n > exact::kDefaultCap && cfg.weights.empty()) {
    throw SizeError("exact laws are limited to n <= " + std::to_string(exact::kDefaultCap));
  }
  auto w = resolve(cfg, cfg.n);
  if (!w.profile) w.profile = make_iid_profile(w.law, cfg.n, w.ordering, cfg.seed);
  const auto& profile = *w.profile;
  std::string csv;
  double total = 0.0;
  if (cfg.stationary) {
    const auto pmf = exact::exact_stationary_law(profile);
    csv = io::pmf_csv(pmf);
    total = pmf.total();
  } else {
    // Finite-n laws take the unit-rate time directly.
    const auto pmf = exact::exact_search_cost_law(profile, cfg.t);
    csv = io::pmf_csv(pmf);
    total = pmf.equilibrium.total() + pmf.out.total();
  }
  io::write_text(cfg.out / "pmf.csv", csv);
  io::write_json(cfg.out / "profile.json", io::profile_to_json(profile));
  write_config(cfg, &w);
  log << "wrote pmf over " << profile.n() << " positions, total mass " << io::decimal(total) << '\n';
  return ExitCode::ok;
}

ExitCode cmd_convergence(const ExperimentConfig& cfg, std::ostream& log) {
  auto ladder = cfg.ladder;
  if (ladder.empty()) ladder = {cfg.n};
  const double t = effective_t(cfg);
  std::ostringstream csv;
  csv << "n,w1,ks,out_mass_error\n";
  json rows = json::array();
  std::optional<Workload> first;
  for (std::size_t n : ladder) {
    if (n == 0) throw InvalidArgument("ladder entries must be >= 1");
    auto w = resolve(cfg, n);
    const auto law = limit_law(w, t);
    const RequestProfile profile =
        w.profile ? *w.profile : make_iid_profile(w.law, n, w.ordering, cfg.seed);
    const double w1 = wasserstein1(empirical_measure(profile, profile.scale() *
                                                                   profile.total_weight() /
                                                                   static_cast<double>(n)),
                                   *w.law);
    const auto batch = simulate(cfg, w, n);
    const double ks = stats::ks_distance(batch, [&](double x) { return law.cdf(x); });
    const auto header = io::batch_header(batch);
    const double out_err = std::abs(header.at("unseen_fraction").get<double>() - law.out_mass());
    csv << n << ',' << io::decimal(w1) << ',' << io::decimal(ks) << ',' << io::decimal(out_err)
        << '\n';
    rows.push_back({{"n", n}, {"w1", w1}, {"ks", ks}, {"out_mass_error", out_err}});
    log << "n=" << n << " w1=" << io::decimal(w1) << " ks=" << io::decimal(ks)
        << " out_mass_error=" << io::decimal(out_err) << '\n';
    if (!first) first = std::move(w);
  }
  io::write_text(cfg.out / "convergence.csv", csv.str());
  io::write_json(cfg.out / "convergence.json", {{"rows", rows}});
  write_config(cfg, first ? &*first : nullptr);
  return ExitCode::ok;
}

ExitCode cmd_lru(const ExperimentConfig& cfg, std::ostream& log) {
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  const auto w = resolve(cfg, cfg.n);
  const double t = effective_t(cfg);
  const double fault = analytic::lru_fault_probability(*w.law, w.ordering, t, cfg.delta);
  json result = {{"family", w.law->name()},
                 {"ordering", std::string(to_string(w.ordering))},
                 {"t", time_json(t)},
                 {"delta", cfg.delta},
                 {"fault_probability", fault}};
  ExitCode code = ExitCode::ok;
  log << "fault_probability=" << io::decimal(fault) << '\n';
  if (cfg.pac) {
    const auto* pareto = dynamic_cast<const ParetoLaw*>(w.law.get());
    if (!pareto) throw InvalidArgument("--pac needs family=pareto(alpha) or zipf(alpha < 0)");
    if (!std::isfinite(t)) throw InvalidArgument("--pac needs a finite t");
    const double pac = analytic::pac_fault_probability(pareto->alpha(), t, cfg.delta);
    const double tail =
        analytic::lru_fault_probability(*w.law, Ordering::decreasing, t, cfg.delta);
    stats::Report report{"pac_vs_tail_quadrature", std::abs(pac - tail), 1e-6,
                         std::abs(pac - tail) <= 1e-6, {{"pac", pac}, {"tail", tail}}};
    result["pac"] = report.to_json();
    log << "pac=" << io::decimal(pac) << " tail=" << io::decimal(tail)
        << (report.pass ? " PASS" : " FAIL") << '\n';
    if (!report.pass) code = ExitCode::validation_failed;
  }
  io::write_json(cfg.out / "lru.json", result);
  write_config(cfg, &w);
  return code;
}

ExitCode cmd_order_check(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.stationary) throw InvalidArgument("order-check compares transient laws; give --t");
  const auto law = make_law(cfg.family);
  const auto dec = analytic::transient_law(law, Ordering::decreasing, cfg.t);
  const auto ex = analytic::transient_law(law, Ordering::exchangeable, cfg.t);
  const auto inc = analytic::transient_law(law, Ordering::increasing, cfg.t);
  const auto r1 = stats::stochastic_order_check(dec, ex, 200, 1e-8);
  const auto r2 = stats::stochastic_order_check(ex, inc, 200, 1e-8);
  const auto order_json = [](const stats::OrderReport& r) {
    return json{{"max_violation", r.max_violation}, {"worst_x", r.worst_x},
                {"slack", r.slack},                 {"grid", r.grid},
                {"pass", r.pass}};
  };
  stats::Report report{"analytic_cdf_dominance", std::max(r1.max_violation, r2.max_violation),
                       1e-8, r1.pass && r2.pass,
                       {{"decreasing_vs_exchangeable", order_json(r1)},
                        {"exchangeable_vs_increasing", order_json(r2)}}};
  log << "analytic dec>=ex: " << (r1.pass ? "PASS" : "FAIL") << " ex>=inc: "
      << (r2.pass ? "PASS" : "FAIL") << '\n';
  if (cfg.validate) {
    // Transient batches of each ordering against each other, DKW slack at 99%.
    auto c = cfg;
    std::vector<SampleBatch> batches;
    for (auto o : {Ordering::decreasing, Ordering::exchangeable, Ordering::increasing}) {
      c.ordering = o;
      batches.push_back(simulate(c, {law, o, std::nullopt}, c.n));
    }
    const auto e1 = stats::stochastic_order_check(batches[0], batches[1]);
    const auto e2 = stats::stochastic_order_check(batches[1], batches[2]);
    report.details["empirical_decreasing_vs_exchangeable"] = order_json(e1);
    report.details["empirical_exchangeable_vs_increasing"] = order_json(e2);
    report.pass = report.pass && e1.pass && e2.pass;
    log << "empirical dec>=ex: " << (e1.pass ? "PASS" : "FAIL") << " ex>=inc: "
        << (e2.pass ? "PASS" : "FAIL") << '\n';
  }
  io::write_json(cfg.out / "report.json", report.to_json());
  const Workload w{law, cfg.ordering, std::nullopt};
  write_config(cfg, &w);
  return report.pass ? ExitCode::ok : ExitCode::validation_failed;
}

ExitCode run(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.check();
  if (cfg.command == "analytic") return cmd_analytic(cfg, log);
  if (cfg.command == "simulate") return cmd_simulate(cfg, log);
  if (cfg.command == "exact") return cmd_exact(cfg, log);
  if (cfg.command == "convergence") return cmd_convergence(cfg, log);
  if (cfg.command == "lru") return cmd_lru(cfg, log);
  if (cfg.command == "order-check") return cmd_order_check(cfg, log);
  throw InvalidArgument("unknown command '" + cfg.command + "'");
}

}  // namespace mtf::experiment
