#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <doctest.h>

#include "mtf/errors.hpp"
#include "mtf/experiment.hpp"
#include "mtf/io.hpp"

using namespace mtf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mtfcost_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MTFCOST_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("hex doubles round-trip bit for bit") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::ldexp(u(gen), static_cast<int>(gen() % 200) - 100);
    CHECK(io::parse_hex_double(io::hex_double(x)) == x);
  }
  CHECK(io::hex_double(1.5) == "0x1.8p+0");
  CHECK(io::parse_hex_double(io::hex_double(-0.0)) == 0.0);
  CHECK(std::signbit(io::parse_hex_double(io::hex_double(-0.0))));
  CHECK(std::isinf(io::parse_hex_double("inf")));
  CHECK_THROWS_AS(io::parse_hex_double("0xzz"), InvalidArgument);
}

TEST_CASE("profile JSON round-trip") {
  const auto p = make_iid_profile(make_law("gamma(2)"), 50, Ordering::decreasing, 9);
  const auto j = io::profile_to_json(p);
  const auto back = io::profile_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.n() == 50);
  CHECK(back.ordering() == Ordering::decreasing);
  CHECK(back.seed() == 9);
  CHECK(back.family() == "gamma(2)");
  CHECK(back.limit_law() != nullptr);
  for (std::size_t i = 0; i < 50; ++i) CHECK(back.weights()[i] == p.weights()[i]);
}

TEST_CASE("config parsing") {
  const auto kv = experiment::parse_config_text("# comment\nfamily = exp(1)\nn=10 # trailing\nt=stationary\n");
  CHECK(kv.at("family") == "exp(1)");
  CHECK(kv.at("n") == "10");
  experiment::ExperimentConfig cfg;
  experiment::apply(cfg, kv);
  CHECK(cfg.n == 10);
  CHECK(cfg.stationary);

  const auto js = experiment::parse_config_text(R"j({"family": "beta(1,2)", "m": 500, "ladder": [10, 20], "validate": true})j");
  experiment::apply(cfg, js);
  CHECK(cfg.family == "beta(1,2)");
  CHECK(cfg.m == 500);
  CHECK(cfg.ladder == std::vector<std::size_t>{10, 20});
  CHECK(cfg.validate);
  CHECK_THROWS_AS(experiment::apply(cfg, {{"colour", "blue"}}), InvalidArgument);
  CHECK_THROWS_AS(experiment::apply(cfg, {{"n", "ten"}}), InvalidArgument);
  CHECK_THROWS_AS(experiment::parse_config_text("family"), InvalidArgument);
  CHECK(experiment::zipf_exponent("zipf(-0.5)").value() == -0.5);
  CHECK_FALSE(experiment::zipf_exponent("exp(1)").has_value());
}

TEST_CASE("analytic command") {
  const auto dir = scratch("analytic");
  CHECK(run_cli("analytic --family 'exp(1)' --t 1 --out " + dir.string()) == 0);
  const auto summary = io::read_json(dir / "summary.json");
  CHECK(summary.at("threshold").get<double>() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(summary.at("out_mass").get<double>() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(summary.at("tv_exact").get<double>() == doctest::Approx(0.0625).epsilon(1e-8));
  CHECK(summary.at("tv_bound").get<double>() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(fs::exists(dir / "config.json"));
  const auto csv = slurp(dir / "density.csv");
  CHECK(csv.rfind("x,f,F,piece\n", 0) == 0);

  CHECK(run_cli("analytic --family 'dirac(1)' --t 1 --grid 11 --out " + dir.string()) == 0);
  std::istringstream rows(slurp(dir / "density.csv"));
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    CHECK(std::stod(line.substr(a + 1, b - a - 1)) == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(io::read_json(dir / "summary.json").at("threshold").get<double>() ==
        doctest::Approx(1.0 - std::exp(-1.0)));

  CHECK(run_cli("analytic --family 'geometric(0.5)' --t 0.69314718055994530942 --out " + dir.string()) == 0);
  CHECK(io::read_json(dir / "summary.json").at("threshold").get<double>() ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  CHECK(run_cli("analytic --family 'pareto(0.5)' --out " + dir.string()) == 2);
  CHECK(run_cli("analytic --family 'nonsense' --out " + dir.string()) == 2);
}

TEST_CASE("simulate command is deterministic and validates") {
  const auto a = scratch("sim_a");
  const auto b = scratch("sim_b");
  const std::string args = "simulate --family 'exp(1)' --n 200 --t 1 --m 5000 --seed 4 --validate --ks-threshold 0.05 --out ";
  CHECK(run_cli(args + a.string()) == 0);
  CHECK(run_cli(args + b.string()) == 0);
  CHECK(slurp(a / "samples.csv") == slurp(b / "samples.csv"));
  const auto header = io::read_json(a / "samples.json");
  for (const char* key : {"n", "ordering", "t", "t_unit_rate", "seed", "m", "family"}) {
    CHECK(header.contains(key));
  }
  const auto report = io::read_json(a / "report.json");
  CHECK(report.at("pass").get<bool>());
  CHECK(report.at("statistic").get<double>() <= 0.05);
  const auto config = io::read_json(a / "config.json");
  CHECK(config.at("t_unit_rate").get<double>() == doctest::Approx(200.0));

  // An impossible threshold turns into the validation exit code.
  CHECK(run_cli("simulate --family 'exp(1)' --n 50 --m 2000 --validate --ks-threshold 1e-9 --out " + a.string()) == 3);
}

TEST_CASE("simulate with a stationary Dirac profile") {
  const auto dir = scratch("sim_stat");
  CHECK(run_cli("simulate --family 'dirac(1)' --stationary --n 1000 --m 20000 --validate --out " + dir.string()) == 0);
  const auto report = io::read_json(dir / "report.json");
  CHECK(report.at("statistic").get<double>() <=
        report.at("details").at("dkw_99").get<double>() + 1e-3);
}

TEST_CASE("exact command") {
  const auto dir = scratch("exact");
  CHECK(run_cli("exact --family 'exp(1)' --n 1 --t 0.5 --out " + dir.string()) == 0);
  std::istringstream rows(slurp(dir / "pmf.csv"));
  std::string header, row;
  std::getline(rows, header);
  std::getline(rows, row);
  CHECK(header == "k,p_e,p_o,p_total");
  std::stringstream fields(row);
  std::string k, pe, po;
  std::getline(fields, k, ',');
  std::getline(fields, pe, ',');
  std::getline(fields, po, ',');
  CHECK(std::stod(pe) == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-12));
  CHECK(std::stod(po) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

  // A profile file replaces the family.
  const auto prof = make_iid_profile(make_law("exp(1)"), 4, Ordering::exchangeable, 2);
  io::write_json(dir / "p.json", io::profile_to_json(prof));
  CHECK(run_cli("exact --weights " + (dir / "p.json").string() + " --t 2 --out " + dir.string()) == 0);
  CHECK(run_cli("exact --n 100 --out " + dir.string()) == 2);
}

TEST_CASE("lru command") {
  const auto dir = scratch("lru");
  CHECK(run_cli("lru --family 'exp(1)' --delta 0.5 --t 1 --out " + dir.string()) == 0);
  CHECK(io::read_json(dir / "lru.json").at("fault_probability").get<double>() ==
        doctest::Approx(0.25).epsilon(1e-10));
  CHECK(run_cli("lru --family 'pareto(-0.5)' --ordering dec --delta 0.3 --t 1 --pac --out " + dir.string()) == 0);
  const auto pac = io::read_json(dir / "lru.json").at("pac");
  CHECK(pac.at("pass").get<bool>());
  CHECK(run_cli("lru --family 'exp(1)' --delta 1.5 --out " + dir.string()) == 2);
  CHECK(run_cli("lru --family 'exp(1)' --delta 0.5 --pac --out " + dir.string()) == 2);
}

TEST_CASE("convergence and order-check commands") {
  const auto dir = scratch("conv");
  CHECK(run_cli("convergence --family 'dirac(1)' --ladder 100,400 --m 5000 --out " + dir.string()) == 0);
  const auto rows = io::read_json(dir / "convergence.json").at("rows");
  CHECK(rows.size() == 2);
  CHECK(rows[1].at("w1").get<double>() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(run_cli("convergence --family 'zipf(-0.5)' --ladder 200 --m 2000 --out " + dir.string()) == 0);
  CHECK(run_cli("order-check --family 'exp(1)' --t 0.5 --out " + dir.string()) == 0);
  CHECK(io::read_json(dir / "report.json").at("pass").get<bool>());
}

TEST_CASE("config file with flag overrides") {
  const auto dir = scratch("config");
  io::write_text(dir / "run.cfg", "family=exp(1)\nt=1\ndelta=0.9\nout=" + dir.string() + "\n");
  CHECK(run_cli("lru --config " + (dir / "run.cfg").string() + " --delta 0.5") == 0);
  const auto j = io::read_json(dir / "lru.json");
  CHECK(j.at("delta").get<double>() == 0.5);
  CHECK(j.at("fault_probability").get<double>() == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(run_cli("lru --config /nonexistent/none.cfg") == 4);
}
