#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qldp/cli/commands.hpp"
#include "qldp/cli/config.hpp"
#include "qldp/error.hpp"
#include "support.hpp"

using namespace qldp;
using namespace qldp::cli;
using nlohmann::json;
using Catch::Matchers::WithinAbs;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / "qldp_test_cli" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json contact_config(const fs::path& out) {
  json j = json::parse(R"({
    "environment": {"kind": "periodic", "letters": [{"label": "x"}]},
    "model": {"builder": "table", "letters": {"*": {"p": [0.6, 0.4], "reward": [{"point": 1, "mass": 1}]}}},
    "horizon": 400,
    "seed": 7,
    "phi_grid": {"min": -10, "max": 15, "step": 0.05},
    "w_grid": {"min": 0.5, "max": 1, "step": 0.05},
    "t_list": [100, 200, 400],
    "mc": {"n_samples": 2000, "delta": 0.05, "batch_partition": 4, "t": 60}
  })");
  j["output_dir"] = out.string();
  return j;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("grids") {
  GridSpec g{{-0.3}, {0.3}, {0.1}};
  const auto pts = g.points();
  REQUIRE(pts.size() == 7);
  CHECK(pts[3][0] == 0.0);
  CHECK_THAT(pts.back()[0], WithinAbs(0.3, 1e-15));
  GridSpec g2{{0.0, -1.0}, {1.0, 1.0}, {0.5, 1.0}};
  const auto p2 = g2.points();
  REQUIRE(p2.size() == 9);
  CHECK(p2[0] == std::vector<double>{0.0, -1.0});
  CHECK(p2[1] == std::vector<double>{0.0, 0.0});
  CHECK(p2[3] == std::vector<double>{0.5, -1.0});
}

TEST_CASE("config parsing and validation") {
  const auto dir = scratch("parse");
  const auto c = parse_config(contact_config(dir));
  CHECK(c.horizon == 400);
  CHECK(c.t_max() == 400);
  CHECK(c.mc_t() == 60);
  CHECK(c.route == RouteChoice::Both);
  CHECK(c.kind == RateKind::Constrained);
  CHECK_FALSE(c.ell.has_value());

  auto j = contact_config(dir);
  j["ell"] = "-inf";
  CHECK(parse_config(j).ell->is_minus_infinity());
  j["ell"] = -0.5;
  CHECK(parse_config(j).ell->value() == -0.5);

  auto bad = [&](auto mutate) {
    auto k = contact_config(dir);
    mutate(k);
    return test::error_code_of([&] { parse_config(k).validate(); });
  };
  CHECK(bad([](json& k) { k["horizon"] = 100; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](json& k) { k["phi_grid"]["step"] = 0; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](json& k) { k["w_grid"]["max"] = 0.1; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](json& k) { k["route"] = "sideways"; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](json& k) { k["kind"] = "partial"; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](json& k) { k["ell"] = "minus"; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](json& k) { k.erase("model"); }) == ErrorCode::InvalidConfig);
  CHECK(bad([](json& k) { k["environment"]["kind"] = "spiral"; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](json& k) { k["environment"]["letters"] = json::array(); }) == ErrorCode::InvalidSpec);

  auto k = contact_config(dir);
  k["model"]["builder"] = "mystery";
  const auto cfg = parse_config(k);
  CHECK(test::error_code_of([&] { build_model(cfg.model, *cfg.environment); }) == ErrorCode::InvalidConfig);

  const auto file = dir / "cfg.json";
  std::ofstream(file) << contact_config(dir).dump(2);
  CHECK(load_config(file).horizon == 400);
  CHECK(test::error_code_of([&] { load_config(dir / "missing.json"); }) == ErrorCode::InvalidConfig);
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(test::error_code_of([&] { load_config(dir / "broken.json"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("environment kinds parse") {
  CHECK(parse_environment(json::parse(R"({"kind": "iid", "letters": [{"label": "a"}, {"label": "b"}], "law": [0.3, 0.7]})")).kind ==
        EnvKind::IidSequence);
  CHECK(parse_environment(json::parse(R"({"kind": "markov", "letters": [{"label": "a"}, {"label": "b"}],
                                          "transition": [[0.9, 0.1], [0.2, 0.8]], "initial": [1, 0]})"))
            .kind == EnvKind::MarkovShift);
  CHECK(parse_environment(json::parse(R"({"kind": "gauss_hermite", "nodes": 7})")).states.size() == 7);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ErrorCode::NotPeriodic) == 2);
  CHECK(exit_code_for(ErrorCode::InvalidConfig) == 2);
  CHECK(exit_code_for(ErrorCode::OutOfHorizon) == 2);
  CHECK(exit_code_for(ErrorCode::InvalidRho) == 2);
  CHECK(exit_code_for(ErrorCode::Diverged) == 1);
  CHECK(exit_code_for(ErrorCode::NonConvexCurve) == 1);
  CHECK(exit_code_for(ErrorCode::CapExceeded) == 3);
  CHECK(exit_code_for(ErrorCode::TooManyStates) == 3);
  CHECK(exit_code_for(ErrorCode::MemoryCap) == 3);
}

TEST_CASE("cgf command on geometric pinning") {
  const auto dir = scratch("cgf");
  json j = contact_config(dir);
  j["environment"] = json::parse(R"({"kind": "periodic", "params": ["omega"], "letters": [{"label": "x", "params": [0]}]})");
  j["model"] = json::parse(R"({"builder": "pinning", "h": 1.0, "waiting": {"geometric": 0.5, "s_max": 60}})");
  j["horizon"] = 4000;
  j["t_list"] = {1000, 2000, 4000};
  j["phi_grid"] = json::parse(R"({"min": -0.5, "max": 0.5, "step": 0.25})");
  std::ostringstream log;
  CHECK(cmd_cgf(parse_config(j), log) == kOk);
  const auto rows = read_csv(dir / "cgf.csv");
  REQUIRE(rows.size() == 11);
  CHECK(rows[0] == std::vector<std::string>{"phi_1", "z", "source"});
  int zero_rows = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (std::stod(rows[r][0]) != 0.0) continue;
    ++zero_rows;
    CHECK_THAT(std::stod(rows[r][1]), WithinAbs(0.6201145, rows[r][2] == "kingman" ? 1e-3 : 1e-7));
  }
  CHECK(zero_rows == 2);
  const auto routes = read_csv(dir / "cgf_routes.csv");
  CHECK(routes[0] == std::vector<std::string>{"phi_1", "z_kingman", "kingman_spread", "z_variational", "gap"});
  CHECK(routes.size() == 6);
}

TEST_CASE("route disagreement beyond tolerance is a numerical failure") {
  const auto dir = scratch("gap");
  json j = contact_config(dir);
  j["phi_grid"] = json::parse(R"({"min": -1, "max": 1, "step": 1})");
  j["t_list"] = {10, 20};
  j["route_tolerance"] = 1e-12;
  std::ostringstream log;
  CHECK(cmd_cgf(parse_config(j), log) == kNumerical);
}

TEST_CASE("variational route needs a periodic environment") {
  const auto dir = scratch("notperiodic");
  json j = contact_config(dir);
  j["environment"] = json::parse(R"({"kind": "iid", "letters": [{"label": "x"}], "law": [1.0]})");
  j["route"] = "variational";
  std::ostringstream log;
  const auto code = test::error_code_of([&] { cmd_cgf(parse_config(j), log); });
  REQUIRE(code.has_value());
  CHECK(exit_code_for(*code) == 2);
  CHECK(test::error_code_of([&] { cmd_rate(parse_config(j), log); }) == ErrorCode::NotPeriodic);
}

TEST_CASE("rate command") {
  const auto dir = scratch("rate");
  json j = contact_config(dir);
  std::ostringstream log;
  CHECK(cmd_rate(parse_config(j), log) == kOk);
  const auto rows = read_csv(dir / "rate.csv");
  CHECK(rows[0] == std::vector<std::string>{"w_1", "rate", "normalized_rate", "boundary_flag"});
  CHECK_THAT(std::stod(rows.back()[0]), WithinAbs(1.0, 1e-12));
  CHECK_THAT(std::stod(rows.back()[2]), WithinAbs(-std::log(0.6), 1e-6));

  // with ell = -inf the free run writes the constrained file byte for byte
  const auto free_dir = scratch("rate_free");
  j["output_dir"] = free_dir.string();
  j["kind"] = "free";
  j["ell"] = "-inf";
  CHECK(cmd_rate(parse_config(j), log) == kOk);
  CHECK(slurp(free_dir / "rate.csv") == slurp(dir / "rate.csv"));

  j["w_grid"] = json::parse(R"({"min": [0, 0], "max": [1, 1], "step": [0.5, 0.5]})");
  CHECK(test::error_code_of([&] { cmd_rate(parse_config(j), log); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("simulate command is reproducible and reports empty balls") {
  const auto a = scratch("sim_a");
  const auto b = scratch("sim_b");
  json j = contact_config(a);
  j["w_grid"] = json::parse(R"({"min": 0.5, "max": 3, "step": 0.25})");
  std::ostringstream log;
  CHECK(cmd_simulate(parse_config(j), log) == kOk);
  j["output_dir"] = b.string();
  CHECK(cmd_simulate(parse_config(j), log) == kOk);
  CHECK(slurp(a / "scan.csv") == slurp(b / "scan.csv"));
  const auto rows = read_csv(a / "scan.csv");
  CHECK(rows[0] == std::vector<std::string>{"w_1", "log_mass_per_t", "std_error", "hits", "n_samples", "t", "seed"});
  REQUIRE(rows.size() == 12);
  CHECK(rows.back()[3] == "0");
  CHECK(rows.back()[1] == "-inf");
  CHECK(rows.back()[6] == "7");
}
