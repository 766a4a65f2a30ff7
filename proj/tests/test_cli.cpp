#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "supind/cli.hpp"

using namespace supind;
using namespace supind::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / "supind_cli_test" / name;
  fs::remove_all(p);
  return p;
}

int run_args(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "supind");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream log, err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), log, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(cells);
  }
  return rows;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333333333");
  CHECK(format_number(-30.0) == "-30");
  CHECK(format_number(std::nan("")) == "");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_fixed(0.5) == "0.500000000000");
  CHECK(format_fixed(-1e-14) == "0.000000000000");
}

TEST_CASE("flags override the config file") {
  const auto dir = scratch("cfg");
  fs::create_directories(dir);
  const auto file = dir / "in.json";
  std::ofstream(file) << R"({"lambda": -70, "alpha": 0.2, "c": 2.0, "grid": 55})";
  const std::vector<std::string> args = {"supind", "solve", "--config", file.string(), "--alpha", "0.05"};
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  const auto cfg = parse_args(static_cast<int>(argv.size()), argv.data());
  CHECK(cfg.command == "solve");
  CHECK(cfg.lambda == -70.0);
  CHECK(cfg.alpha == 0.05);
  CHECK(cfg.c_left == 2.0);
  CHECK(cfg.c_right == 2.0);
  CHECK(cfg.grid == 55);
  // round trip through the resolved form
  const auto again = overlay_json(to_json(resolve(cfg)), RunConfig{});
  CHECK(again.lambda == -70.0);
  CHECK(again.grid == 55);
  CHECK(again.command == "solve");
}

TEST_CASE("invalid input") {
  std::string err;
  CHECK(run_args({"solve", "--lambda", "-30", "--alpha", "0.6", "--out", scratch("bad").string()}, &err) == kInvalidInput);
  CHECK(err.find("alpha") != std::string::npos);
  CHECK(run_args({"solve", "--lambda", "2"}) == kInvalidInput);
  CHECK(run_args({"nonsense"}) == kInvalidInput);
  CHECK(run_args({"solve", "--format", "xml"}) == kInvalidInput);
  CHECK(run_args({"diagram", "--alpha-min", "0.3", "--alpha-max", "0.2"}) == kInvalidInput);
  CHECK(run_args({"phase", "--lambda", "-1", "--alpha", "0.3", "--energy", "-5", "--out", scratch("e").string()}) ==
        kInvalidInput);
}

TEST_CASE("output directory failure") {
  const auto dir = scratch("blocked");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  CHECK(run_args({"timemaps", "--lambda", "-30", "--alpha", "0.1", "--grid", "10", "--out", (dir / "file" / "sub").string()}) ==
        kFailure);
}

TEST_CASE("solve") {
  const auto out = scratch("solve");
  REQUIRE(run_args({"solve", "--lambda", "-30", "--p", "3", "--b", "1", "--c", "1", "--alpha", "0.01", "--out", out.string()}) == kOk);
  const auto doc = nlohmann::json::parse(slurp(out / "solutions.json"));
  CHECK(doc["schema"] == "1");
  CHECK(doc["count"].get<int>() >= 5);
  for (const auto& s : doc["solutions"]) {
    CHECK(s["passes"].get<bool>());
    const auto rows = read_csv(out / s["profile_file"].get<std::string>());
    REQUIRE(rows.size() > 1000);
    CHECK(rows[0] == std::vector<std::string>{"t", "u", "v"});
    CHECK(rows[1][0] == "0.000000000000");
    CHECK(rows.back()[0] == "1.000000000000");
  }
  CHECK(slurp(out / "solutions.json").find('\r') == std::string::npos);
  CHECK(fs::exists(out / "config.json"));

  const auto zero = scratch("solve0");
  REQUIRE(run_args({"solve", "--lambda", "-30", "--alpha", "0", "--out", zero.string()}) == kOk);
  CHECK(nlohmann::json::parse(slurp(zero / "solutions.json"))["count"] == 5);
}

TEST_CASE("time-map tables") {
  const auto out = scratch("tm");
  REQUIRE(run_args({"timemaps", "--lambda", "-30", "--alpha", "0.1", "--grid", "50", "--out", out.string()}) == kOk);
  const auto rows = read_csv(out / "timemaps.csv");
  REQUIRE(rows.size() > 50);
  CHECK(rows[0][0] == "x");
  CHECK(rows[0][2] == "tau_1");
  CHECK(rows[0].back() == "tau");
  const auto summary = nlohmann::json::parse(slurp(out / "timemaps_summary.json"));
  const double x_t = summary["x_t"].get<double>();
  // row nearest x_t: tau_1 = tau_2
  std::size_t best = 1;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (std::abs(std::stod(rows[i][0]) - x_t) < std::abs(std::stod(rows[best][0]) - x_t)) best = i;
  }
  CHECK(std::abs(std::stod(rows[best][2]) - std::stod(rows[best][3])) < 1e-6);
  // D3 rows leave tau_2 blank
  bool blank = false;
  for (const auto& r : rows) blank = blank || (r[1] == "D3" && r[3].empty());
  CHECK(blank);

  // byte-identical reruns, also from the written config
  const auto first = snapshot(out);
  REQUIRE(run_args({"timemaps", "--lambda", "-30", "--alpha", "0.1", "--grid", "50", "--out", out.string()}) == kOk);
  CHECK(snapshot(out) == first);
  REQUIRE(run_args({"timemaps", "--config", (out / "config.json").string()}) == kOk);
  CHECK(snapshot(out) == first);

  const auto zero = scratch("tm0");
  REQUIRE(run_args({"timemaps", "--lambda", "-30", "--alpha", "0", "--grid", "20", "--format", "json", "--out", zero.string()}) == kOk);
  const auto table = nlohmann::json::parse(slurp(zero / "timemaps.json"));
  CHECK(table["columns"][2] == "T_1");
  CHECK(table["rows"].size() == 21);
}

TEST_CASE("phase polylines") {
  const auto out = scratch("phase");
  REQUIRE(run_args({"phase", "--lambda", "-1", "--alpha", "0.3", "--energy", "-0.25", "--grid", "200", "--out", out.string()}) == kOk);
  const auto g0 = read_csv(out / "gamma0.csv");
  const auto g1 = read_csv(out / "gamma1.csv");
  REQUIRE(g0.size() == g1.size());
  for (std::size_t i = 1; i < g0.size(); ++i) {
    CHECK(g0[i][0] == g1[i][0]);
    CHECK(std::stod(g0[i][1]) == -std::stod(g1[i][1]));
  }
  const auto hom = read_csv(out / "homoclinic.csv");
  CHECK(std::stod(hom.back()[0]) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(std::stod(hom.back()[1]) == 0.0);
  // quartic -u^2 + u^4 / 2 = -1/4
  const auto orbit = read_csv(out / "orbit_0.csv");
  double lo = 1e9, hi = 0.0;
  for (std::size_t i = 1; i < orbit.size(); ++i) {
    lo = std::min(lo, std::stod(orbit[i][0]));
    hi = std::max(hi, std::stod(orbit[i][0]));
  }
  CHECK(std::abs(lo - std::sqrt(1.0 - std::sqrt(0.5))) < 1e-8);
  CHECK(std::abs(hi - std::sqrt(1.0 + std::sqrt(0.5))) < 1e-8);
}

TEST_CASE("diagram files") {
  const auto out = scratch("diagram");
  REQUIRE(run_args({"diagram", "--lambda", "-1", "--alpha-steps", "12", "--no-validate", "--out", out.string()}) == kOk);
  const auto comp = nlohmann::json::parse(slurp(out / "components.json"));
  CHECK(comp["components"] == 1);
  CHECK(comp["principal_grows"] == true);
  const auto crit = nlohmann::json::parse(slurp(out / "criticals.json"));
  CHECK(crit["odd"].empty());
  CHECK(crit["even"].empty());
  const auto rows = read_csv(out / "branches.csv");
  CHECK(rows[0] == std::vector<std::string>{"branch_id", "alpha", "x", "j", "domain"});
  CHECK(rows.size() == 16);
  CHECK(slurp(out / "diagram.gp").find("'branches.csv'") != std::string::npos);
}

TEST_CASE("multiplicity") {
  const auto out = scratch("mult");
  REQUIRE(run_args({"multiplicity", "--lambda", "-30", "--alpha", "0.01", "--alpha-star", "0.02", "--grid", "201", "--out", out.string()}) == kOk);
  const auto doc = nlohmann::json::parse(slurp(out / "multiplicity.json"));
  CHECK(doc["lower_bound"] == 5);
  CHECK(doc["total"].get<int>() >= 5);
  CHECK(doc["shortfall"] == false);
}
