#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ccqed/error.hpp"
#include "ccqed/output.hpp"
#include "ccqed/scenario.hpp"
#include "ccqed/suite.hpp"

using namespace ccqed;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Validation;
}

Json small_kicked() {
  return Json::parse(R"({"model": {"half_length_N": 40, "lambda": 2.0},
                         "time": {"t_max": 4.0},
                         "pulse": {"U0": 1.0, "width_w": 1e-4}})");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ccqed_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("angles and value lists") {
  constexpr double pi = std::numbers::pi;
  CHECK(parse_angle(Json("3pi/4")) == doctest::Approx(0.75 * pi).epsilon(1e-15));
  CHECK(parse_angle(Json("0.75pi")) == doctest::Approx(0.75 * pi).epsilon(1e-15));
  CHECK(parse_angle(Json("-pi/3")) == doctest::Approx(-pi / 3).epsilon(1e-15));
  CHECK(parse_angle(Json("pi")) == doctest::Approx(pi));
  CHECK(parse_angle(Json(1.25)) == 1.25);
  CHECK(code_of([] { parse_angle(Json("quarter")); }) == ErrorCode::Validation);
  const auto v = parse_value_list("0.5, pi/2,2");
  REQUIRE(v.size() == 3);
  CHECK(v[1] == doctest::Approx(pi / 2));
  CHECK(code_of([] { parse_value_list("1,,2"); }) == ErrorCode::Validation);
}

TEST_CASE("every scenario has a parseable default") {
  CHECK(scenario_ids().size() == 6);
  for (const auto& id : scenario_ids()) {
    CAPTURE(id);
    const Json d = default_config(id);
    CHECK(d.at("scenario_id") == id);
    CHECK_NOTHROW(parse_config(resolve_config(id, Json::object())));
  }
  CHECK(code_of([] { default_config("fig9"); }) == ErrorCode::Validation);
}

TEST_CASE("config validation") {
  const auto rejects = [](const char* id, const char* doc) {
    return code_of([&] { resolve_config(id, Json::parse(doc)); }) == ErrorCode::Validation;
  };
  CHECK(rejects("kicked_fig4", R"({"model": {"lamda": 1.0}})"));
  CHECK(rejects("kicked_fig4", R"({"extra": 1})"));
  CHECK(rejects("kicked_fig4", R"({"model": {"lambda": "big"}})"));
  CHECK(rejects("kicked_fig4", R"({"scenario_id": "raman_fig8"})"));
  CHECK(rejects("kicked_fig4", R"({"time": {"sample_dt": 0.25, "series_dt": 0.1}})"));
  CHECK(rejects("kicked_fig4", R"({"observables": ["density", "banana"]})"));
  CHECK(rejects("kicked_fig4", R"({"output": {"format": "xml"}})"));
  CHECK(rejects("collision_fig5", R"({"time": {"t_max": 200.0}})"));
  CHECK(rejects("gamma_scan_fig6", R"({"time": {"t_max": 90.0}})"));

  const ScenarioConfig c = parse_config(resolve_config("kicked_fig4", small_kicked()));
  CHECK(c.model.half_length_N == 40);
  CHECK(c.model.kappa == 1.0);
  REQUIRE(c.pulse);
  CHECK(c.pulse->U0 == 1.0);
  CHECK(c.pulse->tau == 1.0);
  CHECK(c.t_max == 4.0);
  CHECK(c.wants("convergence"));
  CHECK_FALSE(c.wants("channels"));

  const ScenarioConfig f5 = parse_config(resolve_config("collision_fig5", Json::object()));
  CHECK_FALSE(f5.t_max);
  CHECK(f5.variants.size() == 3);
  CHECK(f5.packets.size() == 1);
  CHECK(f5.packets[0].momentum_k0 == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("output helpers") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(parse_format("json") == OutputFormat::Json);
  CHECK(extension(OutputFormat::Csv) == ".csv");

  const fs::path dir = scratch("atomic");
  write_atomic(dir / "a" / "b.txt", "first");
  write_atomic(dir / "a" / "b.txt", "second");
  CHECK(slurp(dir / "a" / "b.txt") == "second");
  CHECK(std::distance(fs::directory_iterator(dir / "a"), fs::directory_iterator{}) == 1);

  const std::string table = table_document({"x", "y"}, {{1.0, 2.5}, {3.0, -0.125}}, OutputFormat::Csv);
  CHECK(table == "x,y\n1,2.5\n3,-0.125\n");
  const Json j = Json::parse(table_document({"x", "y"}, {{1.0, 2.5}}, OutputFormat::Json));
  CHECK(j.dump().find("2.5") != std::string::npos);
}

TEST_CASE("kicked run writes deterministic files") {
  const fs::path a = scratch("kicked_a"), b = scratch("kicked_b");
  RunOptions opt;
  opt.out_dir = a;
  const RunManifest m1 = run_scenario("kicked_fig4", small_kicked(), opt);
  opt.out_dir = b;
  opt.threads = 3;
  const RunManifest m2 = run_scenario("kicked_fig4", small_kicked(), opt);

  CHECK(m1.code_version == code_version());
  CHECK(m1.deterministic);
  REQUIRE(m1.outputs.size() == m2.outputs.size());
  CHECK(m1.outputs.size() >= 3);
  for (std::size_t i = 0; i < m1.outputs.size(); ++i) {
    CAPTURE(m1.outputs[i].path);
    CHECK(m1.outputs[i].sha256 == m2.outputs[i].sha256);
    CHECK(sha256_hex(slurp(a / m1.outputs[i].path)) == m1.outputs[i].sha256);
  }
  for (const auto& inv : m1.invariants) {
    CAPTURE(inv.name);
    CHECK(inv.pass);
  }
  CHECK(fs::exists(a / "manifest.json"));
  const Json manifest = Json::parse(slurp(a / "manifest.json"));
  CHECK(manifest.at("config").at("model").at("half_length_N") == 40);
  CHECK(manifest.at("summary").contains("escape_numeric"));

  std::ifstream density(a / "density.csv");
  std::string header, first;
  std::getline(density, header);
  std::getline(density, first);
  CHECK(header == "t,l,value");
  CHECK(first.rfind("0,-40,", 0) == 0);

  SUBCASE("json output") {
    const fs::path c = scratch("kicked_json");
    RunOptions jopt;
    jopt.out_dir = c;
    jopt.format = OutputFormat::Json;
    const RunManifest m3 = run_scenario("kicked_fig4", small_kicked(), jopt);
    CHECK(fs::exists(c / "density.json"));
    const Json d = Json::parse(slurp(c / "density.json"));
    CHECK(d.at("times").size() == d.at("density").size());
    CHECK(m3.summary.at("escape_numeric") == m1.summary.at("escape_numeric"));
  }
}

TEST_CASE("truncation errors surface") {
  const fs::path a = scratch("coarse");
  RunOptions opt;
  opt.out_dir = a;
  CHECK(code_of([&] { run_scenario("kicked_fig4", Json::parse(R"({"model": {"half_length_N": 10}})"), opt); }) ==
        ErrorCode::TruncationTooCoarse);
}

TEST_CASE("sweep") {
  Json tmpl = small_kicked();
  tmpl["scenario_id"] = "kicked_fig4";
  RunOptions opt;
  opt.out_dir = scratch("sweep");
  const SweepResult empty = sweep(tmpl, "pulse.U0", {}, opt);
  CHECK(empty.runs.empty());
  CHECK(empty.table.empty());
  CHECK(code_of([&] { sweep(tmpl, "pulse.nothing", {}, opt); }) == ErrorCode::Validation);
  CHECK(code_of([&] { sweep(tmpl, "pulse.nothing", {1.0}, opt); }) == ErrorCode::Validation);

  opt.threads = 2;
  const SweepResult r = sweep(tmpl, "pulse.U0", {0.5, 1.0}, opt);
  REQUIRE(r.table.size() == 2);
  CHECK(r.columns.front() == "pulse.U0");
  CHECK(r.table[0][0] == 0.5);
  CHECK(fs::exists(opt.out_dir / "sweep.csv"));
  CHECK(fs::exists(opt.out_dir / "point_001" / "manifest.json"));
  const auto col = std::find(r.columns.begin(), r.columns.end(), "escape_numeric") - r.columns.begin();
  REQUIRE(col < static_cast<long>(r.columns.size()));
  CHECK(r.table[1][col] > r.table[0][col]);

  RunOptions serial = opt;
  serial.threads = 1;
  serial.out_dir = scratch("sweep_serial");
  const SweepResult s = sweep(tmpl, "pulse.U0", {0.5, 1.0}, serial);
  CHECK(s.table == r.table);
}

TEST_CASE("fast invariant suite") {
  SuiteOptions opt;
  opt.include_slow = false;
  opt.work_dir = scratch("suite");
  const SuiteReport report = run_invariant_suite(opt);
  for (const auto& c : report.checks) {
    CAPTURE(c.module);
    CAPTURE(c.name);
    CAPTURE(c.error);
    CHECK(c.pass);
  }
  CHECK(report.all_pass());
  opt.modules = {"model-core"};
  const SuiteReport one = run_invariant_suite(opt);
  for (const auto& c : one.checks) CHECK(c.module == "model-core");
}
