#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "ccqed_cli_test";

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " '" CCQED_CLI_PATH "' " + args + " > '" + (kWork / "stdout.txt").string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& body) {
  fs::create_directories(kWork);
  const fs::path p = kWork / name;
  std::ofstream(p) << body;
  return p;
}

const char* kSmall = R"({"model": {"half_length_N": 40, "lambda": 2.0}, "time": {"t_max": 2.0},
                         "pulse": {"U0": 1.0, "width_w": 1e-4}})";

}  // namespace

TEST_CASE("cli exit codes") {
  fs::remove_all(kWork);
  const fs::path small = write_config("small.json", kSmall);

  CHECK(run("simulate kicked_fig4 --config '" + small.string() + "' --out '" + (kWork / "ok").string() + "'") == 0);
  CHECK(fs::exists(kWork / "ok" / "manifest.json"));
  CHECK(fs::exists(kWork / "ok" / "density.csv"));

  CHECK(run("simulate kicked_fig4 --config '" + small.string() + "' --format json --out '" +
            (kWork / "json").string() + "'") == 0);
  CHECK(fs::exists(kWork / "json" / "density.json"));

  // Validation failures.
  CHECK(run("simulate fig9 --out '" + (kWork / "bad").string() + "'") == 1);
  CHECK(run("simulate kicked_fig4 --config '" + write_config("typo.json", R"({"modle": {}})").string() + "'") == 1);
  CHECK(run("simulate kicked_fig4 --config '" + (kWork / "missing.json").string() + "'") == 1);
  CHECK(run("simulate kicked_fig4 --format xml") == 1);
  CHECK(run("frobnicate") == 1);

  // Numerical failure: a default-coupling polariton does not fit in N = 40.
  const fs::path coarse = write_config("coarse.json", R"({"model": {"half_length_N": 40}})");
  CHECK(run("simulate kicked_fig4 --config '" + coarse.string() + "' --out '" + (kWork / "coarse").string() + "'") ==
        2);
}

TEST_CASE("cli output directory from the environment") {
  fs::remove_all(kWork / "env");
  const fs::path small = write_config("small_env.json", kSmall);
  CHECK(run("simulate kicked_fig4 --config '" + small.string() + "'",
            "CCQED_OUT_DIR='" + (kWork / "env").string() + "'") == 0);
  CHECK(fs::exists(kWork / "env" / "manifest.json"));
}

TEST_CASE("cli sweep and defaults") {
  const fs::path tmpl = write_config(
      "sweep.json", R"({"scenario_id": "kicked_fig4", "model": {"half_length_N": 40, "lambda": 2.0},
                        "time": {"t_max": 2.0}, "pulse": {"U0": 1.0, "width_w": 1e-4}})");
  CHECK(run("sweep --config '" + tmpl.string() + "' --axis pulse.U0 --values 0.5,1 --threads 2 --out '" +
            (kWork / "sweep").string() + "'") == 0);
  CHECK(fs::exists(kWork / "sweep" / "sweep.csv"));
  CHECK(fs::exists(kWork / "sweep" / "sweep_manifest.json"));
  CHECK(run("sweep --config '" + tmpl.string() + "' --axis pulse.nope --values 1") == 1);

  CHECK(run("defaults raman_fig8") == 0);
  std::ifstream out(kWork / "stdout.txt");
  const auto doc = nlohmann::json::parse(out);
  CHECK(doc.at("scenario_id") == "raman_fig8");
}

TEST_CASE("cli suite") {
  CHECK(run("suite --fast --module model-core --out '" + (kWork / "suite").string() + "'") == 0);
  CHECK(fs::exists(kWork / "suite" / "suite_report.json"));
}
