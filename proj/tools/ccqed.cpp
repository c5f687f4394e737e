// Command-line front end: simulate, sweep, suite, defaults.
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "ccqed/error.hpp"
#include "ccqed/output.hpp"
#include "ccqed/scenario.hpp"
#include "ccqed/suite.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

std::string default_out_dir() {
  const char* env = std::getenv("CCQED_OUT_DIR");
  return env && *env ? env : "out";
}

int exit_code(ccqed::ErrorCode code) {
  return code == ccqed::ErrorCode::Validation || code == ccqed::ErrorCode::Io ? kExitValidation : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon-polariton scattering in a coupled-cavity array"};
  app.require_subcommand(1);

  std::string scenario, config_path, out_dir = default_out_dir(), format, axis, values;
  int threads = 1;
  bool fast = false;
  std::vector<std::string> modules;

  auto* simulate = app.add_subcommand("simulate", "Run one scenario and write its outputs");
  simulate->add_option("scenario_id", scenario, "kicked_fig4 | collision_fig5 | gamma_scan_fig6 | longtime_fig7 | "
                                                "raman_fig8 | photon_train")
      ->required();
  simulate->add_option("--config", config_path, "JSON overrides of the scenario defaults");
  simulate->add_option("--out", out_dir, "Output directory (default $CCQED_OUT_DIR or ./out)");
  simulate->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  simulate->add_option("--threads", threads, "Workers for independent runs inside a scenario")->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "Run a scenario over a list of values of one config field");
  sweep->add_option("--config", config_path, "Template config (must name scenario_id)")->required();
  sweep->add_option("--axis", axis, "Dotted config path, e.g. model.lambda or packets.0.momentum_k0")->required();
  sweep->add_option("--values", values, "Comma separated values; angles like 3pi/4 accepted")->required();
  sweep->add_option("--out", out_dir, "Output directory (default $CCQED_OUT_DIR or ./out)");
  sweep->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  sweep->add_option("--threads", threads, "Concurrent sweep points")->check(CLI::PositiveNumber);

  auto* suite = app.add_subcommand("suite", "Run the invariant suite and write suite_report.json");
  suite->add_option("--out", out_dir, "Output directory (default $CCQED_OUT_DIR or ./out)");
  suite->add_flag("--fast", fast, "Skip the two-packet witness runs");
  suite->add_option("--module", modules, "Restrict to a module (repeatable)");

  auto* defaults = app.add_subcommand("defaults", "Print the default config of a scenario");
  defaults->add_option("scenario_id", scenario)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    std::optional<ccqed::OutputFormat> fmt;
    if (!format.empty()) fmt = ccqed::parse_format(format);
    if (*simulate) {
      const ccqed::Json cfg = config_path.empty() ? ccqed::Json() : ccqed::load_config_file(config_path);
      const auto manifest = ccqed::run_scenario(scenario, cfg, {out_dir, fmt, threads, true});
      std::cout << manifest.summary.dump(2) << "\n";
      for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << "\n";
    } else if (*sweep) {
      const auto result = ccqed::sweep(ccqed::load_config_file(config_path), axis, ccqed::parse_value_list(values),
                                       {out_dir, fmt, threads, true});
      std::cout << ccqed::table_document(result.columns, result.table, ccqed::OutputFormat::Csv);
    } else if (*suite) {
      ccqed::SuiteOptions options;
      options.modules = modules;
      options.include_slow = !fast;
      options.work_dir = std::filesystem::path(out_dir) / "suite_work";
      const auto report = ccqed::run_invariant_suite(options);
      ccqed::write_atomic(std::filesystem::path(out_dir) / "suite_report.json", report.to_json().dump(2) + "\n");
      for (const auto& c : report.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.module << " " << c.name << " value=" << c.value
                  << (c.upper_bound ? " <= " : " >= ") << c.threshold << (c.error.empty() ? "" : " error: " + c.error)
                  << "\n";
      return report.all_pass() ? 0 : kExitNumerical;
    } else if (*defaults) {
      std::cout << ccqed::default_config(scenario).dump(2) << "\n";
    }
  } catch (const ccqed::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
