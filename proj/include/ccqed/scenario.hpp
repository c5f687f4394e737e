#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccqed/model.hpp"
#include "ccqed/observables.hpp"
#include "ccqed/output.hpp"

namespace ccqed {

using Json = nlohmann::json;

/// One member of a scenario family: a Hubbard U override (fig5) or a packet
/// set (photon_train).
struct Variant {
  std::string label;
  bool override_U = false;
  std::optional<double> hubbard_U;
  std::vector<PacketSpec> packets;
};

enum class InitialPolariton { None, Minus, Plus };

/// Typed view of a resolved scenario document.
struct ScenarioConfig {
  std::string scenario_id;
  ModelParams model;
  InitialPolariton polariton = InitialPolariton::None;
  std::vector<PacketSpec> packets;
  std::optional<PulseSpec> pulse;
  std::optional<double> t_max;  ///< nullopt = boundary-return time
  double sample_dt = 0.5;
  double series_dt = 0.1;
  double channel_dt = 0.0;  ///< 0 disables channel sampling
  int l0 = 9;
  std::vector<double> k0_scan;
  std::vector<Variant> variants;
  double trailing_fraction = 0.2;
  double trailing_window = 10.0;
  double accuracy_tol = 1e-9;
  double w_conv_tol = 1e-6;
  std::vector<std::string> observables;
  OutputFormat format = OutputFormat::Csv;

  bool wants(const std::string& observable) const;
};

const std::vector<std::string>& scenario_ids();
/// Complete default document for a scenario; every accepted key appears here.
Json default_config(const std::string& scenario_id);
/// Overlays `user` on the defaults. Unknown keys and ill-typed values are
/// rejected with a VALIDATION error.
Json resolve_config(const std::string& scenario_id, const Json& user);
ScenarioConfig parse_config(const Json& resolved);
Json load_config_file(const std::filesystem::path& path);

/// Number, or a string such as "0.75pi", "3pi/4", "pi/2".
double parse_angle(const Json& value);
/// Comma separated list of numbers or angles.
std::vector<double> parse_value_list(const std::string& text);

struct InvariantCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = true;
};

struct RunManifest {
  std::string scenario_id;
  Json config;
  std::string code_version;
  double wall_time_s = 0.0;
  bool deterministic = true;
  std::vector<InvariantCheck> invariants;
  Json summary = Json::object();
  std::vector<OutputRecord> outputs;
  std::vector<std::string> notes;
  std::vector<std::string> warnings;

  Json to_json() const;
};

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::optional<OutputFormat> format;  ///< overrides output.format
  int threads = 1;
  bool write_manifest = true;
};

std::string code_version();

/// Builds, evolves and measures one scenario; writes its files under
/// `options.out_dir` and returns the manifest. Conservation violations throw
/// INVARIANT_VIOLATION.
RunManifest run_scenario(const std::string& scenario_id, const Json& user_config, const RunOptions& options);

struct SweepResult {
  std::string axis;
  std::vector<double> values;
  std::vector<RunManifest> runs;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> table;
};

/// Runs the scenario once per value with `axis` (dotted path such as
/// "model.lambda" or "packets.0.momentum_k0") overridden. Points run
/// concurrently; the merged table does not depend on the worker count.
SweepResult sweep(const Json& config_template, const std::string& axis, const std::vector<double>& values,
                  const RunOptions& options);

}  // namespace ccqed
